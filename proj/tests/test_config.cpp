#include <doctest.h>

#include "irsvlp/config.hpp"
#include "irsvlp/errors.hpp"

using namespace irsvlp;
using doctest::Approx;

TEST_SUITE_BEGIN("config");

TEST_CASE("empty config yields the full default scenario") {
    const RunConfig rc = parse_config_text("{}", Profile::paper);
    const Scene& s = rc.scene;
    CHECK(s.irs.size() == 1764);
    REQUIRE(s.leds.size() == 4);
    CHECK(s.leds[0].position == Vec3{-1, 1, 3});
    CHECK(s.leds[1].position == Vec3{1, 1, 3});
    CHECK(s.leds[2].position == Vec3{1, -1, 3});
    CHECK(s.leds[3].position == Vec3{-1, -1, 3});
    for (const auto& led : s.leds) {
        CHECK(led.tx_power == 5.0);
        CHECK(led.lambertian_order == 1.0);
        CHECK(led.orientation.vec() == Vec3{0, 0, -1});
    }
    CHECK(s.pd_area == 1e-4);
    CHECK(s.receiver_orientation.vec() == Vec3{0, 0, 1});
    CHECK(s.los_blocked);
    CHECK(s.irs_layout.phong.reflectance == 0.95);
    CHECK(s.irs_layout.phong.diffuse_fraction == 0.0);
    CHECK(s.irs_layout.phong.directivity == 5.0);
    CHECK(rc.experiment.x_bar == Vec3{0.5, 0.5, 0.85});
    CHECK(rc.experiment.trials == 500);
    CHECK(s.room.extent().x == 4.0);
    CHECK(s.room.extent().y == 4.0);
    CHECK(s.room.extent().z == 3.0);
}

TEST_CASE("desk profile shrinks the array and the trial count") {
    const RunConfig rc = parse_config_text("{}", Profile::desk);
    CHECK(rc.scene.irs.size() == 196);
    CHECK(rc.experiment.trials == 200);
}

TEST_CASE("per-wall override rebuilds the array") {
    const RunConfig rc =
        parse_config_text(R"({"irs": {"per_wall_count": 49}})", Profile::paper);
    CHECK(rc.scene.irs.size() == 196);
}

TEST_CASE("zero noise variance is rejected") {
    CHECK_THROWS_AS(parse_config_text(R"({"noise": {"sigma2": 0.0}})", Profile::desk),
                    ConfigError);
}

TEST_CASE("malformed JSON is a config error") {
    CHECK_THROWS_AS(parse_config_text("{oops", Profile::desk), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"leds": [{"position": [0, 0]}]})", Profile::desk),
                    ConfigError);
}

TEST_CASE("experiment overrides") {
    const RunConfig rc = parse_config_text(
        R"({"experiment": {"k_values": [0.25], "sigma2_values": [1e-18],
            "trials": 7, "mode": "redraw-per-trial", "master_seed": 9,
            "estimator": {"grid_resolution": 0.2, "multistart": 3}}})",
        Profile::desk);
    CHECK(rc.experiment.k_values == std::vector<double>{0.25});
    CHECK(rc.experiment.sigma2_values == std::vector<double>{1e-18});
    CHECK(rc.experiment.trials == 7);
    CHECK(rc.experiment.mode == MismatchMode::redraw_per_trial);
    CHECK(rc.experiment.master_seed == 9);
    CHECK(rc.experiment.estimator.grid_resolution == 0.2);
    CHECK(rc.experiment.estimator.multistart == 3);
}

TEST_CASE("receiver and noise overrides reach the scene") {
    const RunConfig rc = parse_config_text(
        R"({"receiver": {"position": [0.1, -0.2, 1.0], "pd_area": 2e-4},
            "noise": {"sigma2": 1e-16}, "los_blocked": false})",
        Profile::desk);
    CHECK(rc.experiment.x_bar == Vec3{0.1, -0.2, 1.0});
    CHECK(rc.scene.pd_area == 2e-4);
    for (double v : rc.scene.noise_variances) CHECK(v == 1e-16);
    CHECK_FALSE(rc.scene.los_blocked);
}

TEST_SUITE_END();
