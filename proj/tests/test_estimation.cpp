#include <doctest.h>

#include <cmath>

#include "irsvlp/errors.hpp"
#include "irsvlp/estimation.hpp"
#include "test_helpers.hpp"

using namespace irsvlp;
using doctest::Approx;

namespace {

EstimatorConfig fast_config() {
    EstimatorConfig c;
    c.grid_resolution = 0.25;
    return c;
}

} // namespace

TEST_SUITE_BEGIN("estimation");

TEST_CASE("simulate_measurements reduces to mean powers without noise") {
    Scene s = test::tiny_scene();
    s.noise_variances.assign(s.num_leds(), 0.0); // suppressed noise draw
    const auto orients = OrientationSet::actual(s);
    Rng rng(1);
    const auto p = simulate_measurements(s, {0.5, 0.5, 0.85}, orients, rng);
    const auto mean = mean_powers(s, {0.5, 0.5, 0.85}, orients);
    for (size_t i = 0; i < p.size(); ++i) CHECK(p[i] == Approx(mean[i]).epsilon(1e-12));
}

TEST_CASE("simulate_measurements sample statistics") {
    Scene s = test::tiny_scene();
    const double sigma2 = 1e-17;
    s.noise_variances.assign(s.num_leds(), sigma2);
    const auto orients = OrientationSet::actual(s);
    const auto mean = mean_powers(s, {0.5, 0.5, 0.85}, orients);
    const int n = 100000;
    std::vector<double> sum(s.num_leds(), 0.0), sum_sq(s.num_leds(), 0.0);
    Rng rng(2024);
    const GainModel model(s, orients, 1);
    std::vector<double> base(s.num_leds());
    model.mean_powers({0.5, 0.5, 0.85}, base);
    for (int t = 0; t < n; ++t) {
        for (size_t i = 0; i < s.num_leds(); ++i) {
            const double draw = base[i] + rng.gaussian(0.0, std::sqrt(sigma2));
            sum[i] += draw;
            sum_sq[i] += (draw - mean[i]) * (draw - mean[i]);
        }
    }
    const double sigma = std::sqrt(sigma2);
    for (size_t i = 0; i < s.num_leds(); ++i) {
        CHECK(std::abs(sum[i] / n - mean[i]) < 4.0 * sigma / std::sqrt(1.0 * n));
        CHECK(sum_sq[i] / n == Approx(sigma2).epsilon(0.05));
    }
}

TEST_CASE("nls_objective basics") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 0.5, 4);
    const auto assumed = OrientationSet::assumed(s);
    const Vec3 x{0.5, 0.5, 0.85};

    SUBCASE("exact fit gives zero") {
        const auto p = mean_powers(s, x, assumed);
        CHECK(nls_objective(p, s, x, assumed) == 0.0);
    }
    SUBCASE("scaling the variances rescales the objective") {
        const auto p = mean_powers(s, x, OrientationSet::actual(s));
        const double base = nls_objective(p, s, {0.3, -0.4, 1.0}, assumed);
        Scene scaled = s;
        for (double& v : scaled.noise_variances) v *= 10.0;
        CHECK(nls_objective(p, scaled, {0.3, -0.4, 1.0}, assumed) ==
              Approx(base / 10.0).epsilon(1e-12));
    }
    SUBCASE("matches a hand-summed evaluation") {
        const auto p = mean_powers(s, x, OrientationSet::actual(s));
        const Vec3 q{-0.2, 0.8, 1.4};
        double want = 0.0;
        for (size_t i = 0; i < s.num_leds(); ++i) {
            const double predicted =
                s.leds[i].tx_power * total_gain(s, i, q, assumed).total;
            want += (p[i] - predicted) * (p[i] - predicted) / s.noise_variances[i];
        }
        CHECK(nls_objective(p, s, q, assumed) == Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("zero-noise estimate recovers the generating position") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 0.8, 12);
    const auto truth = OrientationSet::actual(s);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const auto p = mean_powers(s, x_bar, truth);
    const Estimate e = estimate_position(p, s, truth, EstimatorConfig{});
    CHECK(norm(e.position - x_bar) < 1e-6);
    CHECK(e.model == ModelTag::matched);
    CHECK(e.converged);
}

TEST_CASE("k=0: mismatched and matched estimates are identical") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 0.0, 5);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    Rng rng(7);
    const auto p = simulate_measurements(s, x_bar, OrientationSet::actual(s), rng);
    const Estimate mml = estimate_position(p, s, OrientationSet::assumed(s), fast_config());
    const Estimate ml = estimate_position(p, s, OrientationSet::actual(s), fast_config());
    CHECK(mml.position.x == ml.position.x);
    CHECK(mml.position.y == ml.position.y);
    CHECK(mml.position.z == ml.position.z);
    CHECK(mml.objective == ml.objective);
}

TEST_CASE("estimate_position is deterministic") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 1.0, 6);
    Rng rng(8);
    const auto p = simulate_measurements(s, {0.5, 0.5, 0.85}, OrientationSet::actual(s), rng);
    const PositionEstimator est(s, OrientationSet::assumed(s), fast_config());
    const Estimate a = est.estimate(p);
    const Estimate b = est.estimate(p);
    CHECK(a.position.x == b.position.x);
    CHECK(a.position.y == b.position.y);
    CHECK(a.position.z == b.position.z);
    CHECK(a.objective == b.objective);
}

TEST_CASE("refined objective never exceeds the coarse-grid minimum") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 1.0, 9);
    const PositionEstimator est(s, OrientationSet::assumed(s), fast_config());
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const auto p =
            simulate_measurements(s, test::random_interior_position(s.room, rng),
                                  OrientationSet::actual(s), rng);
        const Estimate e = est.estimate(p);
        CHECK(e.objective <= e.grid_objective);
        CHECK(s.search_region.contains(e.position));
        // Returned objective matches a re-evaluation at the returned position.
        CHECK(e.objective ==
              Approx(nls_objective(p, s, e.position, OrientationSet::assumed(s)))
                  .epsilon(1e-12));
    }
}

TEST_CASE("argmin is invariant to a consistent power/variance rescale") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 0.7, 13);
    Rng rng(14);
    auto p = simulate_measurements(s, {0.5, 0.5, 0.85}, OrientationSet::actual(s), rng);
    const Estimate base = estimate_position(p, s, OrientationSet::assumed(s), fast_config());

    const double c = 3.0;
    Scene scaled = s;
    for (auto& led : scaled.leds) led.tx_power *= c;
    for (double& v : scaled.noise_variances) v *= c * c;
    MeasurementVector scaled_p = p;
    for (double& v : scaled_p) v *= c;
    const Estimate rescaled =
        estimate_position(scaled_p, scaled, OrientationSet::assumed(scaled), fast_config());
    CHECK(norm(rescaled.position - base.position) < 1e-6);
}

TEST_CASE("pseudo_true with zero mismatch is the true position") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 0.0, 3);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const Vec3 x0 = pseudo_true(s, x_bar, OrientationSet::actual(s), OrientationSet::assumed(s),
                                EstimatorConfig{});
    CHECK(norm(x0 - x_bar) < 1e-6);
}

TEST_CASE("pseudo_true is strictly biased under k=1 mismatch") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 1.0, 1);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const Vec3 x0 = pseudo_true(s, x_bar, OrientationSet::actual(s), OrientationSet::assumed(s),
                                EstimatorConfig{});
    CHECK(norm(x0 - x_bar) > 1e-3);
    CHECK(s.search_region.contains(x0));
}

TEST_CASE("pseudo_true matches the brute-force lattice minimizer") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 1.0, 17);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const auto truth = OrientationSet::actual(s);
    const auto assumed = OrientationSet::assumed(s);
    const Vec3 refined = pseudo_true(s, x_bar, truth, assumed, EstimatorConfig{});
    const Vec3 brute = pseudo_true_brute_force(s, x_bar, truth, assumed, 0.05);
    CHECK(norm(refined - brute) < 0.05 * std::sqrt(3.0) + 1e-9);
}

TEST_CASE("estimator rejects mismatched measurement lengths") {
    Scene s = test::tiny_scene();
    const PositionEstimator est(s, OrientationSet::assumed(s), fast_config());
    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS((void)est.estimate(wrong), std::invalid_argument);
}

TEST_CASE("grid spans the search region with exact bounds") {
    Scene s = test::tiny_scene();
    const GainModel model(s, OrientationSet::assumed(s), 1);
    const MeanPowerGrid grid(model, s.search_region, 0.10);
    CHECK(grid.nx() == 41);
    CHECK(grid.ny() == 41);
    CHECK(grid.nz() == 31);
    const Vec3 first = grid.cell_position(0);
    CHECK(first.x == s.search_region.lo.x);
    const Vec3 last = grid.cell_position(grid.num_cells() - 1);
    CHECK(last.x == Approx(s.search_region.hi.x).epsilon(1e-15));
    CHECK(last.z == Approx(s.search_region.hi.z).epsilon(1e-15));
}

TEST_SUITE_END();
