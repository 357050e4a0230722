#include "irsvlp/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "irsvlp/errors.hpp"

namespace irsvlp {

using nlohmann::json;

Profile profile_from_string(const std::string& name) {
    if (name == "paper") return Profile::paper;
    if (name == "desk") return Profile::desk;
    throw ConfigError("unknown profile '" + name + "' (expected: paper, desk)");
}

RunConfig default_run_config(Profile profile) {
    RunConfig rc;
    rc.profile = profile;

    Scene& s = rc.scene;
    s.room = Box{{-2.0, -2.0, 0.0}, {2.0, 2.0, 3.0}};
    s.search_region = s.room;
    s.los_blocked = true;
    const UnitVec3 down{Vec3{0, 0, -1}};
    for (const Vec3& pos : {Vec3{-1, 1, 3}, Vec3{1, 1, 3}, Vec3{1, -1, 3}, Vec3{-1, -1, 3}})
        s.leds.push_back(Led{.position = pos,
                             .orientation = down,
                             .lambertian_order = 1.0,
                             .tx_power = 5.0});
    s.receiver_orientation = UnitVec3{Vec3{0, 0, 1}};
    s.pd_area = 1e-4;
    s.noise_variances.assign(s.leds.size(), 1e-17);
    s.irs_layout = IrsLayout{.per_wall_count = profile == Profile::paper ? 441 : 49,
                             .element_width = 0.04,
                             .element_height = 0.02,
                             .h_gap = 0.02,
                             .v_gap = 0.01,
                             .phong = PhongParams{.reflectance = 0.95,
                                                  .diffuse_fraction = 0.0,
                                                  .directivity = 5.0}};
    s.irs = build_irs_array(s.irs_layout.per_wall_count, s.irs_layout.element_width,
                            s.irs_layout.element_height, s.irs_layout.h_gap, s.irs_layout.v_gap,
                            s.room, s.irs_layout.phong);

    ExperimentConfig& e = rc.experiment;
    e.x_bar = Vec3{0.5, 0.5, 0.85};
    e.k_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    e.sigma2_values = {1e-15, 1e-16, 1e-17};
    e.trials = profile == Profile::paper ? 500 : 200;
    e.mode = MismatchMode::fixed_seeded;
    e.master_seed = 1;
    e.estimator = EstimatorConfig{};
    return rc;
}

namespace {

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void apply_scene_overrides(RunConfig& rc, const json& j) {
    Scene& s = rc.scene;
    bool rebuild_irs = false;

    if (j.contains("room")) {
        const auto& jr = j.at("room");
        const double w = jr.value("width", s.room.extent().x);
        const double d = jr.value("depth", s.room.extent().y);
        const double h = jr.value("height", s.room.extent().z);
        s.room = Box{{-w / 2.0, -d / 2.0, 0.0}, {w / 2.0, d / 2.0, h}};
        s.search_region = s.room;
        rebuild_irs = true;
    }
    if (j.contains("search_region")) {
        const auto& jb = j.at("search_region");
        s.search_region = Box{vec_from_json(jb.at("lo")), vec_from_json(jb.at("hi"))};
    }
    if (j.contains("leds")) {
        s.leds.clear();
        for (const auto& jl : j.at("leds")) {
            s.leds.push_back(
                Led{.position = vec_from_json(jl.at("position")),
                    .orientation = UnitVec3::normalized(
                        jl.contains("orientation") ? vec_from_json(jl.at("orientation"))
                                                   : Vec3{0, 0, -1}),
                    .lambertian_order = jl.value("lambertian_order", 1.0),
                    .tx_power = jl.value("tx_power", 5.0)});
        }
        s.noise_variances.assign(s.leds.size(), 1e-17);
    }
    if (j.contains("receiver")) {
        const auto& jr = j.at("receiver");
        if (jr.contains("position")) rc.experiment.x_bar = vec_from_json(jr.at("position"));
        if (jr.contains("orientation"))
            s.receiver_orientation = UnitVec3::normalized(vec_from_json(jr.at("orientation")));
        if (jr.contains("pd_area")) s.pd_area = jr.at("pd_area").get<double>();
    }
    if (j.contains("noise")) {
        const auto& jn = j.at("noise");
        if (jn.contains("sigma2")) {
            if (jn.at("sigma2").is_array())
                s.noise_variances = jn.at("sigma2").get<std::vector<double>>();
            else
                s.noise_variances.assign(s.leds.size(), jn.at("sigma2").get<double>());
        }
    }
    if (j.contains("los_blocked")) s.los_blocked = j.at("los_blocked").get<bool>();
    if (j.contains("irs")) {
        const auto& ji = j.at("irs");
        IrsLayout& lay = s.irs_layout;
        lay.per_wall_count = ji.value("per_wall_count", lay.per_wall_count);
        lay.element_width = ji.value("element_width", lay.element_width);
        lay.element_height = ji.value("element_height", lay.element_height);
        lay.h_gap = ji.value("h_gap", lay.h_gap);
        lay.v_gap = ji.value("v_gap", lay.v_gap);
        lay.phong.reflectance = ji.value("reflectance", lay.phong.reflectance);
        lay.phong.diffuse_fraction = ji.value("diffuse_fraction", lay.phong.diffuse_fraction);
        lay.phong.directivity = ji.value("directivity", lay.phong.directivity);
        rebuild_irs = true;
    }
    if (rebuild_irs) {
        s.irs = s.irs_layout.per_wall_count > 0
                    ? build_irs_array(s.irs_layout.per_wall_count, s.irs_layout.element_width,
                                      s.irs_layout.element_height, s.irs_layout.h_gap,
                                      s.irs_layout.v_gap, s.room, s.irs_layout.phong)
                    : std::vector<IrsElement>{};
    }
}

void apply_experiment_overrides(RunConfig& rc, const json& j) {
    if (!j.contains("experiment")) return;
    const auto& je = j.at("experiment");
    ExperimentConfig& e = rc.experiment;
    if (je.contains("k_values")) e.k_values = je.at("k_values").get<std::vector<double>>();
    if (je.contains("sigma2_values"))
        e.sigma2_values = je.at("sigma2_values").get<std::vector<double>>();
    e.trials = je.value("trials", e.trials);
    e.master_seed = je.value("master_seed", e.master_seed);
    if (je.contains("mode")) {
        const std::string mode = je.at("mode").get<std::string>();
        if (mode == "redraw-per-trial")
            e.mode = MismatchMode::redraw_per_trial;
        else if (mode == "fixed-seeded")
            e.mode = MismatchMode::fixed_seeded;
        else
            throw ConfigError("unknown mismatch mode '" + mode + "'");
    }
    e.run_ml = je.value("run_ml", e.run_ml);
    if (je.contains("estimator")) {
        const auto& js = je.at("estimator");
        e.estimator.grid_resolution = js.value("grid_resolution", e.estimator.grid_resolution);
        e.estimator.refine_tolerance = js.value("refine_tolerance", e.estimator.refine_tolerance);
        e.estimator.max_refine_iterations =
            js.value("max_refine_iterations", e.estimator.max_refine_iterations);
        e.estimator.multistart = js.value("multistart", e.estimator.multistart);
        e.estimator.quadrature = js.value("quadrature", e.estimator.quadrature);
    }
}

} // namespace

RunConfig parse_config_text(const std::string& json_text, Profile profile) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config parse error: ") + err.what());
    }
    RunConfig rc = default_run_config(profile);
    try {
        apply_scene_overrides(rc, j);
        apply_experiment_overrides(rc, j);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config structure error: ") + err.what());
    }
    const ValidationReport report = scene_validate(rc.scene);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "invalid scene configuration:";
        for (const auto& v : report.violations) msg << "\n  - " << v;
        throw ConfigError(msg.str());
    }
    rc.experiment.validate(rc.scene);
    return rc;
}

RunConfig parse_config(const std::string& path, Profile profile) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), profile);
}

} // namespace irsvlp
