#include "irsvlp/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "irsvlp/errors.hpp"

namespace irsvlp {

void ExperimentConfig::validate(const Scene& scene) const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (k_values.empty()) throw ConfigError("k_values must not be empty");
    if (sigma2_values.empty()) throw ConfigError("sigma2_values must not be empty");
    for (double k : k_values)
        if (k < 0) throw ConfigError("k values must be >= 0");
    for (double s : sigma2_values)
        if (!(s > 0)) throw ConfigError("sigma^2 values must be > 0");
    if (!scene.search_region.contains(x_bar))
        throw ConfigError("x_bar must lie inside the search region");
    estimator.validate();
}

double rmse(std::span<const Vec3> estimates, const Vec3& x_bar) {
    if (estimates.empty()) throw std::invalid_argument("rmse: empty estimate list");
    double sum = 0.0;
    for (const Vec3& e : estimates) sum += squared_norm(e - x_bar);
    return std::sqrt(sum / static_cast<double>(estimates.size()));
}

namespace {

double rmse_from_sq(const std::vector<double>& err_sq) {
    double sum = 0.0;
    for (double e : err_sq) sum += e;
    return std::sqrt(sum / static_cast<double>(err_sq.size()));
}

} // namespace

ExperimentResult run_rmse_vs_k(const Scene& scene, const ExperimentConfig& config) {
    if (config.mode != MismatchMode::redraw_per_trial)
        throw ConfigError("run_rmse_vs_k requires redraw-per-trial mode");
    config.validate(scene);

    ExperimentResult result;
    result.mode = "rmse-vs-k";
    result.x_bar = config.x_bar;
    result.master_seed = config.master_seed;
    result.k_values = config.k_values;

    const OrientationSet assumed = OrientationSet::assumed(scene);
    const PositionEstimator mml(scene, assumed, config.estimator);
    const auto wall_angles = wall_assumed_angles();
    const size_t n_leds = scene.num_leds();

    for (size_t ki = 0; ki < config.k_values.size(); ++ki) {
        const double k = config.k_values[ki];
        for (size_t si = 0; si < config.sigma2_values.size(); ++si) {
            const double sigma2 = config.sigma2_values[si];
            const std::vector<double> variances(n_leds, sigma2);
            const double noise_std = std::sqrt(sigma2);

            std::vector<double> mml_err_sq(static_cast<size_t>(config.trials));
            std::vector<double> ml_err_sq(config.run_ml ? static_cast<size_t>(config.trials) : 0);
            std::vector<unsigned char> mml_conv(static_cast<size_t>(config.trials), 1);
            std::vector<unsigned char> ml_conv(static_cast<size_t>(config.trials), 1);

#pragma omp parallel for schedule(dynamic)
            for (int t = 0; t < config.trials; ++t) {
                Rng rng = derive_trial_rng(config.master_seed, static_cast<uint32_t>(ki),
                                           static_cast<uint32_t>(si), static_cast<uint64_t>(t));
                const auto walls = perturb_wall_orientations(wall_angles, k, rng);
                const OrientationSet true_set =
                    OrientationSet::from_walls(scene, walls, OrientationTag::actual);

                const GainModel true_model(scene, true_set, config.estimator.quadrature);
                std::vector<double> p_rx(n_leds);
                true_model.mean_powers(config.x_bar, p_rx);
                for (double& p : p_rx) p += rng.gaussian(0.0, noise_std);

                const Estimate em = mml.estimate(p_rx, variances);
                mml_err_sq[static_cast<size_t>(t)] = squared_norm(em.position - config.x_bar);
                mml_conv[static_cast<size_t>(t)] = em.converged ? 1 : 0;

                if (config.run_ml) {
                    const PositionEstimator ml(scene, true_set, config.estimator);
                    const Estimate el = ml.estimate(p_rx, variances);
                    ml_err_sq[static_cast<size_t>(t)] = squared_norm(el.position - config.x_bar);
                    ml_conv[static_cast<size_t>(t)] = el.converged ? 1 : 0;
                }
            }

            PointResult pt;
            pt.k = k;
            pt.sigma2 = sigma2;
            pt.trials = config.trials;
            pt.seed = config.master_seed;
            pt.rmse_mml = rmse_from_sq(mml_err_sq);
            for (unsigned char c : mml_conv)
                if (!c) ++pt.mml_nonconverged;
            if (config.run_ml) {
                pt.rmse_ml = rmse_from_sq(ml_err_sq);
                for (unsigned char c : ml_conv)
                    if (!c) ++pt.ml_nonconverged;
            }
            result.points.push_back(pt);
        }
    }
    return result;
}

ExperimentResult run_rmse_vs_noise(const Scene& scene, const ExperimentConfig& config) {
    if (config.mode != MismatchMode::fixed_seeded)
        throw ConfigError("run_rmse_vs_noise requires fixed-seeded mode");
    config.validate(scene);

    ExperimentResult result;
    result.mode = "rmse-vs-noise";
    result.x_bar = config.x_bar;
    result.master_seed = config.master_seed;
    result.k_values = config.k_values;

    const OrientationSet assumed = OrientationSet::assumed(scene);
    const PositionEstimator mml(scene, assumed, config.estimator);
    const auto wall_angles = wall_assumed_angles();
    const size_t n_leds = scene.num_leds();
    const std::vector<double> unit_weights(n_leds, 1.0);

    for (size_t ki = 0; ki < config.k_values.size(); ++ki) {
        const double k = config.k_values[ki];
        Rng orient_rng = derive_mismatch_rng(config.master_seed, static_cast<uint32_t>(ki));
        const auto walls = perturb_wall_orientations(wall_angles, k, orient_rng);
        result.realized_wall_orientations.push_back(walls);
        const OrientationSet true_set =
            OrientationSet::from_walls(scene, walls, OrientationTag::actual);

        const GainModel true_model(scene, true_set, config.estimator.quadrature);
        std::vector<double> noiseless(n_leds);
        true_model.mean_powers(config.x_bar, noiseless);

        // Pseudo-true point: fit the assumed model to the noiseless true means.
        // Unit weights; the minimizer is invariant to a uniform sigma^2 scale.
        const Vec3 x0 = mml.estimate(noiseless, unit_weights).position;
        const Vec3 bias = config.x_bar - x0;

        std::unique_ptr<PositionEstimator> ml;
        if (config.run_ml)
            ml = std::make_unique<PositionEstimator>(scene, true_set, config.estimator);

        for (size_t si = 0; si < config.sigma2_values.size(); ++si) {
            const double sigma2 = config.sigma2_values[si];
            const std::vector<double> variances(n_leds, sigma2);
            const double noise_std = std::sqrt(sigma2);

            Scene scene_pt = scene;
            scene_pt.noise_variances.assign(n_leds, sigma2);
            const Mat3 a =
                matrix_a(scene_pt, config.x_bar, x0, true_set, assumed, config.estimator.quadrature);
            const Mat3 b =
                matrix_b(scene_pt, config.x_bar, x0, true_set, assumed, config.estimator.quadrature);
            const Mat3 mcrb_m = mcrb(a, b);
            const Mat3 lb_m = lower_bound(mcrb_m, config.x_bar, x0);
            const Mat3 crb_m = fim_crb(scene_pt, config.x_bar, true_set,
                                       config.estimator.quadrature);

            std::vector<double> mml_err_sq(static_cast<size_t>(config.trials));
            std::vector<double> ml_err_sq(config.run_ml ? static_cast<size_t>(config.trials) : 0);
            std::vector<unsigned char> mml_conv(static_cast<size_t>(config.trials), 1);
            std::vector<unsigned char> ml_conv(static_cast<size_t>(config.trials), 1);

#pragma omp parallel for schedule(dynamic)
            for (int t = 0; t < config.trials; ++t) {
                Rng rng = derive_trial_rng(config.master_seed, static_cast<uint32_t>(ki),
                                           static_cast<uint32_t>(si), static_cast<uint64_t>(t));
                std::vector<double> p_rx = noiseless;
                for (double& p : p_rx) p += rng.gaussian(0.0, noise_std);

                const Estimate em = mml.estimate(p_rx, variances);
                mml_err_sq[static_cast<size_t>(t)] = squared_norm(em.position - config.x_bar);
                mml_conv[static_cast<size_t>(t)] = em.converged ? 1 : 0;
                if (config.run_ml) {
                    const Estimate el = ml->estimate(p_rx, variances);
                    ml_err_sq[static_cast<size_t>(t)] = squared_norm(el.position - config.x_bar);
                    ml_conv[static_cast<size_t>(t)] = el.converged ? 1 : 0;
                }
            }

            PointResult pt;
            pt.k = k;
            pt.sigma2 = sigma2;
            pt.trials = config.trials;
            pt.seed = config.master_seed;
            pt.rmse_mml = rmse_from_sq(mml_err_sq);
            for (unsigned char c : mml_conv)
                if (!c) ++pt.mml_nonconverged;
            if (config.run_ml) {
                pt.rmse_ml = rmse_from_sq(ml_err_sq);
                for (unsigned char c : ml_conv)
                    if (!c) ++pt.ml_nonconverged;
            }
            pt.x0 = x0;
            pt.bias_norm = norm(bias);
            pt.mcrb = mcrb_m;
            pt.lb = lb_m;
            pt.crb = crb_m;
            pt.sqrt_trace_mcrb = std::sqrt(std::max(mcrb_m.trace(), 0.0));
            pt.sqrt_trace_lb = std::sqrt(std::max(lb_m.trace(), 0.0));
            pt.sqrt_trace_crb = std::sqrt(std::max(crb_m.trace(), 0.0));
            result.points.push_back(pt);
        }
    }
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void csv_row(std::ostringstream& out, const PointResult& pt, const char* series, double value) {
    out << fmt_double(pt.k) << ',' << fmt_double(pt.sigma2) << ','
        << fmt_double(10.0 * std::log10(1.0 / pt.sigma2)) << ',' << series << ','
        << fmt_double(value) << ',' << pt.trials << ',' << pt.seed << '\n';
}

nlohmann::json mat_to_json(const Mat3& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back(nlohmann::json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

} // namespace

std::string experiment_to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "k,sigma2,inv_sigma2_db,series,value_m,trials,seed\n";
    for (const PointResult& pt : result.points) {
        csv_row(out, pt, "rmse_mml", pt.rmse_mml);
        if (pt.rmse_ml) csv_row(out, pt, "rmse_ml", *pt.rmse_ml);
        if (pt.sqrt_trace_mcrb) csv_row(out, pt, "sqrt_trace_mcrb", *pt.sqrt_trace_mcrb);
        if (pt.sqrt_trace_lb) csv_row(out, pt, "sqrt_trace_lb", *pt.sqrt_trace_lb);
        if (pt.sqrt_trace_crb) csv_row(out, pt, "sqrt_trace_crb", *pt.sqrt_trace_crb);
        if (pt.bias_norm) csv_row(out, pt, "bias_norm", *pt.bias_norm);
    }
    return out.str();
}

std::string experiment_to_json(const ExperimentResult& result, int indent) {
    nlohmann::json j;
    j["mode"] = result.mode;
    j["x_bar"] = {result.x_bar.x, result.x_bar.y, result.x_bar.z};
    j["master_seed"] = result.master_seed;
    if (!result.realized_wall_orientations.empty()) {
        nlohmann::json per_k = nlohmann::json::array();
        for (size_t ki = 0; ki < result.realized_wall_orientations.size(); ++ki) {
            nlohmann::json walls = nlohmann::json::array();
            for (const UnitVec3& w : result.realized_wall_orientations[ki])
                walls.push_back({w.x(), w.y(), w.z()});
            per_k.push_back({{"k", result.k_values[ki]}, {"wall_orientations", walls}});
        }
        j["realized_mismatch"] = per_k;
    }
    nlohmann::json points = nlohmann::json::array();
    for (const PointResult& pt : result.points) {
        nlohmann::json p{{"k", pt.k},
                         {"sigma2", pt.sigma2},
                         {"inv_sigma2_db", 10.0 * std::log10(1.0 / pt.sigma2)},
                         {"rmse_mml", pt.rmse_mml},
                         {"trials", pt.trials},
                         {"seed", pt.seed},
                         {"mml_nonconverged", pt.mml_nonconverged}};
        if (pt.rmse_ml) {
            p["rmse_ml"] = *pt.rmse_ml;
            p["ml_nonconverged"] = pt.ml_nonconverged;
        }
        if (pt.x0) p["x0"] = {pt.x0->x, pt.x0->y, pt.x0->z};
        if (pt.bias_norm) p["bias_norm"] = *pt.bias_norm;
        if (pt.sqrt_trace_mcrb) p["sqrt_trace_mcrb"] = *pt.sqrt_trace_mcrb;
        if (pt.sqrt_trace_lb) p["sqrt_trace_lb"] = *pt.sqrt_trace_lb;
        if (pt.sqrt_trace_crb) p["sqrt_trace_crb"] = *pt.sqrt_trace_crb;
        if (pt.mcrb) p["mcrb"] = mat_to_json(*pt.mcrb);
        if (pt.lb) p["lb"] = mat_to_json(*pt.lb);
        if (pt.crb) p["crb"] = mat_to_json(*pt.crb);
        points.push_back(p);
    }
    j["points"] = points;
    return j.dump(indent);
}

} // namespace irsvlp
