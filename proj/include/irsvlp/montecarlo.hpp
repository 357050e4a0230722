#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irsvlp/bounds.hpp"
#include "irsvlp/estimation.hpp"
#include "irsvlp/rng.hpp"
#include "irsvlp/scene.hpp"

namespace irsvlp {

/// How the true wall orientations are drawn across trials.
enum class MismatchMode {
    redraw_per_trial, // fresh wall perturbations every trial (RMSE-vs-k runs)
    fixed_seeded,     // one draw per k, reused for all noise levels and trials
};

struct ExperimentConfig {
    Vec3 x_bar{0.5, 0.5, 0.85};       // true receiver position
    std::vector<double> k_values;      // radians
    std::vector<double> sigma2_values; // W^2, applied to every LED
    int trials = 500;
    MismatchMode mode = MismatchMode::fixed_seeded;
    uint64_t master_seed = 1;
    EstimatorConfig estimator;
    bool run_ml = true; // also run the matched estimator with oracle orientations

    void validate(const Scene& scene) const;
};

/// Aggregates for one (k, sigma^2) grid point. Bound fields are filled in
/// fixed-seeded mode only.
struct PointResult {
    double k = 0.0;
    double sigma2 = 0.0;
    double rmse_mml = 0.0;
    std::optional<double> rmse_ml;
    std::optional<double> sqrt_trace_mcrb;
    std::optional<double> sqrt_trace_lb;
    std::optional<double> sqrt_trace_crb;
    std::optional<double> bias_norm;
    std::optional<Vec3> x0;
    std::optional<Mat3> mcrb;
    std::optional<Mat3> lb;
    std::optional<Mat3> crb;
    int trials = 0;
    uint64_t seed = 0;
    int mml_nonconverged = 0;
    int ml_nonconverged = 0;
};

struct ExperimentResult {
    std::string mode;
    Vec3 x_bar;
    uint64_t master_seed = 0;
    std::vector<PointResult> points;
    /// Realized true wall orientations per k (fixed-seeded mode).
    std::vector<std::array<UnitVec3, 4>> realized_wall_orientations;
    std::vector<double> k_values;
};

/// sqrt(mean squared Euclidean error). Throws on an empty list.
double rmse(std::span<const Vec3> estimates, const Vec3& x_bar);

/// RMSE versus perturbation half-width k: every trial draws fresh wall
/// perturbations and noise from its own substream.
ExperimentResult run_rmse_vs_k(const Scene& scene, const ExperimentConfig& config);

/// RMSE and bound overlays versus noise level: one wall-perturbation draw per
/// k (derived from the master seed), noise redrawn per trial. MCRB/LB/CRB are
/// computed per (k, sigma^2); the pseudo-true point once per k.
ExperimentResult run_rmse_vs_noise(const Scene& scene, const ExperimentConfig& config);

/// Long-format CSV: k,sigma2,inv_sigma2_db,series,value_m,trials,seed with one
/// row per populated series. Byte-stable for identical configs and seeds.
std::string experiment_to_csv(const ExperimentResult& result);

/// JSON variant carrying the full bound matrices and realized orientations.
std::string experiment_to_json(const ExperimentResult& result, int indent = 2);

} // namespace irsvlp
