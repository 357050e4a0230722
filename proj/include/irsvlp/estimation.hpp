#pragma once

#include <memory>
#include <span>
#include <vector>

#include "irsvlp/gain_model.hpp"
#include "irsvlp/rng.hpp"
#include "irsvlp/scene.hpp"

namespace irsvlp {

struct EstimatorConfig {
    double grid_resolution = 0.05;   // m, coarse exhaustive stage
    double refine_tolerance = 1e-6;  // m, step-norm stopping rule
    int max_refine_iterations = 80;
    int multistart = 8;              // refinement starts from the best grid cells
    double start_separation = 0.25;  // m, minimum spacing between starts
    int quadrature = 1;
    // The weighted mean-discrepancy surface develops needle-like minima close
    // to the walls; the pseudo-true solve therefore scans a finer streamed
    // lattice than the per-trial estimator.
    double pseudo_true_resolution = 0.02; // m

    void validate() const;
};

enum class ModelTag { matched, mismatched };

struct Estimate {
    Vec3 position;
    double objective = 0.0;
    ModelTag model = ModelTag::mismatched;
    // diagnostics
    Vec3 grid_minimum;
    double grid_objective = 0.0;
    int refine_steps = 0;
    bool converged = true;
};

/// One realization of the N_L received powers (watts); entries may be negative
/// because the additive noise is an unclipped Gaussian.
using MeasurementVector = std::vector<double>;

/// P_RX,i = P_TX,i h_i(x, true orientations) + eta_i, eta_i ~ N(0, sigma_i^2)
/// independent across LEDs, drawn in LED order.
MeasurementVector simulate_measurements(const Scene& scene, const Vec3& x_bar,
                                        const OrientationSet& true_orientations, Rng& rng,
                                        int quadrature = 1);

/// Weighted squared residual sum_i (P_RX,i - P_TX,i h_i(x))^2 / sigma_i^2.
/// Assumed orientations give the mismatched objective, true ones the matched.
double nls_objective(std::span<const double> p_rx, const Scene& scene, const Vec3& x,
                     const OrientationSet& orientations, int quadrature = 1);

/// Regular lattice of noiseless mean powers over a box: the coarse stage of
/// the estimator. Built once per orientation set and shared across trials.
class MeanPowerGrid {
  public:
    /// Fills the lattice with an OpenMP parallel loop over cells; the result
    /// is independent of thread count (each cell writes its own slot).
    MeanPowerGrid(const GainModel& model, const Box& region, double resolution);

    size_t num_cells() const { return static_cast<size_t>(nx_) * ny_ * nz_; }
    Vec3 cell_position(size_t flat_index) const;
    /// Objective at one cell; non-finite table entries yield +infinity.
    double objective(size_t flat_index, std::span<const double> p_rx,
                     std::span<const double> variances) const;
    /// Indices of the `count` best cells, ascending objective, ties broken by
    /// lower flat index (deterministic; independent of thread count). When
    /// min_separation > 0 the selection is greedy with that minimum spacing in
    /// meters, so the starts cover distinct basins of a multimodal objective.
    std::vector<size_t> best_cells(std::span<const double> p_rx,
                                   std::span<const double> variances, int count,
                                   double min_separation = 0.0) const;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }

  private:
    int nx_, ny_, nz_;
    size_t num_leds_;
    Box region_;
    Vec3 step_;
    std::vector<double> powers_; // [cell * num_leds + led]
};

/// One damped Gauss-Newton descent of the weighted NLS objective from `start`,
/// projected onto the search region, monotone in the objective (steps are only
/// accepted on strict decrease). Stops when the accepted step drops below
/// config.refine_tolerance.
struct RefineResult {
    Vec3 position;
    double objective = 0.0;
    int steps = 0;
    bool converged = false;
};
RefineResult refine_nls(const GainModel& model, const Scene& scene, std::span<const double> p_rx,
                        std::span<const double> variances, const Vec3& start,
                        double start_objective, const EstimatorConfig& config);

/// Maximum-likelihood position estimator under one orientation hypothesis:
/// exhaustive coarse grid over the search region followed by damped
/// Gauss-Newton refinement (multistart from the best cells, projected onto the
/// search box, monotone in the objective). Deterministic given its inputs.
class PositionEstimator {
  public:
    PositionEstimator(const Scene& scene, OrientationSet orientations, EstimatorConfig config);

    /// Thread-safe; uses the scene's noise variances as weights.
    Estimate estimate(std::span<const double> p_rx) const;
    /// Same, with explicit per-LED variances.
    Estimate estimate(std::span<const double> p_rx, std::span<const double> variances) const;

    const GainModel& model() const { return model_; }
    const EstimatorConfig& config() const { return config_; }

  private:
    const Scene* scene_;
    OrientationSet orientations_;
    EstimatorConfig config_;
    ModelTag tag_;
    GainModel model_;
    MeanPowerGrid grid_;
};

/// One-shot convenience wrapper around PositionEstimator.
Estimate estimate_position(std::span<const double> p_rx, const Scene& scene,
                           const OrientationSet& orientations, const EstimatorConfig& config);

/// Pseudo-true parameter: minimizer over the search region of the weighted
/// mean-power discrepancy between the true and assumed models, i.e. the
/// estimator's objective applied to the noiseless measurement vector
/// mean_powers(x_bar, true). Solved on a streamed lattice at
/// config.pseudo_true_resolution with spread-out Gauss-Newton starts.
Vec3 pseudo_true(const Scene& scene, const Vec3& x_bar, const OrientationSet& true_orientations,
                 const OrientationSet& assumed_orientations, const EstimatorConfig& config);

} // namespace irsvlp
