#include "irsvlp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irsvlp/errors.hpp"

namespace irsvlp {

void EstimatorConfig::validate() const {
    if (!(grid_resolution > 0)) throw ConfigError("grid_resolution must be > 0");
    if (!(refine_tolerance > 0)) throw ConfigError("refine_tolerance must be > 0");
    if (max_refine_iterations < 0) throw ConfigError("max_refine_iterations must be >= 0");
    if (multistart < 1) throw ConfigError("multistart must be >= 1");
    if (start_separation < 0) throw ConfigError("start_separation must be >= 0");
    if (quadrature < 1) throw ConfigError("quadrature must be >= 1");
}

MeasurementVector simulate_measurements(const Scene& scene, const Vec3& x_bar,
                                        const OrientationSet& true_orientations, Rng& rng,
                                        int quadrature) {
    const GainModel model(scene, true_orientations, quadrature);
    MeasurementVector p(scene.num_leds());
    model.mean_powers(x_bar, p);
    for (size_t i = 0; i < p.size(); ++i)
        p[i] += rng.gaussian(0.0, std::sqrt(scene.noise_variances[i]));
    return p;
}

namespace {

double weighted_residual(std::span<const double> p_rx, std::span<const double> predicted,
                         std::span<const double> variances) {
    double obj = 0.0;
    for (size_t i = 0; i < p_rx.size(); ++i) {
        const double r = p_rx[i] - predicted[i];
        obj += r * r / variances[i];
    }
    return obj;
}

} // namespace

double nls_objective(std::span<const double> p_rx, const Scene& scene, const Vec3& x,
                     const OrientationSet& orientations, int quadrature) {
    if (p_rx.size() != scene.num_leds())
        throw std::invalid_argument("measurement vector length must match the LED count");
    // Reference path: bit-identical to mean_powers, so an exact-fit residual
    // is exactly zero.
    const std::vector<double> predicted = mean_powers(scene, x, orientations, quadrature);
    return weighted_residual(p_rx, predicted, scene.noise_variances);
}

// ---------------------------------------------------------------------------
// MeanPowerGrid
// ---------------------------------------------------------------------------

namespace {

int axis_count(double lo, double hi, double resolution) {
    const int n = static_cast<int>(std::lround((hi - lo) / resolution)) + 1;
    return std::max(n, 2);
}

} // namespace

MeanPowerGrid::MeanPowerGrid(const GainModel& model, const Box& region, double resolution)
    : nx_(axis_count(region.lo.x, region.hi.x, resolution)),
      ny_(axis_count(region.lo.y, region.hi.y, resolution)),
      nz_(axis_count(region.lo.z, region.hi.z, resolution)),
      num_leds_(model.num_leds()),
      region_(region) {
    step_ = {(region.hi.x - region.lo.x) / (nx_ - 1), (region.hi.y - region.lo.y) / (ny_ - 1),
             (region.hi.z - region.lo.z) / (nz_ - 1)};
    powers_.resize(num_cells() * num_leds_);
    const int64_t total = static_cast<int64_t>(num_cells());
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const Vec3 pos = cell_position(static_cast<size_t>(idx));
        model.mean_powers(pos,
                          std::span<double>(powers_.data() + idx * num_leds_, num_leds_));
    }
}

Vec3 MeanPowerGrid::cell_position(size_t flat_index) const {
    const size_t iz = flat_index % nz_;
    const size_t iy = (flat_index / nz_) % ny_;
    const size_t ix = flat_index / (static_cast<size_t>(nz_) * ny_);
    return {region_.lo.x + ix * step_.x, region_.lo.y + iy * step_.y,
            region_.lo.z + iz * step_.z};
}

double MeanPowerGrid::objective(size_t flat_index, std::span<const double> p_rx,
                                std::span<const double> variances) const {
    const double* row = powers_.data() + flat_index * num_leds_;
    double obj = 0.0;
    for (size_t i = 0; i < num_leds_; ++i) {
        const double r = p_rx[i] - row[i];
        obj += r * r / variances[i];
    }
    return std::isfinite(obj) ? obj : std::numeric_limits<double>::infinity();
}

std::vector<size_t> MeanPowerGrid::best_cells(std::span<const double> p_rx,
                                              std::span<const double> variances, int count,
                                              double min_separation) const {
    // (objective, index) pairs; min-reduction over pairs is associative, so the
    // result is identical for any thread count.
    struct Entry {
        double obj;
        size_t idx;
        bool operator<(const Entry& o) const {
            return obj < o.obj || (obj == o.obj && idx < o.idx);
        }
    };
    const size_t want = static_cast<size_t>(std::max(count, 1));
    // Keep a generous candidate pool so the separation filter still finds
    // `want` spread-out cells.
    const size_t keep = min_separation > 0.0 ? std::max<size_t>(512, want * 64) : want;
    std::vector<Entry> best;
    best.reserve(keep + 1);
#pragma omp parallel
    {
        std::vector<Entry> local;
        local.reserve(keep + 1);
        const int64_t total = static_cast<int64_t>(num_cells());
#pragma omp for schedule(static) nowait
        for (int64_t idx = 0; idx < total; ++idx) {
            const Entry e{objective(static_cast<size_t>(idx), p_rx, variances),
                          static_cast<size_t>(idx)};
            if (!std::isfinite(e.obj)) continue;
            if (local.size() == keep && !(e < local.front())) continue;
            local.push_back(e);
            std::push_heap(local.begin(), local.end());
            if (local.size() > keep) {
                std::pop_heap(local.begin(), local.end());
                local.pop_back();
            }
        }
#pragma omp critical
        {
            for (const Entry& e : local) {
                if (best.size() == keep && !(e < best.front())) continue;
                best.push_back(e);
                std::push_heap(best.begin(), best.end());
                if (best.size() > keep) {
                    std::pop_heap(best.begin(), best.end());
                    best.pop_back();
                }
            }
        }
    }
    std::sort(best.begin(), best.end());
    std::vector<size_t> cells;
    cells.reserve(want);
    if (min_separation <= 0.0) {
        for (const Entry& e : best) {
            cells.push_back(e.idx);
            if (cells.size() == want) break;
        }
        return cells;
    }
    const double sep_sq = min_separation * min_separation;
    for (const Entry& e : best) {
        const Vec3 p = cell_position(e.idx);
        bool spaced = true;
        for (size_t c : cells)
            spaced = spaced && squared_norm(p - cell_position(c)) >= sep_sq;
        if (!spaced) continue;
        cells.push_back(e.idx);
        if (cells.size() == want) break;
    }
    return cells;
}

// ---------------------------------------------------------------------------
// PositionEstimator
// ---------------------------------------------------------------------------

PositionEstimator::PositionEstimator(const Scene& scene, OrientationSet orientations,
                                     EstimatorConfig config)
    : scene_(&scene),
      orientations_(std::move(orientations)),
      config_(config),
      tag_(orientations_.tag == OrientationTag::actual ? ModelTag::matched
                                                       : ModelTag::mismatched),
      model_(scene, orientations_, config.quadrature),
      grid_(model_, scene.search_region, config.grid_resolution) {
    config_.validate();
}

Estimate PositionEstimator::estimate(std::span<const double> p_rx) const {
    return estimate(p_rx, scene_->noise_variances);
}

Estimate PositionEstimator::estimate(std::span<const double> p_rx,
                                     std::span<const double> variances) const {
    if (p_rx.size() != scene_->num_leds() || variances.size() != scene_->num_leds())
        throw std::invalid_argument("measurement/variance length must match the LED count");

    const std::vector<size_t> starts =
        grid_.best_cells(p_rx, variances, config_.multistart, config_.start_separation);
    if (starts.empty())
        throw std::invalid_argument("estimate: every grid cell has a non-finite objective");

    Estimate est;
    est.model = tag_;
    est.grid_minimum = grid_.cell_position(starts[0]);
    est.grid_objective = grid_.objective(starts[0], p_rx, variances);

    RefineResult best{};
    bool have_best = false;
    const int n_starts = static_cast<int>(starts.size());
    std::vector<RefineResult> results(static_cast<size_t>(n_starts));
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < n_starts; ++s) {
        const size_t cell = starts[static_cast<size_t>(s)];
        results[static_cast<size_t>(s)] =
            refine_nls(model_, *scene_, p_rx, variances, grid_.cell_position(cell),
                       grid_.objective(cell, p_rx, variances), config_);
    }
    for (const RefineResult& r : results) {
        if (!have_best || r.objective < best.objective) {
            best = r;
            have_best = true;
        }
    }
    est.position = best.position;
    est.objective = best.objective;
    est.refine_steps = best.steps;
    est.converged = best.converged;
    return est;
}

RefineResult refine_nls(const GainModel& model, const Scene& scene, std::span<const double> p_rx,
                        std::span<const double> variances, const Vec3& start,
                        double start_objective, const EstimatorConfig& config) {
    const size_t n = scene.num_leds();
    std::vector<double> h(n);
    std::vector<Vec3> gh(n);
    std::vector<double> predicted(n);

    const Box& box = scene.search_region;
    Vec3 x = box.clamp(start);
    double fx = start_objective;

    auto objective_at = [&](const Vec3& p) {
        model.mean_powers(p, predicted);
        return weighted_residual(p_rx, predicted, variances);
    };

    RefineResult out{x, fx, 0, false};
    double lambda = 1e-3;
    for (int it = 0; it < config.max_refine_iterations; ++it) {
        // Residual chain rule: J has rows P_TX,i * grad h_i.
        try {
            model.gains_and_gradients(x, h, gh, nullptr);
        } catch (const GeometryError&) {
            break; // degenerate point: keep the best iterate found so far
        }
        Vec3 grad{};
        Mat3 gn = Mat3::zero();
        for (size_t i = 0; i < n; ++i) {
            const double p_tx = scene.leds[i].tx_power;
            const double r = p_tx * h[i] - p_rx[i];
            const double w = 1.0 / variances[i];
            grad += gh[i] * (2.0 * w * r * p_tx);
            gn += Mat3::outer(gh[i], gh[i]) * (2.0 * w * p_tx * p_tx);
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            const double damping = lambda * std::max(gn.trace() / 3.0, 1e-300);
            Vec3 step;
            try {
                step = solve(gn + Mat3::identity() * damping, -1.0 * grad);
            } catch (const std::domain_error&) {
                lambda *= 10.0;
                continue;
            }
            const Vec3 candidate = box.clamp(x + step);
            const Vec3 actual_step = candidate - x;
            const double fc = objective_at(candidate);
            if (std::isfinite(fc) && fc < fx) {
                const double step_norm = norm(actual_step);
                x = candidate;
                fx = fc;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                ++out.steps;
                if (step_norm < config.refine_tolerance) {
                    out.position = x;
                    out.objective = fx;
                    out.converged = true;
                    return out;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            // No descent direction at this damping range: treat as converged
            // to a local minimum of the projected objective.
            out.position = x;
            out.objective = fx;
            out.converged = true;
            return out;
        }
    }
    out.position = x;
    out.objective = fx;
    out.converged = false; // max iterations reached; best iterate returned, flagged
    return out;
}

Estimate estimate_position(std::span<const double> p_rx, const Scene& scene,
                           const OrientationSet& orientations, const EstimatorConfig& config) {
    const PositionEstimator estimator(scene, orientations, config);
    return estimator.estimate(p_rx);
}

Vec3 pseudo_true(const Scene& scene, const Vec3& x_bar, const OrientationSet& true_orientations,
                 const OrientationSet& assumed_orientations, const EstimatorConfig& config) {
    config.validate();
    const GainModel true_model(scene, true_orientations, config.quadrature);
    std::vector<double> noiseless(scene.num_leds());
    true_model.mean_powers(x_bar, noiseless);
    // The argmin is invariant to a uniform variance scale; normalizing by the
    // largest variance keeps the tiny power residuals well conditioned.
    std::vector<double> weights = scene.noise_variances;
    const double v_max = *std::max_element(weights.begin(), weights.end());
    for (double& w : weights) w /= v_max;

    const GainModel assumed_model(scene, assumed_orientations, config.quadrature);
    const Box& region = scene.search_region;
    const double resolution = config.pseudo_true_resolution;
    const int nx = axis_count(region.lo.x, region.hi.x, resolution);
    const int ny = axis_count(region.lo.y, region.hi.y, resolution);
    const int nz = axis_count(region.lo.z, region.hi.z, resolution);
    const Vec3 step{(region.hi.x - region.lo.x) / (nx - 1), (region.hi.y - region.lo.y) / (ny - 1),
                    (region.hi.z - region.lo.z) / (nz - 1)};
    const int64_t total = static_cast<int64_t>(nx) * ny * nz;
    auto lattice_pos = [&](int64_t idx) {
        const int iz = static_cast<int>(idx % nz);
        const int iy = static_cast<int>((idx / nz) % ny);
        const int ix = static_cast<int>(idx / (static_cast<int64_t>(nz) * ny));
        return Vec3{region.lo.x + ix * step.x, region.lo.y + iy * step.y,
                    region.lo.z + iz * step.z};
    };

    // Streamed scan keeping a candidate pool; merged pool is the global top-K
    // by (objective, index), independent of thread count.
    struct Entry {
        double obj;
        int64_t idx;
        bool operator<(const Entry& o) const {
            return obj < o.obj || (obj == o.obj && idx < o.idx);
        }
    };
    const size_t pool_size = 4096;
    std::vector<Entry> pool;
    pool.reserve(pool_size + 1);
#pragma omp parallel
    {
        std::vector<double> predicted(scene.num_leds());
        std::vector<Entry> local;
        local.reserve(pool_size + 1);
#pragma omp for schedule(static) nowait
        for (int64_t idx = 0; idx < total; ++idx) {
            assumed_model.mean_powers(lattice_pos(idx), predicted);
            const Entry e{weighted_residual(noiseless, predicted, weights), idx};
            if (!std::isfinite(e.obj)) continue;
            if (local.size() == pool_size && !(e < local.front())) continue;
            local.push_back(e);
            std::push_heap(local.begin(), local.end());
            if (local.size() > pool_size) {
                std::pop_heap(local.begin(), local.end());
                local.pop_back();
            }
        }
#pragma omp critical
        {
            for (const Entry& e : local) {
                if (pool.size() == pool_size && !(e < pool.front())) continue;
                pool.push_back(e);
                std::push_heap(pool.begin(), pool.end());
                if (pool.size() > pool_size) {
                    std::pop_heap(pool.begin(), pool.end());
                    pool.pop_back();
                }
            }
        }
    }
    if (pool.empty()) throw std::invalid_argument("pseudo_true: no finite objective found");
    std::sort(pool.begin(), pool.end());

    // Spread-out starts, then Gauss-Newton descents.
    const int n_starts = std::max(config.multistart, 16);
    const double separation = std::min(config.start_separation, 0.15);
    const double sep_sq = separation * separation;
    std::vector<Vec3> starts;
    std::vector<double> start_objs;
    for (const Entry& e : pool) {
        const Vec3 p = lattice_pos(e.idx);
        bool spaced = true;
        for (const Vec3& q : starts) spaced = spaced && squared_norm(p - q) >= sep_sq;
        if (!spaced) continue;
        starts.push_back(p);
        start_objs.push_back(e.obj);
        if (starts.size() == static_cast<size_t>(n_starts)) break;
    }

    std::vector<RefineResult> results(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < static_cast<int>(starts.size()); ++s)
        results[static_cast<size_t>(s)] =
            refine_nls(assumed_model, scene, noiseless, weights,
                       starts[static_cast<size_t>(s)], start_objs[static_cast<size_t>(s)], config);
    const RefineResult* best = &results.front();
    for (const RefineResult& r : results)
        if (r.objective < best->objective) best = &r;
    return best->position;
}

} // namespace irsvlp
