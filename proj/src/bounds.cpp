#include "irsvlp/bounds.hpp"

#include <cmath>

#include "irsvlp/errors.hpp"

namespace irsvlp {

namespace {

constexpr double kMaxCondition = 1e12;

struct ModelEval {
    std::vector<double> h;
    std::vector<Vec3> grad;
    std::vector<Mat3> hess;
};

ModelEval eval_full(const Scene& scene, const Vec3& x, const OrientationSet& orientations,
                    int quadrature) {
    const GainModel model(scene, orientations, quadrature);
    ModelEval e;
    e.h.resize(scene.num_leds());
    e.grad.resize(scene.num_leds());
    e.hess.resize(scene.num_leds());
    model.gains_gradients_hessians(x, e.h, e.grad, e.hess, nullptr);
    return e;
}

std::vector<double> true_means(const Scene& scene, const Vec3& x_bar,
                               const OrientationSet& true_orientations, int quadrature) {
    const GainModel model(scene, true_orientations, quadrature);
    std::vector<double> means(scene.num_leds());
    model.mean_powers(x_bar, means);
    return means;
}

} // namespace

Mat3 matrix_a(const Scene& scene, const Vec3& x_bar, const Vec3& x0,
              const OrientationSet& true_orientations, const OrientationSet& assumed_orientations,
              int quadrature) {
    const ModelEval at_x0 = eval_full(scene, x0, assumed_orientations, quadrature);
    const std::vector<double> ep = true_means(scene, x_bar, true_orientations, quadrature);
    Mat3 a = Mat3::zero();
    for (size_t i = 0; i < scene.num_leds(); ++i) {
        const double p_tx = scene.leds[i].tx_power;
        const double inv_var = 1.0 / scene.noise_variances[i];
        a += at_x0.hess[i] * (ep[i] * p_tx * inv_var);
        a += Mat3::outer(at_x0.grad[i], at_x0.grad[i]) * (-p_tx * p_tx * inv_var);
        a += at_x0.hess[i] * (-p_tx * p_tx * inv_var * at_x0.h[i]);
    }
    return a.symmetrized();
}

Mat3 matrix_b(const Scene& scene, const Vec3& x_bar, const Vec3& x0,
              const OrientationSet& true_orientations, const OrientationSet& assumed_orientations,
              int quadrature) {
    const ModelEval at_x0 = eval_full(scene, x0, assumed_orientations, quadrature);
    const std::vector<double> ep = true_means(scene, x_bar, true_orientations, quadrature);
    const size_t n = scene.num_leds();
    // Per-LED mean discrepancy between the true model at x_bar and the
    // mismatched model at x0.
    std::vector<double> disc(n);
    for (size_t i = 0; i < n; ++i)
        disc[i] = ep[i] - scene.leds[i].tx_power * at_x0.h[i];

    Mat3 b = Mat3::zero();
    for (size_t i = 0; i < n; ++i) {
        const double p_tx = scene.leds[i].tx_power;
        const double var = scene.noise_variances[i];
        const double second_moment = var + disc[i] * disc[i];
        b += Mat3::outer(at_x0.grad[i], at_x0.grad[i]) *
             ((p_tx / var) * (p_tx / var) * second_moment);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double p_tx_j = scene.leds[j].tx_power;
            b += Mat3::outer(at_x0.grad[i], at_x0.grad[j]) *
                 (p_tx * p_tx_j / (var * scene.noise_variances[j]) * disc[i] * disc[j]);
        }
    }
    return b.symmetrized();
}

Mat3 mcrb(const Mat3& a, const Mat3& b) {
    const double cond = symmetric_condition(a.symmetrized());
    if (!(cond < kMaxCondition))
        throw IllConditionedError("mcrb: matrix A is ill-conditioned (cond ~ " +
                                  std::to_string(cond) + ")");
    const Mat3 a_inv = inverse(a);
    return (a_inv * b * a_inv).symmetrized();
}

Mat3 lower_bound(const Mat3& mcrb_matrix, const Vec3& x_bar, const Vec3& x0) {
    return mcrb_matrix + Mat3::outer(x_bar - x0, x_bar - x0);
}

Mat3 fim_crb(const Scene& scene, const Vec3& x_bar, const OrientationSet& true_orientations,
             int quadrature) {
    const GainModel model(scene, true_orientations, quadrature);
    std::vector<double> h(scene.num_leds());
    std::vector<Vec3> grad(scene.num_leds());
    model.gains_and_gradients(x_bar, h, grad, nullptr);
    Mat3 fim = Mat3::zero();
    for (size_t i = 0; i < scene.num_leds(); ++i) {
        const double p_tx = scene.leds[i].tx_power;
        fim += Mat3::outer(grad[i], grad[i]) * (p_tx * p_tx / scene.noise_variances[i]);
    }
    fim = fim.symmetrized();
    const double cond = symmetric_condition(fim);
    if (!(cond < kMaxCondition))
        throw IllConditionedError("fim_crb: Fisher information matrix is singular "
                                  "or ill-conditioned (cond ~ " +
                                  std::to_string(cond) + ")");
    return inverse(fim).symmetrized();
}

BoundReport compute_bound_report(const Scene& scene, const Vec3& x_bar,
                                 const OrientationSet& true_orientations,
                                 const OrientationSet& assumed_orientations,
                                 const EstimatorConfig& config) {
    BoundReport rep;
    rep.x0 = pseudo_true(scene, x_bar, true_orientations, assumed_orientations, config);
    rep.bias = x_bar - rep.x0;
    const Mat3 a = matrix_a(scene, x_bar, rep.x0, true_orientations, assumed_orientations,
                            config.quadrature);
    const Mat3 b = matrix_b(scene, x_bar, rep.x0, true_orientations, assumed_orientations,
                            config.quadrature);
    rep.mcrb = mcrb(a, b);
    rep.lb = lower_bound(rep.mcrb, x_bar, rep.x0);
    rep.crb = fim_crb(scene, x_bar, true_orientations, config.quadrature);
    rep.sqrt_trace_mcrb = std::sqrt(std::max(rep.mcrb.trace(), 0.0));
    rep.sqrt_trace_lb = std::sqrt(std::max(rep.lb.trace(), 0.0));
    rep.sqrt_trace_crb = std::sqrt(std::max(rep.crb.trace(), 0.0));
    return rep;
}

} // namespace irsvlp
