#pragma once

#include "irsvlp/estimation.hpp"
#include "irsvlp/gain_model.hpp"
#include "irsvlp/matrix3.hpp"
#include "irsvlp/scene.hpp"

namespace irsvlp {

/// Expected Hessian of the mismatched log-likelihood at the pseudo-true point
/// (negative definite near x0). The true-model means are taken at x_bar under
/// the true orientations.
Mat3 matrix_a(const Scene& scene, const Vec3& x_bar, const Vec3& x0,
              const OrientationSet& true_orientations, const OrientationSet& assumed_orientations,
              int quadrature = 1);

/// Expected outer product of the mismatched score at the pseudo-true point.
/// Diagonal LED terms use the variance-plus-squared-discrepancy identity;
/// cross terms multiply per-LED mean discrepancies. Symmetric PSD.
Mat3 matrix_b(const Scene& scene, const Vec3& x_bar, const Vec3& x0,
              const OrientationSet& true_orientations, const OrientationSet& assumed_orientations,
              int quadrature = 1);

/// MCRB = A^-1 B A^-1. Throws IllConditionedError when cond(A) >= 1e12.
Mat3 mcrb(const Mat3& a, const Mat3& b);

/// LB = MCRB + (x_bar - x0)(x_bar - x0)^T, entrywise exact sum.
Mat3 lower_bound(const Mat3& mcrb_matrix, const Vec3& x_bar, const Vec3& x0);

/// Matched-model CRB: inverse of the Gaussian FIM
/// F_mn = sum_i (P_TX,i^2 / sigma_i^2) d h_i/dx(m) d h_i/dx(n) at (x_bar, true).
/// Throws IllConditionedError for singular or near-singular F.
Mat3 fim_crb(const Scene& scene, const Vec3& x_bar, const OrientationSet& true_orientations,
             int quadrature = 1);

/// Pseudo-true point, bias, and the three bound matrices for one scenario.
struct BoundReport {
    Vec3 x0;
    Vec3 bias; // x_bar - x0
    Mat3 mcrb;
    Mat3 lb;
    Mat3 crb;
    double sqrt_trace_mcrb = 0.0;
    double sqrt_trace_lb = 0.0;
    double sqrt_trace_crb = 0.0;
};

/// Solves for x0 with the given estimator config, then assembles all bounds.
BoundReport compute_bound_report(const Scene& scene, const Vec3& x_bar,
                                 const OrientationSet& true_orientations,
                                 const OrientationSet& assumed_orientations,
                                 const EstimatorConfig& config);

} // namespace irsvlp
