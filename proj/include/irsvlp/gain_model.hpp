#pragma once

#include <limits>
#include <span>
#include <vector>

#include "irsvlp/channel.hpp"
#include "irsvlp/matrix3.hpp"
#include "irsvlp/scene.hpp"
#include "irsvlp/vec3.hpp"

namespace irsvlp {

/// Flags accumulated while evaluating spatial derivatives.
struct DiffStatus {
    /// Some clamped visibility factor was within 1e-9 of zero; the derivative
    /// is not defined on the clamp boundary itself.
    bool near_clamp_boundary = false;
    /// Smallest sin(beta) over contributing terms; ~0 means near-collinear
    /// geometry where the specular term's second derivative degenerates.
    double min_sin_beta = std::numeric_limits<double>::infinity();
};

/// Channel evaluator with all position-independent factors folded at
/// construction: one instance per (scene, orientation set, quadrature order).
/// Evaluation methods are const and safe to call concurrently.
///
/// gains() never throws: coincident geometry yields non-finite entries the
/// caller can reject. Derivative evaluations throw GeometryError at
/// coincident points and at exact specular collinearity.
class GainModel {
  public:
    GainModel(const Scene& scene, const OrientationSet& orientations, int quadrature = 1);

    size_t num_leds() const { return leds_.size(); }
    const Scene& scene() const { return *scene_; }
    int quadrature() const { return quadrature_; }

    /// Per-LED total channel gains h_i(x).
    void gains(const Vec3& x, std::span<double> out) const;

    /// Per-LED noiseless mean powers P_TX,i * h_i(x).
    void mean_powers(const Vec3& x, std::span<double> out) const;

    /// Gains plus analytic spatial gradients.
    void gains_and_gradients(const Vec3& x, std::span<double> h, std::span<Vec3> grad,
                             DiffStatus* status = nullptr) const;

    /// Gains, gradients, and analytic Hessians.
    void gains_gradients_hessians(const Vec3& x, std::span<double> h, std::span<Vec3> grad,
                                  std::span<Mat3> hess, DiffStatus* status = nullptr) const;

  private:
    struct LedData {
        Vec3 position;
        Vec3 orientation;
        double lambertian_order;
        double tx_power;
        double front_const; // (m+1) A_R / (2 pi)
        bool integer_order;
    };
    // One quadrature node of one element.
    struct SurfacePoint {
        Vec3 position;
        Vec3 normal;
        double diffuse_coeff;  // 2 r_k
        double specular_coeff; // (1 - r_k)(mu_k + 1)
        double directivity;    // mu_k
        bool integer_directivity;
    };
    // Position-independent front factor of (led, surface point).
    struct Term {
        uint32_t surface;
        double front;     // full constant multiplying f1 * (f2 + f3)
        double cos_alpha;
        double sin_alpha;
    };

    template <int Level>
    void evaluate(const Vec3& x, std::span<double> h, std::span<Vec3> grad, std::span<Mat3> hess,
                  DiffStatus* status) const;

    const Scene* scene_;
    int quadrature_;
    bool los_blocked_;
    Vec3 receiver_normal_;
    std::vector<LedData> leds_;
    std::vector<SurfacePoint> surfaces_;
    std::vector<std::vector<Term>> terms_; // [led][term], zero-front terms dropped
};

} // namespace irsvlp
