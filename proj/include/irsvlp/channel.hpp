#pragma once

#include <span>
#include <vector>

#include "irsvlp/scene.hpp"
#include "irsvlp/vec3.hpp"

namespace irsvlp {

/// Which orientation hypothesis a set of element normals represents.
enum class OrientationTag { assumed, actual };

/// One mirror normal per IRS element.
struct OrientationSet {
    std::vector<UnitVec3> vectors;
    OrientationTag tag = OrientationTag::assumed;

    static OrientationSet assumed(const Scene& scene);
    static OrientationSet actual(const Scene& scene);
    /// Expands 4 per-wall vectors to one per element via wall_id.
    static OrientationSet from_walls(const Scene& scene, const std::array<UnitVec3, 4>& walls,
                                     OrientationTag tag);
};

/// Per-source decomposition of one LED's channel gain at a position.
struct GainBreakdown {
    double los_gain = 0.0;                 // raw LOS gain (before the blocked mask)
    std::vector<double> per_element_gains; // one per IRS element
    double total = 0.0;                    // masked LOS + sum of element gains
};

// ---------------------------------------------------------------------------
// Serial reference implementation: a direct transcription of the channel
// equations, kept as the oracle for the optimized GainModel kernels and for
// the benchmark comparison.
// ---------------------------------------------------------------------------

/// Lambertian LOS gain between LED i and a receiver at x. Every visibility dot
/// product is clamped at 0. Throws GeometryError when x coincides with the LED.
double los_gain(const Scene& scene, size_t led_index, const Vec3& x);

/// cos(beta - alpha): beta is the irradiance angle from the surface point
/// toward x, alpha the incidence angle from the LED, both measured against the
/// mirror normal with sin >= 0. Result lies in [-1, 1].
/// Throws GeometryError when x or the LED coincides with the surface point.
double cos_beta_minus_alpha(const Vec3& surface_point, const Vec3& led_position, const Vec3& x,
                            const UnitVec3& normal);

/// Integrand of the reflected-gain surface integral, evaluated at surface
/// point p of element k (per square meter). Clamps every visibility factor.
double reflected_gain_density(const Scene& scene, const IrsElement& element, size_t led_index,
                              const Vec3& x, const UnitVec3& orientation, const Vec3& surface_point);

/// Q x Q midpoint-rule quadrature of reflected_gain_density over the element
/// footprint. Q = 1 reduces to density(center) * area.
double element_gain(const Scene& scene, const IrsElement& element, size_t led_index, const Vec3& x,
                    const UnitVec3& orientation, int quadrature);

/// Total channel gain h_i = LOS (zeroed when scene.los_blocked) plus the sum
/// of all element gains, accumulated in element-index order.
GainBreakdown total_gain(const Scene& scene, size_t led_index, const Vec3& x,
                         const OrientationSet& orientations, int quadrature = 1);

/// Noiseless mean received powers, one per LED: P_TX,i * h_i(x).
std::vector<double> mean_powers(const Scene& scene, const Vec3& x,
                                const OrientationSet& orientations, int quadrature = 1);

} // namespace irsvlp
