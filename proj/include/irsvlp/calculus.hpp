#pragma once

#include "irsvlp/gain_model.hpp"
#include "irsvlp/matrix3.hpp"
#include "irsvlp/vec3.hpp"

namespace irsvlp {

/// Analytic spatial gradient of the total channel gain h_i (per meter).
/// Valid away from coincident points, clamp boundaries and specular
/// collinearity; `status`, when given, reports proximity to those sets.
Vec3 grad_h(const Scene& scene, size_t led_index, const Vec3& x,
            const OrientationSet& orientations, int quadrature = 1, DiffStatus* status = nullptr);

/// Analytic spatial Hessian of h_i (symmetric, per square meter).
Mat3 hess_h(const Scene& scene, size_t led_index, const Vec3& x,
            const OrientationSet& orientations, int quadrature = 1, DiffStatus* status = nullptr);

/// Central finite differences (f(x + h e_m) - f(x - h e_m)) / (2h).
template <typename F>
Vec3 fd_gradient(F&& f, const Vec3& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be > 0");
    Vec3 g;
    for (int m = 0; m < 3; ++m) {
        Vec3 xp = x, xm = x;
        xp[m] += step;
        xm[m] -= step;
        g[m] = (f(xp) - f(xm)) / (2.0 * step);
    }
    return g;
}

/// Nested central differences; diagonal uses the three-point second difference.
template <typename F>
Mat3 fd_hessian(F&& f, const Vec3& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("fd_hessian: step must be > 0");
    Mat3 h;
    const double f0 = f(x);
    for (int m = 0; m < 3; ++m) {
        Vec3 xp = x, xm = x;
        xp[m] += step;
        xm[m] -= step;
        h(m, m) = (f(xp) - 2.0 * f0 + f(xm)) / (step * step);
        for (int n = m + 1; n < 3; ++n) {
            Vec3 xpp = x, xpm = x, xmp = x, xmm = x;
            xpp[m] += step; xpp[n] += step;
            xpm[m] += step; xpm[n] -= step;
            xmp[m] -= step; xmp[n] += step;
            xmm[m] -= step; xmm[n] -= step;
            const double v = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * step * step);
            h(m, n) = v;
            h(n, m) = v;
        }
    }
    return h;
}

} // namespace irsvlp
