#include "irsvlp/gain_model.hpp"

#include <cmath>
#include <numbers>

#include "irsvlp/errors.hpp"

namespace irsvlp {

namespace {

constexpr double kClampEps = 1e-9;       // clamp-boundary flag zone
constexpr double kCoincidentDistSq = 1e-24;
constexpr double kCollinearSinBeta = 1e-12;

inline double powi(double base, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= base;
    return r;
}

// base^order for base > 0; integer fast path when flagged and order >= 0.
inline double powr(double base, double order, bool integer_order) {
    if (integer_order && order >= 0.0) return powi(base, static_cast<int>(order));
    return std::pow(base, order);
}

} // namespace

GainModel::GainModel(const Scene& scene, const OrientationSet& orientations, int quadrature)
    : scene_(&scene),
      quadrature_(quadrature),
      los_blocked_(scene.los_blocked),
      receiver_normal_(scene.receiver_orientation.vec()) {
    if (quadrature < 1) throw std::invalid_argument("quadrature order must be >= 1");
    if (orientations.vectors.size() != scene.irs.size())
        throw std::invalid_argument("orientation set length must match the element count");

    leds_.reserve(scene.leds.size());
    for (const auto& led : scene.leds) {
        const double m = led.lambertian_order;
        leds_.push_back(LedData{
            .position = led.position,
            .orientation = led.orientation.vec(),
            .lambertian_order = m,
            .tx_power = led.tx_power,
            .front_const = (m + 1.0) * scene.pd_area / (2.0 * std::numbers::pi),
            .integer_order = std::floor(m) == m && m <= 32.0,
        });
    }

    const int q = quadrature;
    const double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    surfaces_.reserve(scene.irs.size() * static_cast<size_t>(q) * static_cast<size_t>(q));
    std::vector<double> rho_ds; // per surface point: rho_k * dS
    rho_ds.reserve(surfaces_.capacity());
    for (size_t k = 0; k < scene.irs.size(); ++k) {
        const auto& e = scene.irs[k];
        const Vec3 n = orientations.vectors[k].vec();
        const double cell_area = e.area() / (q * q);
        const double mu = e.directivity;
        const bool int_mu = std::floor(mu) == mu && mu <= 64.0;
        for (int a = 0; a < q; ++a) {
            const double du = ((a + 0.5) / q - 0.5) * e.width;
            for (int b = 0; b < q; ++b) {
                const double dv = ((b + 0.5) / q - 0.5) * e.height;
                surfaces_.push_back(SurfacePoint{
                    .position = e.center + e.tangent_u.vec() * du + e.tangent_v.vec() * dv,
                    .normal = n,
                    .diffuse_coeff = 2.0 * e.diffuse_fraction,
                    .specular_coeff = (1.0 - e.diffuse_fraction) * (mu + 1.0),
                    .directivity = mu,
                    .integer_directivity = int_mu,
                });
                rho_ds.push_back(e.reflectance * cell_area);
            }
        }
    }

    terms_.resize(leds_.size());
    for (size_t i = 0; i < leds_.size(); ++i) {
        const LedData& led = leds_[i];
        terms_[i].reserve(surfaces_.size());
        for (size_t s = 0; s < surfaces_.size(); ++s) {
            const SurfacePoint& sp = surfaces_[s];
            const Vec3 to_p = sp.position - led.position;
            const double led_dist_sq = squared_norm(to_p);
            if (led_dist_sq < kCoincidentDistSq)
                throw GeometryError("GainModel: LED coincides with an IRS surface point");
            const double led_dist = std::sqrt(led_dist_sq);
            const double irradiance = dot(to_p, led.orientation);
            const double onto_mirror = -dot(to_p, sp.normal); // (l_i - p)^T n
            if (irradiance <= 0.0 || onto_mirror <= 0.0) continue; // clamped: term is zero
            const double m = led.lambertian_order;
            const double front = (m + 1.0) * powr(irradiance, m, led.integer_order) *
                                 onto_mirror * scene.pd_area * rho_ds[s] /
                                 (four_pi_sq * powr(led_dist, m + 3.0, led.integer_order));
            terms_[i].push_back(Term{
                .surface = static_cast<uint32_t>(s),
                .front = front,
                .cos_alpha = onto_mirror / led_dist,
                .sin_alpha = norm(cross(to_p * -1.0, sp.normal)) / led_dist,
            });
        }
    }
}

template <int Level>
void GainModel::evaluate(const Vec3& x, std::span<double> h, std::span<Vec3> grad,
                         std::span<Mat3> hess, DiffStatus* status) const {
    const Vec3 n_r = receiver_normal_;
    for (size_t i = 0; i < leds_.size(); ++i) {
        const LedData& led = leds_[i];
        double acc = 0.0;
        Vec3 gacc{};
        Mat3 hacc{};

        if (!los_blocked_) {
            const Vec3 e = x - led.position;
            const double dist_sq = squared_norm(e);
            if (dist_sq < kCoincidentDistSq) {
                if constexpr (Level == 0) {
                    h[i] = std::numeric_limits<double>::infinity();
                    continue;
                } else {
                    throw GeometryError("GainModel: position coincides with a LED");
                }
            }
            const double a = dot(e, led.orientation);   // irradiance-side dot
            const double b = -dot(e, n_r);              // incidence-side dot
            if (status && (std::abs(a) < kClampEps || std::abs(b) < kClampEps))
                status->near_clamp_boundary = true;
            if (a > 0.0 && b > 0.0) {
                const double m = led.lambertian_order;
                const bool im = led.integer_order;
                const double dist = std::sqrt(dist_sq);
                const double a_m = powr(a, m, im);
                const double v = powr(dist, m + 3.0, im);
                const double inv_v = 1.0 / v;
                const double u = a_m * b;
                acc += led.front_const * u * inv_v;
                if constexpr (Level >= 1) {
                    const double a_m1 = powr(a, m - 1.0, im);
                    const Vec3 du = led.orientation * (m * a_m1 * b) - n_r * a_m;
                    const Vec3 dv = e * ((m + 3.0) * powr(dist, m + 1.0, im));
                    gacc += (du * inv_v - dv * (u * inv_v * inv_v)) * led.front_const;
                    if constexpr (Level >= 2) {
                        const double coef_uu = m * (m - 1.0);
                        Mat3 d2u = Mat3::zero();
                        if (coef_uu != 0.0) {
                            const double a_m2 = powr(a, m - 2.0, im);
                            d2u += Mat3::outer(led.orientation, led.orientation) *
                                   (coef_uu * a_m2 * b);
                        }
                        d2u += (Mat3::outer(led.orientation, n_r) +
                                Mat3::outer(n_r, led.orientation)) *
                               (-m * a_m1);
                        const double e_m1 = powr(dist, m + 1.0, im);
                        const double e_mm1 = powr(dist, m - 1.0, im);
                        const Mat3 d2v = (Mat3::identity() * e_m1 +
                                          Mat3::outer(e, e) * ((m + 1.0) * e_mm1)) *
                                         (m + 3.0);
                        const double inv_v2 = inv_v * inv_v;
                        Mat3 d2h = d2u * inv_v;
                        d2h += (Mat3::outer(du, dv) + Mat3::outer(dv, du)) * (-inv_v2);
                        d2h += d2v * (-u * inv_v2);
                        d2h += Mat3::outer(dv, dv) * (2.0 * u * inv_v2 * inv_v);
                        hacc += d2h * led.front_const;
                    }
                }
            }
        }

        for (const Term& t : terms_[i]) {
            const SurfacePoint& sp = surfaces_[t.surface];
            const Vec3 d = x - sp.position;
            const double dist_sq = squared_norm(d);
            if (dist_sq < kCoincidentDistSq) {
                if constexpr (Level == 0) {
                    acc = std::numeric_limits<double>::infinity();
                    continue;
                } else {
                    throw GeometryError("GainModel: position coincides with an IRS surface point");
                }
            }
            const double inv_d2 = 1.0 / dist_sq;
            const double inv_d = std::sqrt(inv_d2);
            const double w = -dot(d, n_r); // (p - x)^T n_R
            if (status && std::abs(w) < kClampEps) status->near_clamp_boundary = true;
            if (w <= 0.0) continue;
            const double inv_d3 = inv_d * inv_d2;
            const double f1 = w * inv_d3;
            const double s = dot(d, sp.normal);
            const double cos_b = s * inv_d;
            const double sin_b = std::sqrt(std::max(1.0 - cos_b * cos_b, 0.0));
            const double c = std::min(t.cos_alpha * cos_b + t.sin_alpha * sin_b, 1.0);
            if (status) {
                if (sp.diffuse_coeff > 0.0 && std::abs(s) < kClampEps)
                    status->near_clamp_boundary = true;
                if (sp.specular_coeff > 0.0 && std::abs(c) < kClampEps)
                    status->near_clamp_boundary = true;
                status->min_sin_beta = std::min(status->min_sin_beta, sin_b);
            }
            const double f2 = (s > 0.0) ? sp.diffuse_coeff * s * inv_d : 0.0;
            const double f3 = (c > 0.0)
                                  ? sp.specular_coeff *
                                        powr(c, sp.directivity, sp.integer_directivity)
                                  : 0.0;
            acc += t.front * f1 * (f2 + f3);

            if constexpr (Level >= 1) {
                const double inv_d5 = inv_d3 * inv_d2;
                const Vec3 df1 = n_r * (-inv_d3) - d * (3.0 * w * inv_d5);
                const Vec3 dcos_b = sp.normal * inv_d - d * (s * inv_d3);
                const Vec3 df2 = (s > 0.0) ? dcos_b * sp.diffuse_coeff : Vec3{};
                Vec3 df3{};
                Mat3 d2f3 = Mat3::zero();
                const bool specular_active =
                    c > 0.0 && sp.specular_coeff > 0.0 && sp.directivity > 0.0;
                if (specular_active) {
                    Vec3 dc = dcos_b * t.cos_alpha;
                    [[maybe_unused]] Vec3 dsin_b{};
                    [[maybe_unused]] Vec3 g{};
                    [[maybe_unused]] double inv_x = 0.0;
                    if (t.sin_alpha > 0.0) {
                        if (sin_b < kCollinearSinBeta)
                            throw GeometryError(
                                "GainModel: specular derivative at collinear geometry "
                                "(x - p parallel to the mirror normal)");
                        g = d - sp.normal * s;
                        inv_x = inv_d / sin_b; // 1 / ||d x n||
                        dsin_b = g * (inv_x * inv_d) - d * (sin_b * inv_d2);
                        dc += dsin_b * t.sin_alpha;
                    }
                    const double mu = sp.directivity;
                    const double c_m1 = powr(c, mu - 1.0, sp.integer_directivity && mu >= 1.0);
                    const double scale = sp.specular_coeff * mu;
                    df3 = dc * (scale * c_m1);
                    if constexpr (Level >= 2) {
                        Mat3 d2c = Mat3::zero();
                        // d2 cos_b
                        for (int r = 0; r < 3; ++r)
                            for (int col = 0; col < 3; ++col) {
                                double v = -(sp.normal[r] * d[col] + sp.normal[col] * d[r]) *
                                               inv_d3 +
                                           3.0 * s * d[r] * d[col] * inv_d5;
                                if (r == col) v -= s * inv_d3;
                                d2c(r, col) = t.cos_alpha * v;
                            }
                        if (t.sin_alpha > 0.0) {
                            const double x_norm = sin_b / inv_d; // ||d x n||
                            const double inv_x3 = inv_x * inv_x * inv_x;
                            for (int r = 0; r < 3; ++r)
                                for (int col = 0; col < 3; ++col) {
                                    double v = -sp.normal[r] * sp.normal[col] * (inv_x * inv_d) -
                                               g[r] * g[col] * (inv_x3 * inv_d) -
                                               (g[r] * d[col] + g[col] * d[r]) *
                                                   (inv_x * inv_d3) +
                                               3.0 * x_norm * d[r] * d[col] * inv_d5;
                                    if (r == col)
                                        v += inv_x * inv_d - x_norm * inv_d3;
                                    d2c(r, col) += t.sin_alpha * v;
                                }
                        }
                        const double c_m2 = (mu >= 2.0 || !sp.integer_directivity)
                                                ? powr(c, mu - 2.0, sp.integer_directivity)
                                                : 0.0; // only reached with coefficient 0
                        d2f3 = Mat3::outer(dc, dc) * (scale * (mu - 1.0) * c_m2) +
                               d2c * (scale * c_m1);
                    }
                }
                const Vec3 df23 = df2 + df3;
                gacc += (df1 * (f2 + f3) + df23 * f1) * t.front;

                if constexpr (Level >= 2) {
                    Mat3 d2f1 = Mat3::zero();
                    const double inv_d7 = inv_d5 * inv_d2;
                    for (int r = 0; r < 3; ++r)
                        for (int col = 0; col < 3; ++col) {
                            double v = 3.0 * (n_r[r] * d[col] + n_r[col] * d[r]) * inv_d5 +
                                       15.0 * w * d[r] * d[col] * inv_d7;
                            if (r == col) v -= 3.0 * w * inv_d5;
                            d2f1(r, col) = v;
                        }
                    Mat3 d2f2 = Mat3::zero();
                    if (s > 0.0 && sp.diffuse_coeff > 0.0) {
                        for (int r = 0; r < 3; ++r)
                            for (int col = 0; col < 3; ++col) {
                                double v = -(sp.normal[r] * d[col] + sp.normal[col] * d[r]) *
                                               inv_d3 +
                                           3.0 * s * d[r] * d[col] * inv_d5;
                                if (r == col) v -= s * inv_d3;
                                d2f2(r, col) = sp.diffuse_coeff * v;
                            }
                    }
                    Mat3 d2 = d2f1 * (f2 + f3);
                    d2 += Mat3::outer(df1, df23) + Mat3::outer(df23, df1);
                    d2 += (d2f2 + d2f3) * f1;
                    hacc += d2 * t.front;
                }
            }
        }

        h[i] = acc;
        if constexpr (Level >= 1) grad[i] = gacc;
        if constexpr (Level >= 2) hess[i] = hacc;
    }
}

void GainModel::gains(const Vec3& x, std::span<double> out) const {
    evaluate<0>(x, out, {}, {}, nullptr);
}

void GainModel::mean_powers(const Vec3& x, std::span<double> out) const {
    evaluate<0>(x, out, {}, {}, nullptr);
    for (size_t i = 0; i < leds_.size(); ++i) out[i] *= leds_[i].tx_power;
}

void GainModel::gains_and_gradients(const Vec3& x, std::span<double> h, std::span<Vec3> grad,
                                    DiffStatus* status) const {
    evaluate<1>(x, h, grad, {}, status);
}

void GainModel::gains_gradients_hessians(const Vec3& x, std::span<double> h, std::span<Vec3> grad,
                                         std::span<Mat3> hess, DiffStatus* status) const {
    evaluate<2>(x, h, grad, hess, status);
}

template void GainModel::evaluate<0>(const Vec3&, std::span<double>, std::span<Vec3>,
                                     std::span<Mat3>, DiffStatus*) const;
template void GainModel::evaluate<1>(const Vec3&, std::span<double>, std::span<Vec3>,
                                     std::span<Mat3>, DiffStatus*) const;
template void GainModel::evaluate<2>(const Vec3&, std::span<double>, std::span<Vec3>,
                                     std::span<Mat3>, DiffStatus*) const;

} // namespace irsvlp
