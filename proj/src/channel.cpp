#include "irsvlp/channel.hpp"

#include <cmath>
#include <numbers>

#include "irsvlp/errors.hpp"

namespace irsvlp {

OrientationSet OrientationSet::assumed(const Scene& scene) {
    OrientationSet s;
    s.tag = OrientationTag::assumed;
    s.vectors.reserve(scene.irs.size());
    for (const auto& e : scene.irs) s.vectors.push_back(e.assumed_orientation);
    return s;
}

OrientationSet OrientationSet::actual(const Scene& scene) {
    OrientationSet s;
    s.tag = OrientationTag::actual;
    s.vectors.reserve(scene.irs.size());
    for (const auto& e : scene.irs) s.vectors.push_back(e.true_orientation);
    return s;
}

OrientationSet OrientationSet::from_walls(const Scene& scene, const std::array<UnitVec3, 4>& walls,
                                          OrientationTag tag) {
    OrientationSet s;
    s.tag = tag;
    s.vectors.reserve(scene.irs.size());
    for (const auto& e : scene.irs) {
        if (e.wall_id < 1 || e.wall_id > 4)
            throw std::invalid_argument("IrsElement wall_id out of range");
        s.vectors.push_back(walls[static_cast<size_t>(e.wall_id - 1)]);
    }
    return s;
}

namespace {

constexpr double kCoincidentDistSq = 1e-24; // squared meters

inline double clamp0(double v) { return v > 0.0 ? v : 0.0; }

// base^order for order >= 0 with an exact-integer fast path.
double powm(double base, double order) {
    const int io = static_cast<int>(order);
    if (static_cast<double>(io) == order && io >= 0 && io <= 32) {
        double r = 1.0;
        for (int i = 0; i < io; ++i) r *= base;
        return r;
    }
    return std::pow(base, order);
}

} // namespace

double los_gain(const Scene& scene, size_t led_index, const Vec3& x) {
    const Led& led = scene.leds.at(led_index);
    const Vec3 e = x - led.position;
    const double dist_sq = squared_norm(e);
    if (dist_sq < kCoincidentDistSq)
        throw GeometryError("los_gain: receiver position coincides with the LED");
    const double irradiance = clamp0(dot(e, led.orientation));
    const double incidence = clamp0(dot(led.position - x, scene.receiver_orientation));
    const double m = led.lambertian_order;
    const double dist = std::sqrt(dist_sq);
    return (m + 1.0) * scene.pd_area * powm(irradiance, m) * incidence /
           (2.0 * std::numbers::pi * powm(dist, m + 3.0));
}

double cos_beta_minus_alpha(const Vec3& surface_point, const Vec3& led_position, const Vec3& x,
                            const UnitVec3& normal) {
    const Vec3 to_receiver = x - surface_point;
    const Vec3 to_led = led_position - surface_point;
    const double dr = norm(to_receiver);
    const double dl = norm(to_led);
    if (dr * dr < kCoincidentDistSq)
        throw GeometryError("cos_beta_minus_alpha: receiver coincides with the surface point");
    if (dl * dl < kCoincidentDistSq)
        throw GeometryError("cos_beta_minus_alpha: LED coincides with the surface point");
    const double cos_b = dot(to_receiver, normal) / dr;
    const double sin_b = norm(cross(to_receiver, normal.vec())) / dr;
    const double cos_a = dot(to_led, normal) / dl;
    const double sin_a = norm(cross(to_led, normal.vec())) / dl;
    return std::clamp(cos_a * cos_b + sin_a * sin_b, -1.0, 1.0);
}

double reflected_gain_density(const Scene& scene, const IrsElement& element, size_t led_index,
                              const Vec3& x, const UnitVec3& orientation,
                              const Vec3& surface_point) {
    const Led& led = scene.leds.at(led_index);
    const Vec3& p = surface_point;

    const Vec3 led_to_p = p - led.position;
    const double led_dist_sq = squared_norm(led_to_p);
    if (led_dist_sq < kCoincidentDistSq)
        throw GeometryError("reflected_gain_density: LED coincides with the surface point");
    const Vec3 p_to_x = x - p;
    const double recv_dist_sq = squared_norm(p_to_x);
    if (recv_dist_sq < kCoincidentDistSq)
        throw GeometryError("reflected_gain_density: receiver coincides with the surface point");

    const double m = led.lambertian_order;
    const double led_dist = std::sqrt(led_dist_sq);
    const double recv_dist = std::sqrt(recv_dist_sq);

    const double irradiance = clamp0(dot(led_to_p, led.orientation));      // (p - l_i)^T n_i
    const double onto_mirror = clamp0(dot(led.position - p, orientation)); // (l_i - p)^T n
    const double onto_pd = clamp0(dot(p - x, scene.receiver_orientation)); // (p - x)^T n_R

    const double front = (m + 1.0) * powm(irradiance, m) * onto_mirror /
                         (4.0 * std::numbers::pi * std::numbers::pi *
                          powm(led_dist, m + 3.0) * recv_dist * recv_dist * recv_dist);

    const double diffuse = 2.0 * element.diffuse_fraction *
                           clamp0(dot(p_to_x, orientation)) / recv_dist;
    const double cos_ba = cos_beta_minus_alpha(p, led.position, x, orientation);
    const double specular = (1.0 - element.diffuse_fraction) * (element.directivity + 1.0) *
                            powm(clamp0(cos_ba), element.directivity);

    return front * scene.pd_area * element.reflectance * onto_pd * (diffuse + specular);
}

double element_gain(const Scene& scene, const IrsElement& element, size_t led_index, const Vec3& x,
                    const UnitVec3& orientation, int quadrature) {
    if (quadrature < 1) throw std::invalid_argument("quadrature order must be >= 1");
    const int q = quadrature;
    const double cell_area = element.area() / (q * q);
    double sum = 0.0;
    for (int a = 0; a < q; ++a) {
        const double du = ((a + 0.5) / q - 0.5) * element.width;
        for (int b = 0; b < q; ++b) {
            const double dv = ((b + 0.5) / q - 0.5) * element.height;
            const Vec3 p = element.center + element.tangent_u.vec() * du +
                           element.tangent_v.vec() * dv;
            sum += reflected_gain_density(scene, element, led_index, x, orientation, p) * cell_area;
        }
    }
    return sum;
}

GainBreakdown total_gain(const Scene& scene, size_t led_index, const Vec3& x,
                         const OrientationSet& orientations, int quadrature) {
    if (orientations.vectors.size() != scene.irs.size())
        throw std::invalid_argument("orientation set length must match the element count");
    GainBreakdown b;
    b.los_gain = los_gain(scene, led_index, x);
    b.per_element_gains.resize(scene.irs.size());
    double total = scene.los_blocked ? 0.0 : b.los_gain;
    for (size_t k = 0; k < scene.irs.size(); ++k) {
        b.per_element_gains[k] =
            element_gain(scene, scene.irs[k], led_index, x, orientations.vectors[k], quadrature);
        total += b.per_element_gains[k];
    }
    b.total = total;
    return b;
}

std::vector<double> mean_powers(const Scene& scene, const Vec3& x,
                                const OrientationSet& orientations, int quadrature) {
    std::vector<double> powers(scene.leds.size());
    for (size_t i = 0; i < scene.leds.size(); ++i)
        powers[i] = scene.leds[i].tx_power * total_gain(scene, i, x, orientations, quadrature).total;
    return powers;
}

} // namespace irsvlp
