#include "irsvlp/calculus.hpp"

namespace irsvlp {

Vec3 grad_h(const Scene& scene, size_t led_index, const Vec3& x,
            const OrientationSet& orientations, int quadrature, DiffStatus* status) {
    const GainModel model(scene, orientations, quadrature);
    std::vector<double> h(model.num_leds());
    std::vector<Vec3> g(model.num_leds());
    model.gains_and_gradients(x, h, g, status);
    return g.at(led_index);
}

Mat3 hess_h(const Scene& scene, size_t led_index, const Vec3& x,
            const OrientationSet& orientations, int quadrature, DiffStatus* status) {
    const GainModel model(scene, orientations, quadrature);
    std::vector<double> h(model.num_leds());
    std::vector<Vec3> g(model.num_leds());
    std::vector<Mat3> hess(model.num_leds());
    model.gains_gradients_hessians(x, h, g, hess, status);
    return hess.at(led_index);
}

} // namespace irsvlp
