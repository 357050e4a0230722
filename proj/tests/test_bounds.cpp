#include <doctest.h>

#include <cmath>

#include "irsvlp/bounds.hpp"
#include "irsvlp/calculus.hpp"
#include "irsvlp/errors.hpp"
#include "test_helpers.hpp"

using namespace irsvlp;
using doctest::Approx;

namespace {

// Zero-mismatch fixture: true == assumed, x0 == x_bar.
struct ZeroMismatch {
    Scene scene = test::tiny_scene();
    Vec3 x_bar{0.5, 0.5, 0.85};
    OrientationSet truth, assumed;
    ZeroMismatch() {
        test::apply_mismatch(scene, 0.0, 1);
        truth = OrientationSet::actual(scene);
        assumed = OrientationSet::assumed(scene);
    }
};

Mat3 gaussian_fim(const Scene& s, const Vec3& x, const OrientationSet& orients) {
    Mat3 f = Mat3::zero();
    for (size_t i = 0; i < s.num_leds(); ++i) {
        const Vec3 g = grad_h(s, i, x, orients);
        f += Mat3::outer(g, g) * (s.leds[i].tx_power * s.leds[i].tx_power /
                                  s.noise_variances[i]);
    }
    return f;
}

} // namespace

TEST_SUITE_BEGIN("bounds");

TEST_CASE("matrix_a reduces to the negative FIM at zero mismatch") {
    const ZeroMismatch z;
    const Mat3 a = matrix_a(z.scene, z.x_bar, z.x_bar, z.truth, z.assumed);
    const Mat3 expected = gaussian_fim(z.scene, z.x_bar, z.assumed) * -1.0;
    CHECK((a - expected).frobenius_norm() / expected.frobenius_norm() < 1e-12);
}

TEST_CASE("matrix_a is symmetric on mismatched scenes") {
    Scene s = test::tiny_scene();
    test::apply_mismatch(s, 1.0, 23);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const Vec3 x0{0.41, 0.58, 0.97}; // any evaluation point
    const Mat3 a =
        matrix_a(s, x_bar, x0, OrientationSet::actual(s), OrientationSet::assumed(s));
    CHECK((a - a.transposed()).frobenius_norm() <= 1e-10 * a.frobenius_norm());
}

TEST_CASE("matrix_a matches the finite-difference score oracle") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 1.0, 1);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const auto truth = OrientationSet::actual(s);
    const auto assumed = OrientationSet::assumed(s);
    const Vec3 x0 = pseudo_true(s, x_bar, truth, assumed, EstimatorConfig{});
    const Mat3 a = matrix_a(s, x_bar, x0, truth, assumed);

    // E_p{d log p~ / dx}(x) as an analytic function of x, differentiated
    // numerically: an oracle for A that never touches hess_h.
    const GainModel true_model(s, truth, 1);
    std::vector<double> ep(s.num_leds());
    true_model.mean_powers(x_bar, ep);
    const GainModel assumed_model(s, assumed, 1);
    auto expected_score = [&](const Vec3& x) {
        std::vector<double> h(s.num_leds());
        std::vector<Vec3> g(s.num_leds());
        assumed_model.gains_and_gradients(x, h, g, nullptr);
        Vec3 score{};
        for (size_t i = 0; i < s.num_leds(); ++i) {
            const double p_tx = s.leds[i].tx_power;
            score += g[i] * (p_tx * (ep[i] - p_tx * h[i]) / s.noise_variances[i]);
        }
        return score;
    };
    Mat3 fd = Mat3::zero();
    const double step = 1e-6;
    for (int m = 0; m < 3; ++m) {
        Vec3 xp = x0, xm = x0;
        xp[m] += step;
        xm[m] -= step;
        const Vec3 sp = expected_score(xp), sm = expected_score(xm);
        for (int r = 0; r < 3; ++r) fd(r, m) = (sp[r] - sm[r]) / (2.0 * step);
    }
    CHECK((a - fd).frobenius_norm() / fd.frobenius_norm() < 1e-4);
}

TEST_CASE("matrix_b equals the FIM at zero mismatch and is PSD") {
    const ZeroMismatch z;
    const Mat3 b = matrix_b(z.scene, z.x_bar, z.x_bar, z.truth, z.assumed);
    const Mat3 fim = gaussian_fim(z.scene, z.x_bar, z.assumed);
    CHECK((b - fim).frobenius_norm() / fim.frobenius_norm() < 1e-12);
    const Mat3 a = matrix_a(z.scene, z.x_bar, z.x_bar, z.truth, z.assumed);
    CHECK((b + a).frobenius_norm() / b.frobenius_norm() < 1e-12); // B = -A here
}

TEST_CASE("matrix_b is PSD on random mismatched scenes") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        Scene s = test::tiny_scene();
        test::apply_mismatch(s, 1.0, 100 + static_cast<uint64_t>(trial));
        const Vec3 x_bar = test::random_interior_position(s.room, rng);
        const Vec3 x0 = test::random_interior_position(s.room, rng);
        const Mat3 b =
            matrix_b(s, x_bar, x0, OrientationSet::actual(s), OrientationSet::assumed(s));
        const auto eig = symmetric_eigenvalues(b);
        CHECK(eig[0] >= -1e-12 * b.frobenius_norm());
    }
}

TEST_CASE("matrix_b matches the Monte-Carlo score outer-product oracle") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 1.0, 1);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const auto truth = OrientationSet::actual(s);
    const auto assumed = OrientationSet::assumed(s);
    const Vec3 x0 = pseudo_true(s, x_bar, truth, assumed, EstimatorConfig{});
    const Mat3 b = matrix_b(s, x_bar, x0, truth, assumed);

    const GainModel true_model(s, truth, 1);
    std::vector<double> mean(s.num_leds());
    true_model.mean_powers(x_bar, mean);
    const GainModel assumed_model(s, assumed, 1);
    std::vector<double> h0(s.num_leds());
    std::vector<Vec3> g0(s.num_leds());
    assumed_model.gains_and_gradients(x0, h0, g0, nullptr);

    Rng rng(2025);
    Mat3 acc = Mat3::zero();
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        Vec3 score{};
        for (size_t i = 0; i < s.num_leds(); ++i) {
            const double p_rx = mean[i] + rng.gaussian(0.0, std::sqrt(s.noise_variances[i]));
            const double p_tx = s.leds[i].tx_power;
            score += g0[i] * (p_tx * (p_rx - p_tx * h0[i]) / s.noise_variances[i]);
        }
        acc += Mat3::outer(score, score);
    }
    const Mat3 empirical = acc * (1.0 / draws);
    CHECK((empirical - b).frobenius_norm() / b.frobenius_norm() < 0.02);
}

TEST_CASE("mcrb algebra") {
    SUBCASE("A = -I, B = I gives the identity") {
        const Mat3 m = mcrb(Mat3::identity() * -1.0, Mat3::identity());
        CHECK((m - Mat3::identity()).frobenius_norm() < 1e-15);
    }
    SUBCASE("zero mismatch: MCRB equals the CRB") {
        const ZeroMismatch z;
        const Mat3 a = matrix_a(z.scene, z.x_bar, z.x_bar, z.truth, z.assumed);
        const Mat3 b = matrix_b(z.scene, z.x_bar, z.x_bar, z.truth, z.assumed);
        const Mat3 m = mcrb(a, b);
        const Mat3 crb = fim_crb(z.scene, z.x_bar, z.truth);
        CHECK((m - crb).frobenius_norm() / crb.frobenius_norm() < 1e-8);
    }
    SUBCASE("ill-conditioned A is rejected") {
        Mat3 a = Mat3::diagonal(1.0, 1e-14, 1.0);
        CHECK_THROWS_AS(mcrb(a, Mat3::identity()), IllConditionedError);
    }
}

TEST_CASE("mcrb trace decreases with the noise variance") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 1.0, 1);
    const Vec3 x_bar{0.5, 0.5, 0.85};
    const auto truth = OrientationSet::actual(s);
    const auto assumed = OrientationSet::assumed(s);
    const Vec3 x0 = pseudo_true(s, x_bar, truth, assumed, EstimatorConfig{});
    double previous = std::numeric_limits<double>::infinity();
    for (double sigma2 : {1e-15, 1e-16, 1e-17, 1e-18, 1e-19}) {
        Scene sp = s;
        sp.noise_variances.assign(s.num_leds(), sigma2);
        const Mat3 m = mcrb(matrix_a(sp, x_bar, x0, truth, assumed),
                            matrix_b(sp, x_bar, x0, truth, assumed));
        CHECK(m.trace() < previous);
        previous = m.trace();
    }
}

TEST_CASE("lower_bound structure") {
    const Vec3 x_bar{0.5, 0.5, 0.85};
    SUBCASE("zero bias: LB equals the MCRB") {
        const Mat3 m = Mat3::diagonal(0.1, 0.2, 0.3);
        const Mat3 lb = lower_bound(m, x_bar, x_bar);
        CHECK((lb - m).frobenius_norm() == 0.0);
    }
    SUBCASE("zero MCRB: LB is the bias outer product") {
        const Vec3 x0{0.4, 0.3, 0.9};
        const Mat3 lb = lower_bound(Mat3::zero(), x_bar, x0);
        CHECK(std::sqrt(lb.trace()) == Approx(norm(x_bar - x0)).epsilon(1e-15));
    }
    SUBCASE("LB - MCRB is exactly the bias outer product, entrywise") {
        const Mat3 m = Mat3::diagonal(1e-4, 2e-4, 3e-4);
        const Vec3 x0{0.45, 0.52, 0.88};
        const Mat3 lb = lower_bound(m, x_bar, x0);
        const Mat3 outer = Mat3::outer(x_bar - x0, x_bar - x0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) CHECK(lb(r, c) == m(r, c) + outer(r, c));
        CHECK(lb.trace() == Approx(m.trace() + squared_norm(x_bar - x0)).epsilon(1e-15));
    }
}

TEST_CASE("fim_crb scaling and failure modes") {
    SUBCASE("scaling every variance by c scales the CRB by c") {
        Scene s = test::tiny_scene();
        test::apply_mismatch(s, 0.5, 3);
        const Vec3 x{0.5, 0.5, 0.85};
        const Mat3 base = fim_crb(s, x, OrientationSet::actual(s));
        Scene scaled = s;
        for (double& v : scaled.noise_variances) v *= 7.0;
        const Mat3 big = fim_crb(scaled, x, OrientationSet::actual(scaled));
        CHECK((big - base * 7.0).frobenius_norm() / big.frobenius_norm() < 1e-12);
    }
    SUBCASE("single-LED LOS-only scene has a rank-1 FIM") {
        Scene s;
        s.room = Box{{-2, -2, 0}, {2, 2, 3}};
        s.search_region = s.room;
        s.leds.push_back(Led{.position = {0, 0, 3},
                             .orientation = UnitVec3{Vec3{0, 0, -1}},
                             .lambertian_order = 1.0,
                             .tx_power = 5.0});
        s.noise_variances = {1e-17};
        s.pd_area = 1e-4;
        const OrientationSet empty{{}, OrientationTag::actual};
        CHECK_THROWS_AS(fim_crb(s, Vec3{0.3, 0.2, 1.0}, empty), IllConditionedError);
    }
}

TEST_CASE("bound report ties the pieces together") {
    Scene s = test::desk_scene();
    test::apply_mismatch(s, 1.0, 1);
    const auto rep = compute_bound_report(s, {0.5, 0.5, 0.85}, OrientationSet::actual(s),
                                          OrientationSet::assumed(s), EstimatorConfig{});
    // LB - MCRB == bias outer product, bitwise (LB is constructed as the sum).
    const Mat3 outer = Mat3::outer(rep.bias, rep.bias);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(rep.lb(r, c) == rep.mcrb(r, c) + outer(r, c));
    CHECK(rep.sqrt_trace_lb >= rep.sqrt_trace_mcrb);
    // Both covariance-like matrices are PSD.
    CHECK(symmetric_eigenvalues(rep.mcrb)[0] >= -1e-10 * rep.mcrb.frobenius_norm());
    CHECK(symmetric_eigenvalues(rep.crb)[0] >= -1e-10 * rep.crb.frobenius_norm());
}

TEST_SUITE_END();
