#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "irsvlp/vec3.hpp"

namespace irsvlp {

/// Dense 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }
    double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity() {
        Mat3 a;
        a(0, 0) = a(1, 1) = a(2, 2) = 1.0;
        return a;
    }
    static Mat3 outer(const Vec3& u, const Vec3& v) {
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = u[r] * v[c];
        return a;
    }
    static Mat3 diagonal(double d0, double d1, double d2) {
        Mat3 a;
        a(0, 0) = d0;
        a(1, 1) = d1;
        a(2, 2) = d2;
        return a;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 a;
        for (size_t i = 0; i < 9; ++i) a.m[i] = m[i] + o.m[i];
        return a;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 a;
        for (size_t i = 0; i < 9; ++i) a.m[i] = m[i] - o.m[i];
        return a;
    }
    Mat3 operator*(double s) const {
        Mat3 a;
        for (size_t i = 0; i < 9; ++i) a.m[i] = m[i] * s;
        return a;
    }
    Mat3& operator+=(const Mat3& o) {
        for (size_t i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
    Vec3 operator*(const Vec3& v) const {
        return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
                (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
                (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                a(r, c) = s;
            }
        return a;
    }

    Mat3 transposed() const {
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = (*this)(c, r);
        return a;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
    double frobenius_norm() const {
        double s = 0.0;
        for (double v : m) s += v * v;
        return std::sqrt(s);
    }
    bool finite() const {
        for (double v : m)
            if (!std::isfinite(v)) return false;
        return true;
    }
    Mat3 symmetrized() const {
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = 0.5 * ((*this)(r, c) + (*this)(c, r));
        return a;
    }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

inline double det(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Analytic adjugate inverse. Throws std::domain_error when |det| is zero.
inline Mat3 inverse(const Mat3& a) {
    const double d = det(a);
    if (d == 0.0 || !std::isfinite(d))
        throw std::domain_error("Mat3 inverse: singular matrix");
    const double inv_d = 1.0 / d;
    Mat3 r;
    r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) * inv_d;
    r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv_d;
    r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv_d;
    r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) * inv_d;
    r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv_d;
    r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv_d;
    r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) * inv_d;
    r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv_d;
    r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv_d;
    return r;
}

/// Eigenvalues of a symmetric matrix, ascending (closed-form trigonometric method).
inline std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    std::array<double, 3> eig;
    if (p1 == 0.0) {
        eig = {a(0, 0), a(1, 1), a(2, 2)};
    } else {
        const double q = a.trace() / 3.0;
        const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                          (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
        const double p = std::sqrt(p2 / 6.0);
        Mat3 b = (a - Mat3::identity() * q) * (1.0 / p);
        double r = det(b) / 2.0;
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        const double two_pi_3 = 2.0 * std::numbers::pi / 3.0;
        const double e0 = q + 2.0 * p * std::cos(phi);
        const double e2 = q + 2.0 * p * std::cos(phi + two_pi_3);
        const double e1 = 3.0 * q - e0 - e2;
        eig = {e2, e1, e0};
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Spectral condition number of a symmetric matrix (max|lambda| / min|lambda|).
inline double symmetric_condition(const Mat3& a) {
    const auto eig = symmetric_eigenvalues(a);
    double lo = std::abs(eig[0]), hi = std::abs(eig[0]);
    for (double e : eig) {
        lo = std::min(lo, std::abs(e));
        hi = std::max(hi, std::abs(e));
    }
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
inline Vec3 solve(const Mat3& a, const Vec3& b) {
    double aug[3][4] = {{a(0, 0), a(0, 1), a(0, 2), b.x},
                        {a(1, 0), a(1, 1), a(1, 2), b.y},
                        {a(2, 0), a(2, 1), a(2, 2), b.z}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        if (aug[piv][col] == 0.0) throw std::domain_error("Mat3 solve: singular matrix");
        if (piv != col)
            for (int c = 0; c < 4; ++c) std::swap(aug[piv][c], aug[col][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int c = col; c < 4; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    return {aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]};
}

} // namespace irsvlp
