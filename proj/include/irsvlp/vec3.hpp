#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irsvlp {

/// Cartesian 3-vector in meters (or unitless for directions).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }

/// Direction vector with Euclidean norm 1 (checked to 1e-12 on construction).
class UnitVec3 {
  public:
    static constexpr double kNormTolerance = 1e-12;

    /// Wraps a vector that is already unit-norm; throws std::invalid_argument otherwise.
    explicit UnitVec3(const Vec3& v) : v_(v) {
        if (!v.finite() || std::abs(norm(v) - 1.0) > kNormTolerance)
            throw std::invalid_argument("UnitVec3: vector is not unit-norm (|v| = " +
                                        std::to_string(norm(v)) + ")");
    }

    /// Normalizes an arbitrary nonzero vector.
    static UnitVec3 normalized(const Vec3& v) {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::invalid_argument("UnitVec3: cannot normalize zero or non-finite vector");
        return UnitVec3(v / n, unchecked_tag{});
    }

    const Vec3& vec() const { return v_; }
    operator const Vec3&() const { return v_; }
    double operator[](int i) const { return v_[i]; }
    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }

    bool operator==(const UnitVec3& o) const { return v_ == o.v_; }

  private:
    struct unchecked_tag {};
    UnitVec3(const Vec3& v, unchecked_tag) : v_(v) {}
    Vec3 v_;
};

inline double dot(const UnitVec3& a, const Vec3& b) { return dot(a.vec(), b); }
inline double dot(const Vec3& a, const UnitVec3& b) { return dot(a, b.vec()); }

/// Polar angle theta from +z in [0, pi], azimuth phi from +x in (-pi, pi].
struct SphericalAngles {
    double theta = 0.0;
    double phi = 0.0;
};

/// n = [cos(phi) sin(theta), sin(phi) sin(theta), cos(theta)]. Total function.
/// Components within 4e-16 of {0, +1, -1} are snapped so that axis-aligned
/// angles map to exact axis vectors (unit_to_spherical then round-trips
/// bit-exactly on the coordinate axes).
inline UnitVec3 spherical_to_unit(const SphericalAngles& a) {
    const double st = std::sin(a.theta);
    Vec3 v{std::cos(a.phi) * st, std::sin(a.phi) * st, std::cos(a.theta)};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) < 4e-16) v[i] = 0.0;
        else if (std::abs(v[i] - 1.0) < 4e-16) v[i] = 1.0;
        else if (std::abs(v[i] + 1.0) < 4e-16) v[i] = -1.0;
    }
    return UnitVec3::normalized(v);
}

/// Inverse of spherical_to_unit. At the poles (|z| = 1) phi is canonicalized to 0.
inline SphericalAngles unit_to_spherical(const UnitVec3& n) {
    SphericalAngles a;
    a.theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
    const double rho = std::hypot(n.x(), n.y());
    a.phi = (rho < 1e-15) ? 0.0 : std::atan2(n.y(), n.x());
    // atan2 returns [-pi, pi]; fold -pi onto +pi so phi lies in (-pi, pi].
    if (a.phi == -std::numbers::pi) a.phi = std::numbers::pi;
    return a;
}

/// Axis-aligned box, lo <= hi componentwise.
struct Box {
    Vec3 lo;
    Vec3 hi;

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }
    Vec3 clamp(const Vec3& p) const {
        return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y),
                std::clamp(p.z, lo.z, hi.z)};
    }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    bool degenerate() const {
        return !(hi.x > lo.x) || !(hi.y > lo.y) || !(hi.z > lo.z);
    }
};

} // namespace irsvlp
