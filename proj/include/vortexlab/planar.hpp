#pragma once

#include <cmath>

namespace vortexlab {

/// Point or velocity in the plane.
struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double a, double b) : x1(a), x2(b) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x1 + o.x1, x2 + o.x2}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x1 - o.x1, x2 - o.x2}; }
    constexpr Vec2 operator-() const { return {-x1, -x2}; }
    constexpr Vec2 operator*(double c) const { return {c * x1, c * x2}; }
    constexpr Vec2 operator/(double c) const { return {x1 / c, x2 / c}; }
    Vec2& operator+=(Vec2 o) { x1 += o.x1; x2 += o.x2; return *this; }
    Vec2& operator-=(Vec2 o) { x1 -= o.x1; x2 -= o.x2; return *this; }
    Vec2& operator*=(double c) { x1 *= c; x2 *= c; return *this; }

    /// x^perp = (-x2, x1), counterclockwise quarter turn.
    constexpr Vec2 perp() const { return {-x2, x1}; }

    constexpr double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
    constexpr double norm_sq() const { return x1 * x1 + x2 * x2; }
    double norm() const { return std::hypot(x1, x2); }
    /// Polar argument in (-pi, pi].
    double arg() const { return std::atan2(x2, x1); }
};

inline constexpr Vec2 operator*(double c, Vec2 v) { return v * c; }

inline Vec2 rotate(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x1 - s * v.x2, s * v.x1 + c * v.x2};
}

} // namespace vortexlab
