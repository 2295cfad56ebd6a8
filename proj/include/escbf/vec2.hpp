#pragma once

#include <cmath>

namespace escbf {

/// 2-D vector in SI meters (or m/s when used as a velocity).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
    constexpr Vec2 operator/(double k) const { return {x / k, y / k}; }
    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2& o) const = default;

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }

    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
};

constexpr Vec2 operator*(double k, const Vec2& v) { return {k * v.x, k * v.y}; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

}  // namespace escbf
