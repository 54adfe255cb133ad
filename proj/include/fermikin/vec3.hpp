#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace fermikin
{

/// Cartesian 3-vector used for positions, velocities and normals.
struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
    constexpr double& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }

    constexpr Vec3& operator+=(Vec3 const& o)
    {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(Vec3 const& o)
    {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s)
    {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 const& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 const& b) { return a -= b; }
    friend constexpr Vec3 operator-(Vec3 const& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr bool operator==(Vec3 const&, Vec3 const&) = default;

    friend std::ostream& operator<<(std::ostream& os, Vec3 const& v)
    {
        return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
    }
};

constexpr double dot(Vec3 const& a, Vec3 const& b)
{
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(Vec3 const& a)
{
    return std::sqrt(dot(a, a));
}

constexpr double norm2(Vec3 const& a)
{
    return dot(a, a);
}

inline Vec3 normalized(Vec3 const& a)
{
    return a * (1.0 / norm(a));
}

inline double max_abs_diff(Vec3 const& a, Vec3 const& b)
{
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

}  // namespace fermikin
