#pragma once

#include <string>
#include <variant>

#include "fermikin/vec3.hpp"

namespace fermikin
{

//---------------------------------------------------------------------------//
/*!
 * Spatial region for the kinetic problem.
 *
 * Three smooth shapes are supported: all of R^3, a ball, and an infinite slab
 * bounded by two parallel planes. Each has a closed-form ray intersection and
 * an outward normal field that extends smoothly off the boundary.
 */
//---------------------------------------------------------------------------//
struct FullSpace
{
};

struct Ball
{
    Vec3 center;
    double radius = 1.0;
};

//! Region {x : low <= x.axis <= high}; unbounded along the two other directions.
struct Slab
{
    Vec3 axis{0, 0, 1};
    double low = 0.0;
    double high = 1.0;
    //! Tangential period used when a spatial grid needs a bounded cross-section.
    double period = 1.0;
};

using DomainShape = std::variant<FullSpace, Ball, Slab>;

class Domain
{
  public:
    static constexpr double default_tangent_tolerance = 1e-10;
    //! Distance to the boundary accepted as "on the boundary".
    static constexpr double boundary_tolerance = 1e-9;

    Domain() = default;
    explicit Domain(DomainShape shape, double tangent_tolerance = default_tangent_tolerance);

    static Domain full_space() { return Domain(FullSpace{}); }
    static Domain ball(Vec3 center, double radius) { return Domain(Ball{center, radius}); }
    static Domain slab(Vec3 axis, double low, double high, double period = 1.0)
    {
        return Domain(Slab{axis, low, high, period});
    }

    DomainShape const& shape() const { return shape_; }
    double tangent_tolerance() const { return tangent_tolerance_; }
    bool bounded_normal() const { return !std::holds_alternative<FullSpace>(shape_); }
    bool is_full_space() const { return std::holds_alternative<FullSpace>(shape_); }

    //! Signed distance-like level function: negative inside, zero on the boundary.
    double level(Vec3 const& x) const;

    //! Length scale used for relative tolerances (radius, slab width, or 1).
    double length_scale() const;

    std::string describe() const;

  private:
    DomainShape shape_ = FullSpace{};
    double tangent_tolerance_ = default_tangent_tolerance;
};

//! True iff x lies in the closed region (within boundary_tolerance).
bool contains(Domain const& domain, Vec3 const& x);

/*!
 * Outward unit normal of the boundary at (or near) x.
 *
 * The field is evaluated off the boundary as well: radial direction for a
 * ball, the nearer face normal for a slab. Throws UndefinedNormalError for
 * FullSpace.
 */
Vec3 outward_normal(Domain const& domain, Vec3 const& x);

//! Specular reflection v - 2 (v.n) n.
constexpr Vec3 reflect(Vec3 const& v, Vec3 const& n)
{
    return v - 2.0 * dot(v, n) * n;
}

}  // namespace fermikin
