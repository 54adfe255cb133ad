#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "fermikin/geometry.hpp"

namespace fermikin
{

//! A point in phase space.
struct PhaseState
{
    Vec3 x;
    Vec3 v;
};

//! Boundary hits met while following one characteristic.
struct TrajectorySegmentLog
{
    //! Elapsed times (from the start of the flight) of each reflection.
    std::vector<double> hit_times;
    std::size_t reflection_count = 0;
};

struct Flight
{
    PhaseState state;
    TrajectorySegmentLog log;
};

inline constexpr std::size_t default_reflection_cap = 10000;
inline constexpr double infinite_time = std::numeric_limits<double>::infinity();

//! Hits closer than this (relative to the flight time) are merged.
inline constexpr double hit_time_tolerance = 1e-13;

/*!
 * Time until x + t v first meets the boundary.
 *
 * Returns infinity for full space, zero speed, or motion with
 * |v.n|/|v| below the domain's tangent tolerance.
 */
double first_hit_time(Domain const& domain, PhaseState const& s);

/*!
 * Free-transport flow with specular reflections, i.e. the billiard map
 * Psi^t.
 *
 * Straight flight between hits; at each hit the velocity is reflected in the
 * local normal and the position is snapped back onto the boundary. At an
 * exact hit instant the post-reflection velocity is returned (the flow is
 * continuous from the right). Throws ReflectionCapError past `cap` hits.
 */
Flight advance(Domain const& domain,
               PhaseState const& s,
               double t,
               std::size_t cap = default_reflection_cap,
               bool record_hits = true);

//! Psi^{-t}(s), via Psi^{-t}(x, v) = flip(Psi^t(x, -v)).
PhaseState backtrace(Domain const& domain,
                     PhaseState const& s,
                     double t,
                     std::size_t cap = default_reflection_cap);

using PhaseFunction = std::function<double(PhaseState const&)>;

//! f#(t, s) = f(t, Psi^t(s)) for a field evaluated at one time.
double conjugate_sharp(PhaseFunction const& field_eval,
                       Domain const& domain,
                       double t,
                       PhaseState const& s);

}  // namespace fermikin
