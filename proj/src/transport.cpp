#include "fermikin/transport.hpp"

#include <cmath>
#include <string>

#include "fermikin/error.hpp"

namespace fermikin
{
namespace
{
// Exit time from a ball for a point inside (or on) the sphere.
double ball_exit_time(Ball const& b, Vec3 const& x, Vec3 const& v, bool on_boundary)
{
    double const a = norm2(v);
    if (a == 0.0)
        return infinite_time;
    Vec3 const r = x - b.center;
    double const half_b = dot(r, v);
    if (on_boundary)
    {
        // roots are 0 and -2 (r.v)/|v|^2; only an inward velocity has a far root
        return half_b < 0.0 ? -2.0 * half_b / a : infinite_time;
    }
    double const c = norm2(r) - b.radius * b.radius;
    double const disc = half_b * half_b - a * c;
    if (disc < 0.0)
        return infinite_time;
    double const sq = std::sqrt(disc);
    double t = half_b <= 0.0 ? (-half_b + sq) / a : -c / (half_b + sq);
    return std::max(t, 0.0);
}

double slab_exit_time(Slab const& s, Vec3 const& x, Vec3 const& v)
{
    double const vn = dot(v, s.axis);
    if (vn == 0.0)
        return infinite_time;
    double const p = dot(x, s.axis);
    double const t = vn > 0.0 ? (s.high - p) / vn : (s.low - p) / vn;
    return std::max(t, 0.0);
}

bool tangential(Domain const& domain, Vec3 const& v, Vec3 const& n)
{
    double const speed = norm(v);
    return speed == 0.0 || std::abs(dot(v, n)) <= domain.tangent_tolerance() * speed;
}

double hit_time(Domain const& domain, PhaseState const& s, bool on_boundary)
{
    double t = infinite_time;
    if (auto const* b = std::get_if<Ball>(&domain.shape()))
        t = ball_exit_time(*b, s.x, s.v, on_boundary);
    else if (auto const* sl = std::get_if<Slab>(&domain.shape()))
        t = slab_exit_time(*sl, s.x, s.v);
    if (!std::isfinite(t))
        return t;
    Vec3 const hit = s.x + t * s.v;
    if (tangential(domain, s.v, outward_normal(domain, hit)))
        return infinite_time;
    return t;
}

Vec3 project_to_boundary(Domain const& domain, Vec3 const& x)
{
    if (auto const* b = std::get_if<Ball>(&domain.shape()))
    {
        Vec3 const r = x - b->center;
        return b->center + (b->radius / norm(r)) * r;
    }
    if (auto const* s = std::get_if<Slab>(&domain.shape()))
    {
        double const p = dot(x, s->axis);
        double const face = (p - s->low < s->high - p) ? s->low : s->high;
        return x + (face - p) * s->axis;
    }
    return x;
}

// Pulls a point that drifted out of a ball (after a tangential pass) back in.
Vec3 clamp_into(Domain const& domain, Vec3 const& x)
{
    if (contains(domain, x))
        return x;
    return project_to_boundary(domain, x);
}
}  // namespace

double first_hit_time(Domain const& domain, PhaseState const& s)
{
    return hit_time(domain, s, false);
}

Flight advance(Domain const& domain, PhaseState const& s, double t, std::size_t cap, bool record_hits)
{
    Flight out{s, {}};
    if (t <= 0.0 || domain.is_full_space())
    {
        out.state.x = s.x + t * s.v;
        return out;
    }

    double const merge_tol = hit_time_tolerance * std::max(1.0, t);
    double remaining = t;
    double elapsed = 0.0;
    bool on_boundary = false;
    PhaseState& st = out.state;
    while (true)
    {
        double const th = hit_time(domain, st, on_boundary);
        if (!(th <= remaining + merge_tol))
        {
            st.x = clamp_into(domain, st.x + remaining * st.v);
            break;
        }
        double const step = std::min(th, remaining);
        st.x = project_to_boundary(domain, st.x + step * st.v);
        st.v = reflect(st.v, outward_normal(domain, st.x));
        on_boundary = true;
        elapsed += step;
        remaining -= step;
        ++out.log.reflection_count;
        if (record_hits)
            out.log.hit_times.push_back(elapsed);
        if (out.log.reflection_count > cap)
            throw ReflectionCapError("reflection cap of " + std::to_string(cap)
                                     + " exceeded (near-tangential trajectory?)");
        if (remaining <= merge_tol)
            break;
    }
    return out;
}

PhaseState backtrace(Domain const& domain, PhaseState const& s, double t, std::size_t cap)
{
    PhaseState const reversed{s.x, -s.v};
    PhaseState out = advance(domain, reversed, t, cap, false).state;
    out.v = -out.v;
    return out;
}

double conjugate_sharp(PhaseFunction const& field_eval,
                       Domain const& domain,
                       double t,
                       PhaseState const& s)
{
    if (t == 0.0)
        return field_eval(s);
    return field_eval(advance(domain, s, t, default_reflection_cap, false).state);
}

}  // namespace fermikin
