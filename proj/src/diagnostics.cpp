#include "fermikin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fermikin/error.hpp"

namespace fermikin
{

//---------------------------------------------------------------------------//
// Cutoff and test functions
//---------------------------------------------------------------------------//

CutoffFunction::CutoffFunction(double r_inner) : r_(r_inner)
{
    if (!(r_inner > 0.0) || !std::isfinite(r_inner))
        throw ValidationError("diagnostics.cutoff_radius", "cutoff radius must be positive");
}

double CutoffFunction::operator()(double speed) const
{
    if (speed <= r_)
        return 1.0;
    if (speed >= 2.0 * r_)
        return 0.0;
    double const s = (speed - r_) / r_;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

namespace
{
struct Bump
{
    double c;
    double r;

    bool infinite() const { return std::isinf(r); }
    double value(double x) const
    {
        if (infinite())
            return 1.0;
        double const u = (x - c) / r;
        if (std::abs(u) >= 1.0)
            return 0.0;
        double const a = 1.0 - u * u;
        return a * a * a * a;
    }
    double derivative(double x) const
    {
        if (infinite())
            return 0.0;
        double const u = (x - c) / r;
        if (std::abs(u) >= 1.0)
            return 0.0;
        double const a = 1.0 - u * u;
        return -8.0 * u * a * a * a / r;
    }
};
}  // namespace

TestFunction TestFunction::polynomial_bump(double t_begin, double t_end, Vec3 center, Vec3 radius)
{
    if (!(t_end > t_begin))
        throw ValidationError("test_function", "time support must have t_begin < t_end");
    for (int k = 0; k < 3; ++k)
        if (!(radius[k] > 0.0))
            throw ValidationError("test_function", "spatial radii must be positive");
    Bump const bt{0.5 * (t_begin + t_end), 0.5 * (t_end - t_begin)};
    std::array<Bump, 3> const bx{Bump{center.x, radius.x}, Bump{center.y, radius.y}, Bump{center.z, radius.z}};
    auto space = [bx](Vec3 const& x) { return bx[0].value(x.x) * bx[1].value(x.y) * bx[2].value(x.z); };

    TestFunction phi;
    phi.t_begin = t_begin;
    phi.t_end = t_end;
    phi.center = center;
    phi.radius = radius;
    phi.value = [bt, space](double t, Vec3 const& x) { return bt.value(t) * space(x); };
    phi.time_derivative = [bt, space](double t, Vec3 const& x) { return bt.derivative(t) * space(x); };
    phi.gradient = [bt, bx](double t, Vec3 const& x) {
        double const a = bt.value(t);
        double const fx = bx[0].value(x.x), fy = bx[1].value(x.y), fz = bx[2].value(x.z);
        return Vec3{a * bx[0].derivative(x.x) * fy * fz, a * fx * bx[1].derivative(x.y) * fz,
                    a * fx * fy * bx[2].derivative(x.z)};
    };
    return phi;
}

//---------------------------------------------------------------------------//
// Moments
//---------------------------------------------------------------------------//

// Nodes are visited in +-v pairs so odd moments of even data vanish exactly.
MomentSet cell_moments(std::span<double const> f,
                       VelocityGrid const& grid,
                       std::optional<CutoffFunction> const& cutoff)
{
    MomentSet m;
    for (std::size_t i = 0; i <= grid.mirror(i); ++i)
    {
        std::size_t const j = grid.mirror(i);
        Vec3 const v = grid.node(i);
        double const psi = cutoff ? (*cutoff)(v) : 1.0;
        double const even = i == j ? psi * f[i] : psi * (f[i] + f[j]);
        double const odd = i == j ? 0.0 : psi * (f[i] - f[j]);
        m.mass += even;
        m.momentum = m.momentum + odd * v;
        m.energy += even * norm2(v);
    }
    double const h3 = grid.weight();
    m.mass *= h3;
    m.momentum = h3 * m.momentum;
    m.energy *= h3;
    return m;
}

FluxSet cell_fluxes(std::span<double const> f, VelocityGrid const& grid, std::optional<CutoffFunction> const& cutoff)
{
    FluxSet fl;
    for (std::size_t i = 0; i <= grid.mirror(i); ++i)
    {
        std::size_t const j = grid.mirror(i);
        Vec3 const v = grid.node(i);
        double const psi = cutoff ? (*cutoff)(v) : 1.0;
        double const even = i == j ? psi * f[i] : psi * (f[i] + f[j]);
        double const odd = i == j ? 0.0 : psi * (f[i] - f[j]);
        fl.mass_flux = fl.mass_flux + odd * v;
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                fl.momentum_flux[a][b] += even * v[a] * v[b];
        fl.energy_flux = fl.energy_flux + (odd * norm2(v)) * v;
    }
    double const h3 = grid.weight();
    fl.mass_flux = h3 * fl.mass_flux;
    fl.energy_flux = h3 * fl.energy_flux;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
        {
            fl.momentum_flux[a][b] *= h3;
            fl.momentum_flux[b][a] = fl.momentum_flux[a][b];
        }
    return fl;
}

MomentSet global_invariants(SolverState const& state, SpatialGrid const& spatial, VelocityGrid const& grid)
{
    std::size_t const nv = grid.size();
    if (state.field.size() != spatial.size() * nv)
        throw ShapeMismatchError("state size does not match the grids");
    MomentSet total;
    for (std::size_t c = 0; c < spatial.size(); ++c)
    {
        MomentSet const m = cell_moments(std::span<double const>(state.field).subspan(c * nv, nv), grid);
        double const vol = spatial.volume(c);
        total.mass += vol * m.mass;
        total.momentum = total.momentum + vol * m.momentum;
        total.energy += vol * m.energy;
    }
    return total;
}

MomentSet q_moment_defect(std::span<double const> q, VelocityGrid const& grid)
{
    return cell_moments(q, grid);
}

double relative_q_defect(std::span<double const> q, VelocityGrid const& grid)
{
    MomentSet const m = cell_moments(q, grid);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
    {
        Vec3 const v = grid.node(i);
        double const a = std::abs(q[i]);
        s0 += a;
        s1 += a * norm(v);
        s2 += a * norm2(v);
    }
    double const h3 = grid.weight();
    s0 *= h3;
    s1 *= h3;
    s2 *= h3;
    if (s0 == 0.0)
        return 0.0;
    double const p = std::max({std::abs(m.momentum.x), std::abs(m.momentum.y), std::abs(m.momentum.z)});
    return std::max({std::abs(m.mass) / s0, s1 > 0.0 ? p / s1 : 0.0, s2 > 0.0 ? std::abs(m.energy) / s2 : 0.0});
}

//---------------------------------------------------------------------------//
// Weak conservation residual
//---------------------------------------------------------------------------//

namespace
{
void check_support(TestFunction const& phi,
                   std::vector<SolverState> const& history,
                   Domain const& domain,
                   SpatialGrid const& spatial)
{
    if (history.size() < 2)
        throw SupportViolationError("weak residual needs at least two stored states");
    if (!(phi.t_begin > 0.0) || phi.t_begin < history.front().time)
        throw SupportViolationError("test function support must start after t = 0 and inside the history");
    if (!(phi.t_end < history.back().time))
        throw SupportViolationError("test function support must end before the last stored state");
    if (spatial.kind() == SpatialKind::Homogeneous)
        return;

    Vec3 const r = phi.radius;
    std::visit(
        [&](auto const& shape) {
            using S = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<S, Ball>)
            {
                if (std::isinf(r.x) || std::isinf(r.y) || std::isinf(r.z)
                    || norm(phi.center - shape.center) + norm(r) >= shape.radius)
                    throw SupportViolationError("test function support touches the ball boundary");
            }
            else if constexpr (std::is_same_v<S, Slab>)
            {
                double const c = dot(phi.center, shape.axis);
                double reach = 0.0;
                for (int k = 0; k < 3; ++k)
                {
                    if (shape.axis[k] == 0.0)
                        continue;
                    if (std::isinf(r[k]))
                        throw SupportViolationError("test function is unbounded across the slab");
                    reach += std::abs(shape.axis[k]) * r[k];
                }
                if (c - reach <= shape.low || c + reach >= shape.high)
                    throw SupportViolationError("test function support touches the slab walls");
            }
        },
        domain.shape());
}
}  // namespace

double weak_conservation_residual(std::vector<SolverState> const& history,
                                  Domain const& domain,
                                  SpatialGrid const& spatial,
                                  VelocityGrid const& grid,
                                  CollisionOperator const* collision,
                                  bool conservative,
                                  TestFunction const& phi,
                                  std::optional<CutoffFunction> const& cutoff,
                                  ConservedQuantity which)
{
    check_support(phi, history, domain, spatial);
    if (cutoff && cutoff->r_outer() > grid.v_max() + 1e-12)
        throw ValidationError("diagnostics.cutoff_radius", "cutoff outer radius 2R exceeds v_max");

    std::size_t const nv = grid.size();
    std::size_t const nc = spatial.size();
    std::vector<double> psi(nv);
    for (std::size_t i = 0; i < nv; ++i)
        psi[i] = cutoff ? (*cutoff)(grid.node(i)) : 1.0;
    bool const collide = collision && !collision->trivial();
    int const components = which == ConservedQuantity::Momentum ? 3 : 1;

    // per stored state: sum over cells of the integrand, for each component
    std::vector<std::array<double, 3>> integrand(history.size());
    std::vector<double> q(nv);
    for (std::size_t n = 0; n < history.size(); ++n)
    {
        SolverState const& st = history[n];
        if (st.field.size() != nc * nv)
            throw ShapeMismatchError("history state size does not match the grids");
        std::array<double, 3> acc{0.0, 0.0, 0.0};
        for (std::size_t c = 0; c < nc; ++c)
        {
            Vec3 const x = spatial.center(c);
            double const ph = phi.value(st.time, x);
            double const dt = phi.time_derivative(st.time, x);
            Vec3 const grad = phi.gradient(st.time, x);
            if (ph == 0.0 && dt == 0.0 && grad == Vec3{})
                continue;
            std::span<double const> f(st.field.data() + c * nv, nv);
            if (collide && ph != 0.0)
                collision->evaluate(f, q, conservative);
            std::array<double, 3> cell{0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < nv; ++i)
            {
                if (psi[i] == 0.0)
                    continue;
                Vec3 const v = grid.node(i);
                double const pf = psi[i] * f[i];
                double const pq = collide && ph != 0.0 ? psi[i] * q[i] : 0.0;
                double const vg = dot(v, grad);
                switch (which)
                {
                    case ConservedQuantity::Mass:
                        cell[0] += dt * pf + vg * pf + ph * pq;
                        break;
                    case ConservedQuantity::Energy:
                    {
                        double const e = norm2(v);
                        cell[0] += e * (dt * pf + vg * pf + ph * pq);
                        break;
                    }
                    case ConservedQuantity::Momentum:
                        for (int k = 0; k < 3; ++k)
                            cell[k] += v[k] * (dt * pf + vg * pf + ph * pq);
                        break;
                }
            }
            for (int k = 0; k < components; ++k)
                acc[k] += spatial.volume(c) * grid.weight() * cell[k];
        }
        integrand[n] = acc;
    }

    double worst = 0.0;
    for (int k = 0; k < components; ++k)
    {
        double total = 0.0;
        for (std::size_t n = 0; n + 1 < history.size(); ++n)
            total += 0.5 * (history[n + 1].time - history[n].time) * (integrand[n][k] + integrand[n + 1][k]);
        worst = std::max(worst, std::abs(total));
    }
    return worst;
}

//---------------------------------------------------------------------------//
// Boundary and dispersion monitors
//---------------------------------------------------------------------------//

namespace
{
struct WallSample
{
    std::size_t cell;
    Vec3 normal;
};

std::vector<WallSample> wall_cells(Domain const& domain, SpatialGrid const& spatial)
{
    std::vector<WallSample> out;
    if (spatial.kind() == SpatialKind::Line1D && !spatial.periodic())
    {
        Vec3 e;
        e[spatial.axis()] = 1.0;
        out.push_back({0, -1.0 * e});
        out.push_back({spatial.size() - 1, e});
    }
    else if (spatial.kind() == SpatialKind::Ball3D)
    {
        int const n = spatial.cells_per_axis();
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                {
                    int const c = spatial.retained_index({i, j, k});
                    if (c < 0)
                        continue;
                    bool edge = false;
                    for (int a = 0; a < 3 && !edge; ++a)
                        for (int s : {-1, 1})
                        {
                            std::array<int, 3> nb{i, j, k};
                            nb[a] += s;
                            edge = edge || spatial.retained_index(nb) < 0;
                        }
                    if (edge)
                        out.push_back({static_cast<std::size_t>(c), outward_normal(domain, spatial.center(c))});
                }
    }
    return out;
}

double tangency_ratio(std::span<double const> f, VelocityGrid const& grid, Vec3 const& n)
{
    MomentSet const m = cell_moments(f, grid);
    if (m.mass <= 0.0)
        return 0.0;
    double const speed = std::sqrt(std::max(m.energy / m.mass, 0.0));
    double const scale = m.mass * speed;
    return scale > 0.0 ? std::abs(dot(n, m.momentum)) / scale : 0.0;
}
}  // namespace

double boundary_tangency(SolverState const& state,
                         Domain const& domain,
                         SpatialGrid const& spatial,
                         VelocityGrid const& grid)
{
    if (!domain.bounded_normal())
        throw UndefinedNormalError("boundary tangency needs a domain with a boundary");
    std::size_t const nv = grid.size();
    double worst = 0.0;
    std::vector<double> wall(nv);
    for (auto const& [cell, normal] : wall_cells(domain, spatial))
    {
        std::span<double const> f(state.field.data() + cell * nv, nv);
        if (spatial.kind() == SpatialKind::Line1D)
        {
            int const a = spatial.axis();
            int const n = grid.nodes_per_axis();
            for (std::size_t i = 0; i < nv; ++i)
            {
                Index3 idx = grid.unflatten(i);
                idx[a] = n - 1 - idx[a];
                wall[i] = 0.5 * (f[i] + f[grid.flatten(idx)]);
            }
            worst = std::max(worst, tangency_ratio(wall, grid, normal));
        }
        else
        {
            worst = std::max(worst, tangency_ratio(f, grid, normal));
        }
    }
    return worst;
}

double boundary_layer_momentum(SolverState const& state,
                               Domain const& domain,
                               SpatialGrid const& spatial,
                               VelocityGrid const& grid)
{
    if (!domain.bounded_normal())
        throw UndefinedNormalError("boundary tangency needs a domain with a boundary");
    std::size_t const nv = grid.size();
    double worst = 0.0;
    for (auto const& [cell, normal] : wall_cells(domain, spatial))
        worst = std::max(worst, tangency_ratio({state.field.data() + cell * nv, nv}, grid, normal));
    return worst;
}

double cubed_velocity_moment(SolverState const& state,
                             SpatialGrid const& spatial,
                             VelocityGrid const& grid,
                             std::function<bool(Vec3 const&)> const& in_k)
{
    std::size_t const nv = grid.size();
    std::vector<double> speed3(nv);
    for (std::size_t i = 0; i < nv; ++i)
    {
        double const s = norm(grid.node(i));
        speed3[i] = s * s * s;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < spatial.size(); ++c)
    {
        if (!in_k(spatial.center(c)))
            continue;
        double acc = 0.0;
        for (std::size_t i = 0; i < nv; ++i)
            acc += speed3[i] * state.field[c * nv + i];
        total += spatial.volume(c) * grid.weight() * acc;
    }
    return total;
}

}  // namespace fermikin
