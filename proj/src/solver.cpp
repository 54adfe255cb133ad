#include "fermikin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fermikin/diagnostics.hpp"
#include "fermikin/error.hpp"
#include "fermikin/parallel.hpp"
#include "fermikin/sphere_quadrature.hpp"

namespace fermikin
{
namespace
{
// Flat index of the grid node at velocity v; v must sit on a node.
std::size_t node_index(VelocityGrid const& grid, Vec3 const& v)
{
    Index3 idx;
    for (int k = 0; k < 3; ++k)
    {
        double const p = grid.index_coordinate(v[k]);
        idx[k] = static_cast<int>(std::lround(p));
        if (std::abs(p - idx[k]) > 1e-6)
            throw Error(ErrorCategory::Internal, "backtraced velocity is not a grid node");
    }
    if (!grid.in_range(idx))
        throw Error(ErrorCategory::Internal, "backtraced velocity left the grid");
    return grid.flatten(idx);
}

// (index, weight) pairs of linear interpolation in the velocity box; nodes
// outside the box are dropped (f = 0 there). Returns the number of taps.
int velocity_taps(VelocityGrid const& grid, Vec3 const& v, std::array<std::pair<std::size_t, double>, 8>& out)
{
    if (!grid.inside_box(v))
        return 0;
    int const n = grid.nodes_per_axis();
    std::array<int, 3> lo;
    std::array<double, 3> t;
    for (int k = 0; k < 3; ++k)
    {
        double const p = grid.index_coordinate(v[k]);
        lo[k] = static_cast<int>(std::floor(p));
        t[k] = p - lo[k];
    }
    int count = 0;
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a)
            {
                Index3 const j{lo[0] + a, lo[1] + b, lo[2] + c};
                double const w = (a ? t[0] : 1 - t[0]) * (b ? t[1] : 1 - t[1]) * (c ? t[2] : 1 - t[2]);
                if (w > 0.0 && j[0] >= 0 && j[0] < n && j[1] >= 0 && j[1] < n && j[2] >= 0 && j[2] < n)
                    out[count++] = {grid.flatten(j), w};
            }
    return count;
}

struct CellStencil
{
    std::array<int, 3> lo;
    std::array<double, 3> t;
};

CellStencil cell_stencil(SpatialGrid const& spatial, Vec3 const& x)
{
    int const n = spatial.cells_per_axis();
    CellStencil st;
    for (int k = 0; k < 3; ++k)
    {
        double const p = (x[k] - spatial.cube_origin()[k]) / spatial.spacing() - 0.5;
        st.lo[k] = std::clamp(static_cast<int>(std::floor(p)), -1, n - 1);
        st.t[k] = std::clamp(p - st.lo[k], 0.0, 1.0);
    }
    return st;
}

// Trilinear over retained cells only (renormalized, nearest cell if none is
// retained) times trilinear in velocity.
template<class Emit>
void retained_taps(TransportMap::BallContext const& ctx, Vec3 const& x, Vec3 const& v, double scale, Emit&& emit)
{
    SpatialGrid const& spatial = ctx.spatial;
    std::size_t const nv = ctx.velocity.size();
    CellStencil const st = cell_stencil(spatial, x);
    std::array<std::pair<std::size_t, double>, 8> cells;
    int n_cells = 0;
    double total = 0.0;
    for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx)
            {
                int const r = spatial.retained_index({st.lo[0] + cx, st.lo[1] + cy, st.lo[2] + cz});
                double const w = (cx ? st.t[0] : 1 - st.t[0]) * (cy ? st.t[1] : 1 - st.t[1])
                                 * (cz ? st.t[2] : 1 - st.t[2]);
                if (r >= 0 && w > 0.0)
                {
                    cells[n_cells++] = {static_cast<std::size_t>(r), w};
                    total += w;
                }
            }
    if (n_cells == 0)
    {
        std::size_t best = 0;
        for (std::size_t k = 1; k < spatial.size(); ++k)
            if (norm2(spatial.center(k) - x) < norm2(spatial.center(best) - x))
                best = k;
        cells[n_cells++] = {best, 1.0};
        total = 1.0;
    }
    std::array<std::pair<std::size_t, double>, 8> vt;
    int const n_v = velocity_taps(ctx.velocity, v, vt);
    for (int a = 0; a < n_cells; ++a)
        for (int b = 0; b < n_v; ++b)
            emit(cells[a].first * nv + vt[b].first, scale * cells[a].second / total * vt[b].second);
}

// Taps of one Ball3D row. Trilinear in space and velocity at the backtraced
// point; a stencil corner outside the ball is a ghost whose value is f at the
// mirror point across the sphere with the specularly reflected velocity.
template<class Emit>
void ball_row(TransportMap::BallContext const& ctx, std::size_t c, std::size_t i, Emit&& emit)
{
    SpatialGrid const& spatial = ctx.spatial;
    Ball const& ball = std::get<Ball>(ctx.domain.shape());
    std::size_t const nv = ctx.velocity.size();
    double const dx = spatial.spacing();
    PhaseState const back = backtrace(ctx.domain, {spatial.center(c), ctx.velocity.node(i)}, ctx.theta);
    CellStencil const st = cell_stencil(spatial, back.x);
    std::array<std::pair<std::size_t, double>, 8> vt;
    int const n_v = velocity_taps(ctx.velocity, back.v, vt);
    for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx)
            {
                double const w = (cx ? st.t[0] : 1 - st.t[0]) * (cy ? st.t[1] : 1 - st.t[1])
                                 * (cz ? st.t[2] : 1 - st.t[2]);
                if (w <= 0.0)
                    continue;
                Index3 const idx{st.lo[0] + cx, st.lo[1] + cy, st.lo[2] + cz};
                int const r = spatial.retained_index(idx);
                if (r >= 0)
                {
                    for (int b = 0; b < n_v; ++b)
                        emit(static_cast<std::size_t>(r) * nv + vt[b].first, w * vt[b].second);
                    continue;
                }
                Vec3 const y = spatial.cube_origin()
                               + Vec3{(idx[0] + 0.5) * dx, (idx[1] + 0.5) * dx, (idx[2] + 0.5) * dx};
                Vec3 const d = y - ball.center;
                double const dist = norm(d);
                Vec3 const n = (1.0 / dist) * d;
                Vec3 const mirror = ball.center + (2.0 * ball.radius - dist) * n;
                retained_taps(ctx, mirror, reflect(back.v, n), w, emit);
            }
}
}  // namespace

//---------------------------------------------------------------------------//
// Transport map
//---------------------------------------------------------------------------//

TransportMap::TransportMap(Domain const& domain,
                           SpatialGrid const& spatial,
                           VelocityGrid const& velocity,
                           double theta)
{
    if (spatial.kind() == SpatialKind::Homogeneous || theta == 0.0)
    {
        identity_ = true;
        return;
    }
    std::size_t const nv = velocity.size();
    std::size_t const nc = spatial.size();
    offsets_.reserve(nc * nv + 1);
    offsets_.push_back(0);

    if (spatial.kind() == SpatialKind::Line1D)
    {
        if (spatial.periodic() != domain.is_full_space())
            throw ValidationError("space.kind",
                                  "periodic lines need full space; bounded lines need a slab");
        int const a = spatial.axis();
        int const n = velocity.nodes_per_axis();
        int const cells = static_cast<int>(nc);
        auto mirrored = [&](std::size_t node) {
            Index3 idx = velocity.unflatten(node);
            idx[a] = n - 1 - idx[a];
            return velocity.flatten(idx);
        };
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t i = 0; i < nv; ++i)
            {
                PhaseState const back = backtrace(domain, {spatial.center(c), velocity.node(i)}, theta);
                std::size_t const node = node_index(velocity, back.v);
                double const s = (back.x[a] - spatial.low()) / spatial.spacing() - 0.5;
                if (spatial.periodic())
                {
                    double const j = std::floor(s);
                    double const t = s - j;
                    auto wrap = [&](long k) { return static_cast<std::size_t>(((k % cells) + cells) % cells); };
                    taps_.push_back({wrap(static_cast<long>(j)) * nv + node, 1.0 - t});
                    taps_.push_back({wrap(static_cast<long>(j) + 1) * nv + node, t});
                }
                else if (s < 0.0)
                {
                    double const t = std::max(0.0, s + 1.0);
                    taps_.push_back({mirrored(node), 1.0 - t});
                    taps_.push_back({node, t});
                }
                else if (s > cells - 1)
                {
                    double const t = std::min(1.0, s - (cells - 1));
                    std::size_t const last = static_cast<std::size_t>(cells - 1) * nv;
                    taps_.push_back({last + node, 1.0 - t});
                    taps_.push_back({last + mirrored(node), t});
                }
                else
                {
                    int const j = std::min(static_cast<int>(std::floor(s)), cells - 2);
                    double const t = s - j;
                    taps_.push_back({static_cast<std::size_t>(j) * nv + node, 1.0 - t});
                    taps_.push_back({static_cast<std::size_t>(j + 1) * nv + node, t});
                }
                offsets_.push_back(taps_.size());
            }
        return;
    }

    // Ball3D rows are recomputed in apply()
    offsets_.clear();
    BallContext ctx{domain, spatial, velocity, theta, std::vector<std::size_t>(nv), 0};
    int const n = velocity.nodes_per_axis();
    std::map<int, std::size_t> shell_of_radius;
    for (std::size_t i = 0; i < nv; ++i)
    {
        Index3 const idx = velocity.unflatten(i);
        int r2 = 0;
        for (int k = 0; k < 3; ++k)
            r2 += (2 * idx[k] - (n - 1)) * (2 * idx[k] - (n - 1));
        auto const [it, fresh] = shell_of_radius.try_emplace(r2, shell_of_radius.size());
        ctx.shell[i] = it->second;
    }
    ctx.shells = shell_of_radius.size();
    ball_ = std::make_shared<BallContext const>(std::move(ctx));
}

void TransportMap::apply(std::span<double const> in, std::span<double> out) const
{
    if (identity_)
    {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    if (ball_)
    {
        std::size_t const nv = ball_->velocity.size();
        if (in.size() != out.size() || out.size() != ball_->spatial.size() * nv)
            throw ShapeMismatchError("field size does not match the transport map");
        parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k)
            {
                double acc = 0.0;
                ball_row(*ball_, k / nv, k % nv, [&](std::size_t source, double w) { acc += w * in[source]; });
                out[k] = acc;
            }
        });
        std::vector<double> mass_in(ball_->shells, 0.0), mass_out(ball_->shells, 0.0);
        for (std::size_t k = 0; k < out.size(); ++k)
        {
            mass_in[ball_->shell[k % nv]] += in[k];
            mass_out[ball_->shell[k % nv]] += out[k];
        }
        std::vector<double> scale(ball_->shells, 1.0);
        for (std::size_t s = 0; s < scale.size(); ++s)
            if (mass_out[s] > 0.0 && mass_in[s] > 0.0)
                scale[s] = mass_in[s] / mass_out[s];
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] *= scale[ball_->shell[k % nv]];
        return;
    }
    if (out.size() + 1 != offsets_.size() || in.size() != out.size())
        throw ShapeMismatchError("field size does not match the transport map");
    parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k)
        {
            double acc = 0.0;
            for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j)
                acc += taps_[j].weight * in[taps_[j].source];
            out[k] = acc;
        }
    });
}

//---------------------------------------------------------------------------//
// Solver
//---------------------------------------------------------------------------//

Solver::Solver(Domain domain,
               SpatialGrid spatial,
               VelocityGrid velocity,
               CollisionKernel const& kernel,
               SphereQuadrature const& sphere,
               StepConfig config)
    : domain_(std::move(domain)),
      spatial_(std::move(spatial)),
      velocity_(velocity),
      collision_(std::make_unique<CollisionOperator>(velocity, kernel, sphere)),
      config_(config),
      transport_(domain_, spatial_, velocity_, config.theta)
{
    if (!(config_.theta > 0.0) || !std::isfinite(config_.theta))
        throw ValidationError("time.theta", "theta must be positive");
    if (!(config_.picard_tol > 0.0))
        throw ValidationError("time.picard_tol", "picard_tol must be positive");
    if (config_.picard_max_iter < 1)
        throw ValidationError("time.picard_max_iter", "picard_max_iter must be at least 1");
    if (!(config_.contraction_safety > 0.0 && config_.contraction_safety < 1.0))
        throw ValidationError("time.contraction_safety", "contraction_safety must lie in (0, 1)");
    for (Vec3 const& x : spatial_.centers())
        if (spatial_.kind() != SpatialKind::Homogeneous && !contains(domain_, x))
            throw ValidationError("space", "spatial cell centre lies outside the domain");
}

SolverState Solver::initial_state(std::vector<double> field) const
{
    if (field.size() != spatial_.size() * velocity_.size())
        throw ShapeMismatchError("initial field has " + std::to_string(field.size())
                                 + " values, expected " + std::to_string(spatial_.size() * velocity_.size()));
    for (double x : field)
        if (!(x >= 0.0 && x <= 1.0))
            throw InvalidValueError("initial data must lie in [0, 1]");
    SolverState s;
    s.field = std::move(field);
    return s;
}

std::vector<double> Solver::collision_field(std::span<double const> field) const
{
    std::size_t const nv = velocity_.size();
    std::vector<double> q(field.size(), 0.0);
    if (collision_->trivial())
        return q;
    for (std::size_t c = 0; c < spatial_.size(); ++c)
        collision_->evaluate(field.subspan(c * nv, nv), std::span<double>(q).subspan(c * nv, nv),
                             config_.conservative);
    return q;
}

StepReport Solver::step(SolverState& state, PicardGuess guess) const
{
    double const theta = config_.theta;
    double const bound = theta * 4.0 * l1_norm();
    if (config_.enforce_step_bound && bound > config_.contraction_safety)
    {
        std::ostringstream os;
        os << "contraction bound violated: theta * 4B = " << bound << " exceeds contraction_safety "
           << config_.contraction_safety;
        throw NonContractionError(os.str());
    }
    std::size_t const size = state.field.size();
    if (size != spatial_.size() * velocity_.size())
        throw ShapeMismatchError("state size does not match the solver grids");

    bool const collide = !collision_->trivial();
    std::vector<double> half(state.field);
    if (collide)
    {
        auto const q0 = collision_field(state.field);
        for (std::size_t k = 0; k < size; ++k)
            half[k] += 0.5 * theta * q0[k];
    }
    std::vector<double> carried(size), current(size);
    transport_.apply(half, carried);
    transport_.apply(state.field, current);
    if (guess == PicardGuess::DoubledTransported)
        for (double& x : current)
            x = std::clamp(2.0 * x, 0.0, 1.0);

    StepReport report;
    std::vector<double> next(size);
    for (int k = 0; k < config_.picard_max_iter; ++k)
    {
        if (collide)
        {
            auto const q = collision_field(current);
            for (std::size_t j = 0; j < size; ++j)
                next[j] = carried[j] + 0.5 * theta * q[j];
            report.q_mass = 0.0;
            report.q_energy = 0.0;
            std::size_t const nv = velocity_.size();
            for (std::size_t c = 0; c < spatial_.size(); ++c)
            {
                MomentSet const m = q_moment_defect(std::span<double const>(q).subspan(c * nv, nv), velocity_);
                report.q_mass += spatial_.volume(c) * m.mass;
                report.q_energy += spatial_.volume(c) * m.energy;
            }
        }
        else
        {
            next = carried;
        }
        double change = 0.0;
        for (std::size_t j = 0; j < size; ++j)
            change = std::max(change, std::abs(next[j] - current[j]));
        if (std::isnan(change))
            throw InvalidValueError("NaN produced during Picard iteration");
        report.changes.push_back(change);
        if (report.changes.size() > 1)
        {
            double const prev = report.changes[report.changes.size() - 2];
            report.ratios.push_back(prev > 0.0 ? change / prev : 0.0);
            report.last_ratio = report.ratios.back();
        }
        std::swap(current, next);
        report.iterations = k + 1;
        if (change <= config_.picard_tol)
            break;
        std::size_t const r = report.ratios.size();
        if (r >= 2 && report.ratios[r - 1] >= 1.0 && report.ratios[r - 2] >= 1.0)
        {
            std::ostringstream os;
            os << "Picard iteration is not contracting: successive-difference ratios " << report.ratios[r - 2]
               << ", " << report.ratios[r - 1] << " at step " << state.step_count;
            throw NonContractionError(os.str());
        }
        if (k + 1 == config_.picard_max_iter)
        {
            std::ostringstream os;
            os << "Picard iteration did not reach tolerance " << config_.picard_tol << " in "
               << config_.picard_max_iter << " iterations (last change " << change << ")";
            throw MaxIterationError(os.str());
        }
    }

    auto const [lo, hi] = std::minmax_element(current.begin(), current.end());
    report.min_before_clamp = *lo;
    report.max_before_clamp = *hi;
    report.clamp_defect = clamp_defect(current);
    clamp_bar_into(current, current);
    state.field = std::move(current);
    state.step_count += 1;
    state.time = state.step_count * theta;
    return report;
}

SolverState Solver::run(SolverState state, std::size_t n_steps, std::vector<StepSink> const& sinks) const
{
    for (std::size_t k = 0; k < n_steps; ++k)
    {
        StepReport const report = step(state);
        for (auto const& sink : sinks)
            sink(state, report);
    }
    return state;
}

//---------------------------------------------------------------------------//
// Duhamel check
//---------------------------------------------------------------------------//

double duhamel_solution(SourceFunction const& h,
                        PhaseFunction const& f0,
                        Domain const& domain,
                        double t,
                        PhaseState const& s,
                        int gauss_points)
{
    PhaseState const start = backtrace(domain, s, t);
    double value = f0(start);
    if (t == 0.0)
        return value;

    // the backward path reflects at these elapsed times; integrate piecewise
    Flight const back = advance(domain, {s.x, -s.v}, t);
    std::vector<double> breaks{0.0};
    for (double hit : back.log.hit_times)
        if (hit > breaks.back() && hit < t)
            breaks.push_back(hit);
    breaks.push_back(t);

    std::vector<double> nodes, weights;
    gauss_legendre(gauss_points, nodes, weights);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p)
    {
        double const mid = 0.5 * (breaks[p] + breaks[p + 1]);
        double const half = 0.5 * (breaks[p + 1] - breaks[p]);
        for (int k = 0; k < gauss_points; ++k)
        {
            double const u = mid + half * nodes[k];
            value += half * weights[k] * h(t - u, backtrace(domain, s, u));
        }
    }
    return value;
}

DuhamelStudy verify_duhamel(SourceFunction const& h,
                            PhaseFunction const& f0,
                            Domain const& domain,
                            double t_final,
                            std::vector<PhaseState> const& samples,
                            std::vector<double> const& deltas)
{
    if (deltas.empty())
        throw ValidationError("deltas", "verify_duhamel needs at least one step size");
    double const widest = *std::max_element(deltas.begin(), deltas.end());
    constexpr int n_times = 4;
    if (!(t_final > 0.0) || widest * (n_times + 1) >= t_final)
        throw ValidationError("t_final", "t_final must exceed (check times + 1) * largest delta");

    auto sharp = [&](double t, PhaseState const& s) {
        return conjugate_sharp(
            [&](PhaseState const& y) { return duhamel_solution(h, f0, domain, t, y); }, domain, t, s);
    };

    // keep (sample, time) pairs whose widest window has no reflection
    std::vector<std::pair<PhaseState, double>> points;
    for (auto const& s : samples)
    {
        Flight const fl = advance(domain, s, t_final);
        for (int k = 1; k <= n_times; ++k)
        {
            double const t = t_final * k / (n_times + 1);
            bool clear = true;
            for (double hit : fl.log.hit_times)
                clear = clear && std::abs(hit - t) > 1.5 * widest;
            if (clear)
                points.emplace_back(s, t);
        }
    }

    DuhamelStudy study;
    study.deltas = deltas;
    study.checked_points = points.size();
    for (double d : deltas)
    {
        double worst = 0.0;
        for (auto const& [s, t] : points)
        {
            double const fd = (sharp(t + d, s) - sharp(t - d, s)) / (2.0 * d);
            double const exact = h(t, advance(domain, s, t, default_reflection_cap, false).state);
            worst = std::max(worst, std::abs(fd - exact));
        }
        study.residuals.push_back(worst);
    }
    for (std::size_t k = 0; k + 1 < deltas.size(); ++k)
        study.orders.push_back(std::log(study.residuals[k] / study.residuals[k + 1])
                               / std::log(deltas[k] / deltas[k + 1]));
    return study;
}

}  // namespace fermikin
