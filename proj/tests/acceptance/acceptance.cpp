// Acceptance criteria 1-15: one PASS/FAIL line per criterion.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fermikin/collision.hpp"
#include "fermikin/config.hpp"
#include "fermikin/diagnostics.hpp"
#include "fermikin/error.hpp"
#include "fermikin/io.hpp"
#include "fermikin/solver.hpp"
#include "fermikin/transport.hpp"

using namespace fermikin;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

constexpr double inf = std::numeric_limits<double>::infinity();

//---------------------------------------------------------------------------//
// Shared configurations
//---------------------------------------------------------------------------//

// Constant kernel on |w| <= 2 rescaled so the discrete B is 1.
CollisionKernel unit_kernel(VelocityGrid const& grid, SphereQuadrature const& sphere)
{
    CollisionKernel const base = CollisionKernel::constant(2.0, 1.0);
    return base.scaled(1.0 / kernel_l1_norm(base, grid, sphere));
}

struct Level
{
    VelocityGrid grid;
    SphereQuadrature sphere;
    CollisionKernel kernel;
};

Level make_level(int nodes, SphereQuadrature sphere)
{
    VelocityGrid grid(6.0, nodes);
    CollisionKernel kernel = unit_kernel(grid, sphere);
    return {grid, std::move(sphere), std::move(kernel)};
}

// reference desk level and its refinement (finer velocity grid, 4x sphere nodes)
Level const& coarse_level()
{
    static Level const level = make_level(21, SphereQuadrature::lebedev(26));
    return level;
}

Level const& fine_level()
{
    static Level const level = make_level(31, SphereQuadrature::product(8, 14));
    return level;
}

std::vector<double> random_field(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(n);
    for (double& x : f)
        x = u(rng);
    return f;
}

std::vector<double> double_bump(VelocityGrid const& grid)
{
    InitialSpec spec;
    spec.profile = CallSpec{"double_bump", {}, {}};
    return build_initial(spec, SpatialGrid::homogeneous(), grid, 0);
}

// 100-step homogeneous relaxation from random data on the reference level.
struct ReferenceRun
{
    MomentSet initial;
    double max_mass_drift = 0.0;
    double max_energy_drift = 0.0;
    double min_before_clamp = inf;
    double max_before_clamp = -inf;
    double max_clamp_defect = 0.0;
    double max_ratio = 0.0;
    int max_iterations = 0;
    std::size_t steps = 0;
};

ReferenceRun const& reference_run()
{
    static std::optional<ReferenceRun> cached;
    if (cached)
        return *cached;
    Level const& level = coarse_level();
    StepConfig config;
    config.theta = 0.1;
    Solver const solver(Domain::full_space(), SpatialGrid::homogeneous(), level.grid, level.kernel, level.sphere,
                        config);
    std::mt19937_64 rng(20240601);
    SolverState state = solver.initial_state(random_field(level.grid.size(), rng));
    ReferenceRun run;
    run.initial = global_invariants(state, solver.spatial(), level.grid);
    StepSink const sink = [&](SolverState const& s, StepReport const& r) {
        MomentSet const m = global_invariants(s, solver.spatial(), level.grid);
        run.max_mass_drift = std::max(run.max_mass_drift, std::abs(m.mass - run.initial.mass) / run.initial.mass);
        run.max_energy_drift =
            std::max(run.max_energy_drift, std::abs(m.energy - run.initial.energy) / run.initial.energy);
        run.min_before_clamp = std::min(run.min_before_clamp, r.min_before_clamp);
        run.max_before_clamp = std::max(run.max_before_clamp, r.max_before_clamp);
        run.max_clamp_defect = std::max(run.max_clamp_defect, r.clamp_defect);
        for (double x : r.ratios)
            run.max_ratio = std::max(run.max_ratio, x);
        run.max_iterations = std::max(run.max_iterations, r.iterations);
        run.steps = s.step_count;
    };
    solver.run(state, 100, {sink});
    cached = run;
    return *cached;
}

// One step from the double bump without projection: relative mass and energy drift.
std::pair<double, double> unprojected_drift(Level const& level)
{
    StepConfig config;
    config.theta = 0.1;
    config.conservative = false;
    Solver const solver(Domain::full_space(), SpatialGrid::homogeneous(), level.grid, level.kernel, level.sphere,
                        config);
    SolverState state = solver.initial_state(double_bump(level.grid));
    MomentSet const m0 = global_invariants(state, solver.spatial(), level.grid);
    solver.step(state);
    MomentSet const m1 = global_invariants(state, solver.spatial(), level.grid);
    return {std::abs(m1.mass - m0.mass) / m0.mass, std::abs(m1.energy - m0.energy) / m0.energy};
}

std::pair<double, double> const& coarse_drift()
{
    static auto const d = unprojected_drift(coarse_level());
    return d;
}

std::pair<double, double> const& fine_drift()
{
    static auto const d = unprojected_drift(fine_level());
    return d;
}

double refinement_order(double coarse, double fine)
{
    double const h0 = coarse_level().grid.spacing();
    double const h1 = fine_level().grid.spacing();
    return std::log(coarse / fine) / std::log(h0 / h1);
}

//---------------------------------------------------------------------------//
// Criteria
//---------------------------------------------------------------------------//

Outcome maximum_principle()
{
    auto const& run = reference_run();
    bool const ok = run.steps == 100 && run.min_before_clamp >= -1e-10 && run.max_before_clamp <= 1.0 + 1e-10
                    && run.max_clamp_defect <= 1e-10;
    return {ok, "100 steps: min before clamp " + num(run.min_before_clamp) + ", max " + num(run.max_before_clamp)
                    + ", max clamp defect " + num(run.max_clamp_defect)};
}

Outcome conservation(bool mass)
{
    auto const& run = reference_run();
    double const on = mass ? run.max_mass_drift : run.max_energy_drift;
    double const d0 = mass ? coarse_drift().first : coarse_drift().second;
    double const d1 = mass ? fine_drift().first : fine_drift().second;
    double const order = refinement_order(d0, d1);
    bool const ok = on <= 1e-11 && d1 < d0 && order >= 1.0;
    return {ok, "projection on: drift " + num(on) + " over 100 steps; off: one-step drift " + num(d0) + " (21^3, "
                    + coarse_level().sphere.name() + ") -> " + num(d1) + " (31^3, " + fine_level().sphere.name()
                    + "), order " + num(order)};
}

Outcome collision_symmetry()
{
    Level const& level = coarse_level();
    CollisionOperator const op(level.grid, level.kernel, level.sphere);
    std::mt19937_64 rng(77);
    double projected = 0.0;
    for (int k = 0; k < 20; ++k)
        projected = std::max(projected, relative_q_defect(op.evaluate(random_field(level.grid.size(), rng), true),
                                                          level.grid));
    double const raw0 = relative_q_defect(op.evaluate(double_bump(level.grid), false), level.grid);
    Level const& fine = fine_level();
    CollisionOperator const op1(fine.grid, fine.kernel, fine.sphere);
    double const raw1 = relative_q_defect(op1.evaluate(double_bump(fine.grid), false), fine.grid);
    double const order = refinement_order(raw0, raw1);
    bool const ok = projected <= 1e-13 && order >= 1.0;
    return {ok, "projected defect " + num(projected) + " (20 random fields); raw defect " + num(raw0) + " -> "
                    + num(raw1) + ", order " + num(order)};
}

Outcome equilibrium_annihilation()
{
    Level const& level = coarse_level();
    CollisionOperator const op(level.grid, level.kernel, level.sphere);
    std::vector<double> f(level.grid.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 1.0 / (1.0 + std::exp(norm2(level.grid.node(i))));
    auto const q = op.evaluate(f, false);
    double worst = 0.0;
    for (double x : q)
        worst = std::max(worst, std::abs(x));
    double const B = op.l1_norm();
    return {worst <= 1e-10 * B, "max |Q| = " + num(worst) + ", B = " + num(B)};
}

Outcome bound_chain()
{
    Level const& level = coarse_level();
    CollisionOperator const op(level.grid, level.kernel, level.sphere);
    double const B = op.l1_norm();
    std::mt19937_64 rng(4242);
    double lower = inf, upper = inf;
    for (int k = 0; k < 20; ++k)
    {
        auto const f = random_field(level.grid.size(), rng);
        auto const q = op.evaluate(f, false);
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            lower = std::min(lower, q[i] + B * f[i] + 1e-10 * B);
            upper = std::min(upper, B * (1.0 - f[i]) + 1e-10 * B - q[i]);
        }
    }
    return {lower >= 0.0 && upper >= 0.0,
            "20 random fields: min slack lower " + num(lower) + ", upper " + num(upper)};
}

Outcome picard_contraction()
{
    auto const& run = reference_run();
    bool const bounded = run.max_ratio <= 0.6 && run.max_iterations <= 12;

    Level const& level = coarse_level();
    StepConfig config;
    config.theta = 1.0;  // theta * 4B = 4
    Solver const solver(Domain::full_space(), SpatialGrid::homogeneous(), level.grid, level.kernel, level.sphere,
                        config);
    std::mt19937_64 rng(99);
    SolverState state = solver.initial_state(random_field(level.grid.size(), rng));
    std::string raised = "none";
    try
    {
        solver.step(state);
    }
    catch (NonContractionError const& e)
    {
        raised = "NonContractionError";
    }
    return {bounded && raised == "NonContractionError",
            "theta*4B = 0.4: max ratio " + num(run.max_ratio) + ", max iterations "
                + std::to_string(run.max_iterations) + "; theta*4B = 4: " + raised};
}

PhaseState random_phase(Domain const& domain, std::mt19937_64& rng, double speed)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PhaseState s;
    if (std::holds_alternative<Ball>(domain.shape()))
    {
        do
            s.x = Vec3{u(rng), u(rng), u(rng)};
        while (norm2(s.x) >= 1.0);
    }
    else
    {
        s.x = Vec3{u(rng), u(rng), 0.5 * (1.0 + u(rng))};
    }
    s.v = speed * Vec3{u(rng), u(rng), u(rng)};
    return s;
}

struct TrajectoryStats
{
    double position = 0.0;
    double velocity = 0.0;
    double speed = 0.0;
    std::size_t reflections = 0;
};

TrajectoryStats const& trajectory_stats()
{
    static std::optional<TrajectoryStats> cached;
    if (cached)
        return *cached;
    TrajectoryStats st;
    std::mt19937_64 rng(8);
    for (Domain const& domain : {Domain::ball({}, 1.0), Domain::slab({0, 0, 1}, 0.0, 1.0)})
        for (int k = 0; k < 1000; ++k)
        {
            PhaseState const s = random_phase(domain, rng, 2.0);
            Flight const a = advance(domain, s, 0.7);
            Flight const b = advance(domain, a.state, 0.7);
            Flight const direct = advance(domain, s, 1.4);
            st.position = std::max(st.position, norm(b.state.x - direct.state.x));
            st.velocity = std::max(st.velocity, norm(b.state.v - direct.state.v));
            double const v = norm(s.v);
            for (Vec3 const& w : {a.state.v, b.state.v, direct.state.v})
                st.speed = std::max(st.speed, std::abs(norm(w) - v) / v);
            st.reflections += direct.log.reflection_count;
        }
    cached = st;
    return *cached;
}

Outcome group_property()
{
    auto const& st = trajectory_stats();
    return {st.position <= 1e-9 && st.velocity <= 1e-9,
            "2000 states (ball, slab), " + std::to_string(st.reflections) + " reflections: max position gap "
                + num(st.position) + ", velocity gap " + num(st.velocity)};
}

// Octant of a point: bit k set when coordinate k is positive.
int octant(Vec3 const& x)
{
    return (x.x > 0) + 2 * (x.y > 0) + 4 * (x.z > 0);
}

Outcome measure_preservation()
{
    Domain const ball = Domain::ball({}, 1.0);
    double const t = 0.7;
    long const n = 1000000;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto in_ball = [&](std::mt19937_64& rng, double radius) {
        Vec3 x;
        do
            x = Vec3{u(rng), u(rng), u(rng)};
        while (norm2(x) >= 1.0);
        return radius * x;
    };
    auto cell = [](PhaseState const& s) { return 8 * octant(s.x) + octant(s.v); };

    // (a) invariant phase set Ball x {|v| < 1}: the image is uniform, all 64 cells equally likely
    std::vector<long> counts(64, 0);
    std::mt19937_64 rng(2718);
    for (long k = 0; k < n; ++k)
    {
        PhaseState const s{in_ball(rng, 1.0), in_ball(rng, 1.0)};
        counts[cell(advance(ball, s, t, default_reflection_cap, false).state)]++;
    }
    double const p = 1.0 / 64.0;
    double const sd = std::sqrt(n * p * (1.0 - p));
    double z_ball = 0.0;
    for (long c : counts)
        z_ball = std::max(z_ball, std::abs(c - n * p) / sd);

    // (b) Ball x [-1, 1]^3 pushed forward, against an independent sample of the image set:
    // uniform points of Ball x {|v| < sqrt 3} kept when Psi^{-t} lands in Ball x [-1, 1]^3
    std::vector<long> pushed(64, 0), image(64, 0);
    long n_image = 0;
    std::mt19937_64 rng_a(31415), rng_b(16180);
    for (long k = 0; k < n; ++k)
    {
        PhaseState const s{in_ball(rng_a, 1.0), Vec3{u(rng_a), u(rng_a), u(rng_a)}};
        pushed[cell(advance(ball, s, t, default_reflection_cap, false).state)]++;
    }
    while (n_image < n)
    {
        PhaseState const y{in_ball(rng_b, 1.0), in_ball(rng_b, std::sqrt(3.0))};
        PhaseState const back = backtrace(ball, y, t);
        if (std::abs(back.v.x) <= 1.0 && std::abs(back.v.y) <= 1.0 && std::abs(back.v.z) <= 1.0)
        {
            image[cell(y)]++;
            ++n_image;
        }
    }
    double z_cube = 0.0;
    double z_uniform = 0.0;
    for (int c = 0; c < 64; ++c)
    {
        double const pa = double(pushed[c]) / n;
        double const pb = double(image[c]) / n_image;
        double const pooled = double(pushed[c] + image[c]) / (n + n_image);
        z_cube = std::max(z_cube, std::abs(pa - pb) / std::sqrt(pooled * (1 - pooled) * (1.0 / n + 1.0 / n_image)));
        z_uniform = std::max(z_uniform, std::abs(pushed[c] - n * p) / sd);
    }
    return {z_ball <= 4.0 && z_cube <= 4.0,
            "1e6 samples, t = 0.7, 8x8 octant cells: Ball x velocity ball max |z| = " + num(z_ball)
                + "; Ball x [-1,1]^3 vs image-set sample max |z| = " + num(z_cube)
                + " (against a uniform model: " + num(z_uniform) + ", the cube is not invariant)"};
}

Outcome speed_preservation()
{
    auto const& st = trajectory_stats();
    return {st.speed <= 1e-12, "max | |V| - |v| | / |v| = " + num(st.speed)};
}

Outcome duhamel()
{
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    auto g = [](PhaseState const& s) { return std::cos(2.0 * s.x.z) * std::exp(-0.5 * norm2(s.v)) + 0.3 * s.x.x; };
    SourceFunction const h = [g](double t, PhaseState const& s) { return std::sin(t) * g(s); };
    PhaseFunction const f0 = [](PhaseState const& s) { return 0.5 + 0.2 * std::sin(3.0 * s.x.z) * s.v.y; };
    std::mt19937_64 rng(5);
    std::vector<PhaseState> samples;
    for (int k = 0; k < 40; ++k)
        samples.push_back(random_phase(slab, rng, 1.5));
    DuhamelStudy const study = verify_duhamel(h, f0, slab, 2.0, samples, {0.04, 0.02, 0.01, 0.005});
    bool ok = study.orders.size() == 3 && study.checked_points > 0;
    std::string detail = std::to_string(study.checked_points) + " points, residuals";
    for (double r : study.residuals)
        detail += " " + num(r);
    detail += ", orders";
    for (double o : study.orders)
    {
        ok = ok && o >= 1.7 && o <= 2.3;
        detail += " " + num(o);
    }
    return {ok, detail};
}

// Smooth f0 for the ball transport checks. It depends on v only through |v|
// and the angular momentum x × v, so f0(x, v) = f0(x, Rv) on the sphere and
// the exact solution stays continuous.
double ball_profile(PhaseState const& s)
{
    Vec3 const x0{0.3, -0.2, 0.1};
    Vec3 const l0{0.2, -0.3, 0.4};
    Vec3 const l{s.x.y * s.v.z - s.x.z * s.v.y, s.x.z * s.v.x - s.x.x * s.v.z, s.x.x * s.v.y - s.x.y * s.v.x};
    return 0.9 * std::exp(-norm2(s.x - x0) / 0.6 - norm2(s.v)) * (0.5 + 0.5 * std::exp(-norm2(l - l0) / 0.5));
}

Outcome transport_exactness()
{
    Domain const ball = Domain::ball({}, 1.0);
    double const theta = 0.05;

    // interpolation-free: ten theta backtraces versus one of 10 theta, at random phase points
    std::mt19937_64 rng(11);
    double composed = 0.0;
    for (int k = 0; k < 1000; ++k)
    {
        PhaseState s = random_phase(ball, rng, 2.0);
        PhaseState const direct = backtrace(ball, s, 10 * theta);
        PhaseState stepped = s;
        for (int j = 0; j < 10; ++j)
            stepped = backtrace(ball, stepped, theta);
        composed = std::max(composed, std::abs(ball_profile(stepped) - ball_profile(direct)));
    }
    // homogeneous grid: transport is the identity
    VelocityGrid const vg(3.0, 9);
    StepConfig config;
    config.theta = theta;
    Solver const hom(ball, SpatialGrid::homogeneous(), vg, CollisionKernel::zero(), SphereQuadrature::lebedev(6),
                     config);
    std::vector<double> f0(vg.size());
    for (std::size_t i = 0; i < f0.size(); ++i)
        f0[i] = ball_profile({{}, vg.node(i)});
    SolverState const h_end = hom.run(hom.initial_state(f0), 10);
    double identity = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i)
        identity = std::max(identity, std::abs(h_end.field[i] - f0[i]));

    // gridded ball: spatial and velocity interpolation error under refinement
    std::vector<double> errors;
    std::string levels;
    for (auto [cells, nodes] : {std::pair{8, 9}, std::pair{12, 13}, std::pair{16, 17}})
    {
        VelocityGrid const grid(3.0, nodes);
        SpatialGrid const spatial = SpatialGrid::ball(ball, cells);
        Solver const solver(ball, spatial, grid, CollisionKernel::zero(), SphereQuadrature::lebedev(6), config);
        std::size_t const nv = grid.size();
        std::vector<double> init(spatial.size() * nv);
        for (std::size_t c = 0; c < spatial.size(); ++c)
            for (std::size_t i = 0; i < nv; ++i)
                init[c * nv + i] = ball_profile({spatial.center(c), grid.node(i)});
        SolverState const end = solver.run(solver.initial_state(init), 10);
        double err = 0.0;
        double l1 = 0.0;
        for (std::size_t c = 0; c < spatial.size(); ++c)
            for (std::size_t i = 0; i < nv; ++i)
            {
                double const exact = ball_profile(backtrace(ball, {spatial.center(c), grid.node(i)}, 10 * theta));
                double const e = std::abs(end.field[c * nv + i] - exact);
                err = std::max(err, e);
                l1 += e * spatial.volume(c) * grid.weight();
            }
        errors.push_back(err);
        levels += " " + std::to_string(cells) + "^3/" + std::to_string(nodes) + "^3: max " + num(err) + " L1 " + num(l1);
    }
    bool const monotone = errors[0] > errors[1] && errors[1] > errors[2];
    return {composed <= 1e-9 && identity <= 1e-9 && monotone,
            "interpolation-free: composed vs single backtrace " + num(composed) + ", homogeneous grid " + num(identity)
                + "; gridded ball max error" + levels};
}

// Line1D slab transport run storing every state.
std::vector<SolverState> slab_history(double theta, double t_final, VelocityGrid const& grid,
                                      Domain const& slab, SpatialGrid const& spatial)
{
    StepConfig config;
    config.theta = theta;
    Solver const solver(slab, spatial, grid, CollisionKernel::zero(), SphereQuadrature::lebedev(6), config);
    InitialSpec spec;
    spec.profile = CallSpec{"double_bump", {}, {}};
    spec.shift = Vec3{0.4, 0.1, 0.8};
    spec.modulation = 0.5;
    std::vector<SolverState> history{solver.initial_state(build_initial(spec, spatial, grid, 0))};
    int const steps = static_cast<int>(std::lround(t_final / theta));
    StepSink const keep = [&](SolverState const& s, StepReport const&) { history.push_back(s); };
    solver.run(history.front(), static_cast<std::size_t>(steps), {keep});
    return history;
}

Outcome local_conservation()
{
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    VelocityGrid const grid(3.0, 11);
    double const t_final = 1.0;
    TestFunction const phi =
        TestFunction::polynomial_bump(0.2, 0.8, Vec3{0, 0, 0.5}, Vec3{inf, inf, 0.3});
    CutoffFunction const cutoff(1.5);
    std::vector<double> residuals, orders;
    std::string detail = "slab transport, mass residual";
    for (auto [cells, theta] : {std::pair{10, 0.1}, std::pair{20, 0.05}, std::pair{40, 0.025}, std::pair{80, 0.0125}})
    {
        SpatialGrid const spatial = SpatialGrid::line(slab, cells);
        auto const history = slab_history(theta, t_final, grid, slab, spatial);
        double const r = weak_conservation_residual(history, slab, spatial, grid, nullptr, false, phi, cutoff,
                                                    ConservedQuantity::Mass);
        residuals.push_back(r);
        detail += " " + num(r);
    }
    bool ok = true;
    detail += ", orders";
    for (std::size_t k = 0; k + 1 < residuals.size(); ++k)
    {
        double const o = std::log2(residuals[k] / residuals[k + 1]);
        ok = ok && o >= 1.0;
        detail += " " + num(o);
    }

    // homogeneous cross-check: residual against the global moment series
    Level const& level = coarse_level();
    StepConfig config;
    config.theta = 0.1;
    config.conservative = false;
    Solver const solver(Domain::full_space(), SpatialGrid::homogeneous(), level.grid, level.kernel, level.sphere,
                        config);
    std::mt19937_64 rng(123);
    std::vector<SolverState> history{solver.initial_state(random_field(level.grid.size(), rng))};
    StepSink const keep = [&](SolverState const& s, StepReport const&) { history.push_back(s); };
    solver.run(history.front(), 20, {keep});
    TestFunction const flat = TestFunction::polynomial_bump(0.2, 1.8, Vec3{}, Vec3{inf, inf, inf});
    double const weak = weak_conservation_residual(history, solver.domain(), solver.spatial(), level.grid,
                                                   &solver.collision(), false, flat, std::nullopt,
                                                   ConservedQuantity::Mass);
    // series form: trapezoid of phi' (M_n - M_0) + phi Q_M(n); phi' integrates to zero over its support
    double const m0 = global_invariants(history.front(), solver.spatial(), level.grid).mass;
    std::vector<double> terms;
    for (auto const& s : history)
    {
        double const m = global_invariants(s, solver.spatial(), level.grid).mass;
        double const qm = q_moment_defect(solver.collision().evaluate(s.field, false), level.grid).mass;
        terms.push_back(flat.time_derivative(s.time, {}) * (m - m0) + flat.value(s.time, {}) * qm);
    }
    double series = 0.0;
    double phi_prime = 0.0;
    for (std::size_t n = 0; n + 1 < history.size(); ++n)
    {
        double const dt = history[n + 1].time - history[n].time;
        series += 0.5 * dt * (terms[n] + terms[n + 1]);
        phi_prime += 0.5 * dt
                     * (flat.time_derivative(history[n].time, {}) + flat.time_derivative(history[n + 1].time, {}));
    }
    series = std::abs(series + phi_prime * m0);
    double const gap = std::abs(weak - series) / m0;
    ok = ok && gap <= 1e-12;
    detail += "; homogeneous cross-check: weak " + num(weak) + " vs moment series " + num(series)
              + ", relative gap " + num(gap);
    return {ok, detail};
}

Outcome boundary_tangency_check()
{
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    VelocityGrid const grid(4.0, 11);
    SphereQuadrature const sphere = SphereQuadrature::lebedev(14);
    SpatialGrid const spatial = SpatialGrid::line(slab, 8);
    StepConfig config;
    config.theta = 0.05;
    CollisionKernel const kernel = unit_kernel(grid, sphere);
    Solver const solver(slab, spatial, grid, kernel, sphere, config);

    // even in v, varying across the slab
    InitialSpec spec;
    spec.profile = CallSpec{"double_bump", {0.7, 1.0, 0.7, 1.0}, {}};
    spec.shift = Vec3{0.5, 0.3, 0.9};
    spec.modulation = 0.4;
    SolverState state = solver.initial_state(build_initial(spec, spatial, grid, 0));
    double wall = boundary_tangency(state, slab, spatial, grid);
    double layer = boundary_layer_momentum(state, slab, spatial, grid);
    StepSink const sink = [&](SolverState const& s, StepReport const&) {
        wall = std::max(wall, boundary_tangency(s, slab, spatial, grid));
        layer = std::max(layer, boundary_layer_momentum(s, slab, spatial, grid));
    };
    solver.run(state, 20, {sink});
    return {wall <= 1e-10, "20 steps with collisions: wall trace max |n.p| / (mass speed) = " + num(wall)
                               + "; wall-cell averages (reported) " + num(layer)};
}

Outcome dispersion_monitor()
{
    Domain const ball = Domain::ball({}, 1.0);
    VelocityGrid const grid(3.0, 9);
    SpatialGrid const spatial = SpatialGrid::ball(ball, 8);
    StepConfig config;
    config.theta = 0.05;
    Solver const solver(ball, spatial, grid, CollisionKernel::zero(), SphereQuadrature::lebedev(6), config);
    std::size_t const nv = grid.size();
    std::vector<double> init(spatial.size() * nv);
    for (std::size_t c = 0; c < spatial.size(); ++c)
        for (std::size_t i = 0; i < nv; ++i)
            init[c * nv + i] = ball_profile({spatial.center(c), grid.node(i)});
    auto const in_k = [](Vec3 const& x) { return norm(x) <= 0.5; };

    // running trapezoid integral of int_K int |v|^3 f
    std::vector<double> times{0.0}, integral{0.0};
    SolverState state = solver.initial_state(init);
    double prev = cubed_velocity_moment(state, spatial, grid, in_k);
    StepSink const sink = [&](SolverState const& s, StepReport const&) {
        double const now = cubed_velocity_moment(s, spatial, grid, in_k);
        integral.push_back(integral.back() + 0.5 * config.theta * (prev + now));
        times.push_back(s.time);
        prev = now;
    };
    solver.run(state, 160, {sink});  // T = 8

    auto slope = [&](double t_end) {
        // least-squares slope of the running integral on [0, t_end]
        double st = 0, si = 0, stt = 0, sti = 0;
        int n = 0;
        for (std::size_t k = 0; k < times.size() && times[k] <= t_end + 1e-12; ++k, ++n)
        {
            st += times[k];
            si += integral[k];
            stt += times[k] * times[k];
            sti += times[k] * integral[k];
        }
        return (n * sti - st * si) / (n * stt - st * st);
    };
    double const s4 = slope(4.0);
    double const s8 = slope(8.0);
    double const change = std::abs(s8 - s4) / std::abs(s4);
    bool const finite = std::all_of(integral.begin(), integral.end(), [](double x) { return std::isfinite(x); });
    return {finite && change <= 0.2, "running integral at T = 4: " + num(integral[80]) + ", T = 8: "
                                         + num(integral.back()) + "; fitted slope " + num(s4) + " -> " + num(s8)
                                         + " (change " + num(100 * change) + "%)"};
}

}  // namespace

int main(int argc, char** argv)
{
    std::map<int, std::pair<std::string, std::function<Outcome()>>> const criteria = {
        {1, {"maximum principle", maximum_principle}},
        {2, {"global mass conservation", [] { return conservation(true); }}},
        {3, {"global energy conservation", [] { return conservation(false); }}},
        {4, {"collision symmetry", collision_symmetry}},
        {5, {"equilibrium annihilation", equilibrium_annihilation}},
        {6, {"bound chain", bound_chain}},
        {7, {"Picard contraction", picard_contraction}},
        {8, {"trajectory group property", group_property}},
        {9, {"measure preservation", measure_preservation}},
        {10, {"speed preservation", speed_preservation}},
        {11, {"Duhamel characterization", duhamel}},
        {12, {"transport exactness", transport_exactness}},
        {13, {"local conservation", local_conservation}},
        {14, {"boundary tangency", boundary_tangency_check}},
        {15, {"dispersion monitor", dispersion_monitor}},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k)
        selected.insert(std::atoi(argv[k]));

    int failures = 0;
    for (auto const& [id, entry] : criteria)
    {
        if (!selected.empty() && !selected.count(id))
            continue;
        auto const started = std::chrono::steady_clock::now();
        Outcome out;
        try
        {
            out = entry.second();
        }
        catch (std::exception const& e)
        {
            out = {false, std::string("exception: ") + e.what()};
        }
        double const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("[%s] %2d %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, entry.first.c_str(),
                    out.detail.c_str(), seconds);
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
