#include "fermikin/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <json.hpp>

#include "fermikin/error.hpp"
#include "fermikin/io.hpp"
#include "fermikin/parallel.hpp"

namespace fermikin
{
namespace
{

namespace fs = std::filesystem;

std::ofstream open_output(fs::path const& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Vec3 domain_centre(RunSetup const& setup)
{
    auto const& shape = setup.domain.shape();
    if (auto const* b = std::get_if<Ball>(&shape))
        return b->center;
    if (setup.spatial.kind() == SpatialKind::Line1D)
    {
        Vec3 c;
        c[setup.spatial.axis()] = 0.5 * (setup.spatial.low() + setup.spatial.high());
        return c;
    }
    return {};
}

// Fraction of f on the outermost layer of velocity nodes.
double edge_mass_fraction(std::vector<double> const& field, VelocityGrid const& grid)
{
    int const n = grid.nodes_per_axis();
    double edge = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < field.size(); ++k)
    {
        Index3 const i = grid.unflatten(k % grid.size());
        bool const outer = std::any_of(i.begin(), i.end(), [n](int j) { return j == 0 || j == n - 1; });
        total += field[k];
        if (outer)
            edge += field[k];
    }
    return total > 0 ? edge / total : 0.0;
}

TestFunction default_test_function(RunSetup const& setup, double t_final)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 radius{inf, inf, inf};
    Vec3 const centre = domain_centre(setup);
    if (setup.spatial.kind() == SpatialKind::Line1D)
        radius[setup.spatial.axis()] = 0.4 * (setup.spatial.high() - setup.spatial.low());
    else if (auto const* b = std::get_if<Ball>(&setup.domain.shape()); b && setup.spatial.kind() == SpatialKind::Ball3D)
        radius = Vec3{0.5, 0.5, 0.5} * b->radius;
    return TestFunction::polynomial_bump(0.1 * t_final, 0.9 * t_final, centre, radius);
}

}  // namespace

std::function<bool(Vec3 const&)> monitor_region(RunSetup const& setup, double radius)
{
    if (setup.spatial.kind() == SpatialKind::Homogeneous)
        return [](Vec3 const&) { return true; };
    Vec3 const centre = domain_centre(setup);
    return [centre, radius](Vec3 const& x) { return norm(x - centre) <= radius; };
}

RunSummary run_simulation(RunConfig const& config, std::string const& directory, std::ostream* log)
{
    RunSetup setup = build_setup(config);
    Solver solver(setup.domain, setup.spatial, setup.velocity, setup.kernel, setup.sphere, setup.step);
    SolverState state = solver.initial_state(build_initial(config.initial, setup.spatial, setup.velocity, config.seed));
    double const edge_fraction = edge_mass_fraction(state.field, setup.velocity);

    fs::path const dir(directory);
    fs::create_directories(dir / "snapshots");
    std::size_t const nv = setup.velocity.size();
    auto const region = monitor_region(setup, config.diagnostics.region_radius);
    int const stride = config.output.snapshot_stride;
    double const t_final = config.time.steps * config.time.theta;

    auto snapshot = [&](SolverState const& s) {
        char name[48];
        std::snprintf(name, sizeof name, "step_%06zu.bin", s.step_count);
        write_snapshot((dir / "snapshots" / name).string(), s, setup.spatial.size(), setup.velocity);
    };

    auto moments = open_output(dir / "moments.csv");
    moments << "t,mass,px,py,pz,energy,v3_moment,clamp_defect,q_defect_mass,q_defect_energy\n";
    auto steps = open_output(dir / "steps.csv");
    steps << "step,iterations,last_ratio,clamp_defect,max_ratio,min_before_clamp,max_before_clamp\n";

    auto write_moments = [&](SolverState const& s, double clamp, double q_mass, double q_energy) {
        MomentSet const m = global_invariants(s, setup.spatial, setup.velocity);
        double const v3 = cubed_velocity_moment(s, setup.spatial, setup.velocity, region);
        moments << fmt(s.time) << ',' << fmt(m.mass) << ',' << fmt(m.momentum.x) << ',' << fmt(m.momentum.y) << ','
                << fmt(m.momentum.z) << ',' << fmt(m.energy) << ',' << fmt(v3) << ',' << fmt(clamp) << ','
                << fmt(q_mass) << ',' << fmt(q_energy) << '\n';
        return m;
    };

    RunSummary summary;
    summary.l1_norm = setup.l1_norm;
    {
        double q_mass = 0.0, q_energy = 0.0;
        if (!solver.collision().trivial())
        {
            auto const q = solver.collision_field(state.field);
            for (std::size_t c = 0; c < setup.spatial.size(); ++c)
            {
                MomentSet const m = q_moment_defect(std::span<double const>(q).subspan(c * nv, nv), setup.velocity);
                q_mass += setup.spatial.volume(c) * m.mass;
                q_energy += setup.spatial.volume(c) * m.energy;
            }
        }
        summary.initial = write_moments(state, 0.0, q_mass, q_energy);
    }
    snapshot(state);

    std::vector<SolverState> history;
    bool const weak = config.diagnostics.weak_residual && config.time.steps > 0;
    if (weak)
        history.push_back(state);

    auto const started = std::chrono::steady_clock::now();
    StepSink const sink = [&](SolverState const& s, StepReport const& r) {
        double const max_ratio = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
        steps << s.step_count << ',' << r.iterations << ',' << fmt(r.last_ratio) << ',' << fmt(r.clamp_defect) << ','
              << fmt(max_ratio) << ',' << fmt(r.min_before_clamp) << ',' << fmt(r.max_before_clamp) << '\n';
        MomentSet const m = write_moments(s, r.clamp_defect, r.q_mass, r.q_energy);
        summary.max_clamp_defect = std::max(summary.max_clamp_defect, r.clamp_defect);
        summary.max_ratio = std::max(summary.max_ratio, max_ratio);
        summary.max_iterations = std::max(summary.max_iterations, r.iterations);
        if (summary.initial.mass > 0)
            summary.max_mass_drift = std::max(summary.max_mass_drift,
                                              std::abs(m.mass - summary.initial.mass) / summary.initial.mass);
        if (summary.initial.energy > 0)
            summary.max_energy_drift = std::max(summary.max_energy_drift,
                                                std::abs(m.energy - summary.initial.energy) / summary.initial.energy);
        bool const last = s.step_count == static_cast<std::size_t>(config.time.steps);
        if (last || (stride > 0 && s.step_count % static_cast<std::size_t>(stride) == 0))
        {
            snapshot(s);
            if (weak)
                history.push_back(s);
        }
        if (log)
        {
            double const elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            *log << "step " << s.step_count << "/" << config.time.steps << "  t=" << s.time << "  iterations "
                 << r.iterations << "  mass " << m.mass << "  energy " << m.energy << "  (" << elapsed << " s)\n";
        }
    };
    state = solver.run(std::move(state), static_cast<std::size_t>(config.time.steps), {sink});
    summary.final_state = state;
    summary.final = global_invariants(state, setup.spatial, setup.velocity);

    nlohmann::json weak_json = nullptr;
    if (weak && history.size() >= 3)
    {
        TestFunction const phi = default_test_function(setup, t_final);
        CutoffFunction const cutoff(config.diagnostics.cutoff_radius);
        auto out = open_output(dir / "weak_residual.csv");
        out << "quantity,snapshot_stride,residual\n";
        weak_json = nlohmann::json::object();
        for (auto [name, which] : {std::pair{"mass", ConservedQuantity::Mass},
                                   std::pair{"momentum", ConservedQuantity::Momentum},
                                   std::pair{"energy", ConservedQuantity::Energy}})
        {
            double const r = weak_conservation_residual(history, setup.domain, setup.spatial, setup.velocity,
                                                        &solver.collision(), setup.step.conservative, phi, cutoff,
                                                        which);
            out << name << ',' << stride << ',' << fmt(r) << '\n';
            weak_json[name] = r;
        }
    }

    nlohmann::json meta;
    meta["config"] = serialize_config(config);
    meta["domain"] = setup.domain.describe();
    meta["spatial_grid"] = setup.spatial.describe();
    meta["velocity_grid"] = {{"v_max", setup.velocity.v_max()},
                             {"nodes_per_axis", setup.velocity.nodes_per_axis()},
                             {"initial_edge_mass_fraction", edge_fraction}};
    meta["kernel"] = {{"description", setup.kernel.description()}, {"l1_norm_B", setup.l1_norm}};
    meta["sphere"] = {{"name", setup.sphere.name()}, {"nodes", setup.sphere.size()}};
    meta["collision"] = {{"entries", solver.collision().entry_count()},
                         {"on_lattice_fraction", solver.collision().on_lattice_fraction()},
                         {"conservative", setup.step.conservative}};
    meta["theta_times_4B"] = setup.step.theta * 4.0 * setup.l1_norm;
    meta["steps"] = config.time.steps;
    meta["snapshot_stride"] = stride;
    meta["seed"] = config.seed;
    meta["threads"] = worker_count();
    meta["summary"] = {{"max_mass_drift", summary.max_mass_drift},
                       {"max_energy_drift", summary.max_energy_drift},
                       {"max_clamp_defect", summary.max_clamp_defect},
                       {"max_ratio", summary.max_ratio},
                       {"max_iterations", summary.max_iterations}};
    if (!weak_json.is_null())
        meta["weak_residual"] = weak_json;
    auto out = open_output(dir / "metadata.json");
    out << meta.dump(2) << '\n';
    return summary;
}

//---------------------------------------------------------------------------//
// Verify suite
//---------------------------------------------------------------------------//

namespace
{

CheckResult check(std::string name, bool ok, std::string detail)
{
    return {std::move(name), ok, std::move(detail)};
}

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v{n(rng), n(rng), n(rng)};
    return (1.0 / norm(v)) * v;
}

PhaseState random_state(Domain const& domain, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PhaseState s;
    auto const& shape = domain.shape();
    if (auto const* b = std::get_if<Ball>(&shape))
    {
        do
            s.x = Vec3{u(rng), u(rng), u(rng)};
        while (norm2(s.x) >= 1.0);
        s.x = b->center + b->radius * s.x;
    }
    else if (auto const* sl = std::get_if<Slab>(&shape))
    {
        s.x = Vec3{u(rng), u(rng), u(rng)};
        double const along = sl->low + 0.5 * (1.0 + u(rng)) * (sl->high - sl->low);
        s.x += (along - dot(s.x, sl->axis)) * sl->axis;
    }
    else
    {
        s.x = Vec3{u(rng), u(rng), u(rng)};
    }
    s.v = Vec3{u(rng), u(rng), u(rng)};
    return s;
}

}  // namespace

std::vector<CheckResult> run_verify_suite(RunConfig const& config, std::ostream* log)
{
    RunSetup setup = build_setup(config);
    std::vector<CheckResult> results;
    auto add = [&](CheckResult r) {
        if (log)
            *log << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
        results.push_back(std::move(r));
    };
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // reflection law
    {
        double worst = 0.0;
        for (int k = 0; k < 10000; ++k)
        {
            Vec3 const v{3 * u(rng), 3 * u(rng), 3 * u(rng)};
            Vec3 const n = random_unit(rng);
            Vec3 const r = reflect(v, n);
            double const scale = std::max(1.0, norm(v));
            worst = std::max({worst, norm(reflect(r, n) - v) / scale, std::abs(norm(r) - norm(v)) / scale,
                              std::abs(dot(r, n) + dot(v, n)) / scale});
        }
        add(check("reflection involution/isometry", worst <= 1e-14, "max error " + sci(worst)));
    }

    // trajectories in the configured domain
    {
        double group = 0.0, speed = 0.0;
        for (int k = 0; k < 1000; ++k)
        {
            PhaseState const s = random_state(setup.domain, rng);
            Flight const a = advance(setup.domain, s, 0.7);
            Flight const b = advance(setup.domain, a.state, 0.7);
            Flight const c = advance(setup.domain, s, 1.4);
            double const scale = std::max(1.0, setup.domain.length_scale());
            group = std::max({group, norm(b.state.x - c.state.x) / scale, norm(b.state.v - c.state.v)});
            speed = std::max(speed, std::abs(norm(c.state.v) - norm(s.v)) / norm(s.v));
        }
        add(check("trajectory group property", group <= 1e-9, "max deviation " + sci(group)));
        add(check("speed preservation", speed <= 1e-12, "max relative change " + sci(speed)));
    }

    // collision velocities
    {
        double worst = 0.0;
        for (int k = 0; k < 100000; ++k)
        {
            Vec3 const v{5 * u(rng), 5 * u(rng), 5 * u(rng)};
            Vec3 const w{5 * u(rng), 5 * u(rng), 5 * u(rng)};
            auto const [vp, wp] = post_collision_velocities(v, w, random_unit(rng));
            double const e = norm2(v) + norm2(w);
            worst = std::max({worst, norm(vp + wp - v - w) / std::max(1.0, norm(v) + norm(w)),
                              std::abs(norm2(vp) + norm2(wp) - e) / std::max(1.0, e)});
        }
        add(check("collision momentum/energy identities", worst <= 1e-13, "max relative error " + sci(worst)));
    }

    VelocityGrid const& grid = setup.velocity;
    std::size_t const nv = grid.size();
    double const B = setup.l1_norm;
    CollisionOperator const op(grid, setup.kernel, setup.sphere);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_field = [&] {
        std::vector<double> f(nv);
        for (double& x : f)
            x = unit(rng);
        return f;
    };

    // projection
    {
        double worst = 0.0;
        for (int k = 0; k < 5; ++k)
        {
            auto q = random_field();
            for (double& x : q)
                x -= 0.5;
            std::vector<double> const p = op.projector()(q);
            worst = std::max(worst, relative_q_defect(p, grid));
        }
        add(check("conservative projection moments", worst <= 1e-13, "max relative moment " + sci(worst)));
    }

    if (!op.trivial())
    {
        // annihilation
        double worst = 0.0;
        for (double c : {0.0, 0.3, 1.0})
        {
            std::vector<double> const f(nv, c);
            auto const q = op.evaluate(f, false);
            for (double x : q)
                worst = std::max(worst, std::abs(x));
        }
        add(check("annihilation on constants", worst == 0.0, "max |Q| " + sci(worst)));
        std::vector<double> fd(nv);
        for (std::size_t i = 0; i < nv; ++i)
            fd[i] = 1.0 / (1.0 + std::exp(norm2(grid.node(i))));
        auto const q = op.evaluate(fd, false);
        double fd_max = 0.0;
        for (double x : q)
            fd_max = std::max(fd_max, std::abs(x));
        add(check("annihilation on Fermi-Dirac profile", fd_max <= 1e-10 * B, "max |Q| / B " + sci(fd_max / B)));

        // bound chain and moment defect
        double slack = std::numeric_limits<double>::infinity();
        double defect = 0.0;
        for (int k = 0; k < 5; ++k)
        {
            auto const f = random_field();
            auto const raw = op.evaluate(f, false);
            auto const projected = op.evaluate(f, true);
            defect = std::max(defect, relative_q_defect(projected, grid));
            for (std::size_t i = 0; i < nv; ++i)
                slack = std::min({slack, raw[i] + B * f[i] + 1e-10 * B, B * (1.0 - f[i]) + 1e-10 * B - raw[i]});
        }
        add(check("bound chain -B f <= Q <= B (1 - f)", slack >= 0.0, "minimum slack " + sci(slack)));
        add(check("projected Q moment defect", defect <= 1e-13, "max relative moment " + sci(defect)));
    }

    // time stepping on the configured initial data
    {
        Solver solver(setup.domain, setup.spatial, setup.velocity, setup.kernel, setup.sphere, setup.step);
        SolverState state =
            solver.initial_state(build_initial(config.initial, setup.spatial, setup.velocity, config.seed));

        {
            SolverState a = state, b = state;
            solver.step(a, PicardGuess::Transported);
            solver.step(b, PicardGuess::DoubledTransported);
            double diff = 0.0;
            for (std::size_t k = 0; k < a.field.size(); ++k)
                diff = std::max(diff, std::abs(a.field[k] - b.field[k]));
            add(check("Picard uniqueness proxy", diff <= 10.0 * setup.step.picard_tol, "max difference " + sci(diff)));
        }

        MomentSet const m0 = global_invariants(state, setup.spatial, grid);
        double lo = 0.0, hi = 1.0, clamp = 0.0, ratio = 0.0, mass = 0.0, energy = 0.0;
        int iterations = 0;
        StepSink const sink = [&](SolverState const& s, StepReport const& r) {
            lo = std::min(lo, r.min_before_clamp);
            hi = std::max(hi, r.max_before_clamp);
            clamp = std::max(clamp, r.clamp_defect);
            for (double x : r.ratios)
                ratio = std::max(ratio, x);
            iterations = std::max(iterations, r.iterations);
            MomentSet const m = global_invariants(s, setup.spatial, grid);
            mass = std::max(mass, std::abs(m.mass - m0.mass) / m0.mass);
            energy = std::max(energy, std::abs(m.energy - m0.energy) / m0.energy);
            if (log && s.step_count % 10 == 0)
                *log << "  step " << s.step_count << "/" << config.time.steps << '\n';
        };
        solver.run(state, static_cast<std::size_t>(config.time.steps), {sink});
        add(check("maximum principle", lo >= -1e-10 && hi <= 1.0 + 1e-10 && clamp <= 1e-10,
                  "min " + sci(lo) + ", max " + sci(hi) + ", clamp defect " + sci(clamp)));
        double const safety = setup.step.contraction_safety;
        add(check("Picard contraction", ratio <= safety + 0.1,
                  "max ratio " + sci(ratio) + " (safety " + sci(safety) + "), max iterations "
                      + std::to_string(iterations)));
        if (setup.step.conservative && setup.spatial.kind() == SpatialKind::Homogeneous)
        {
            add(check("global mass conservation", mass <= 1e-11, "max relative drift " + sci(mass)));
            add(check("global energy conservation", energy <= 1e-11, "max relative drift " + sci(energy)));
        }
        else
        {
            add(check("global mass drift (reported)", true, "max relative drift " + sci(mass)));
            add(check("global energy drift (reported)", true, "max relative drift " + sci(energy)));
        }
    }
    return results;
}

}  // namespace fermikin
