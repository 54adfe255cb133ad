#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "fermikin/diagnostics.hpp"
#include "fermikin/error.hpp"

using namespace fermikin;

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

std::size_t node_at(VelocityGrid const& grid, Index3 const& i)
{
    return grid.flatten(i);
}

// node(mirror(i)) is -node(i) only up to rounding; copy so the data are exactly even
void make_even(std::vector<double>& f, VelocityGrid const& grid, std::size_t offset = 0)
{
    for (std::size_t i = 0; i < grid.size(); ++i)
        f[offset + grid.mirror(i)] = f[offset + std::min(i, grid.mirror(i))];
}

}  // namespace

TEST_CASE("cell moments")
{
    VelocityGrid const grid(2.0, 5);
    std::vector<double> const one(grid.size(), 1.0);
    MomentSet const m = cell_moments(one, grid);
    CHECK(m.mass == doctest::Approx(64.0).epsilon(1e-14));
    CHECK(m.momentum == Vec3{});

    std::vector<double> even(grid.size());
    for (std::size_t i = 0; i < even.size(); ++i)
        even[i] = std::exp(-norm2(grid.node(i))) * (1 + 0.1 * grid.node(i).x * grid.node(i).x);
    make_even(even, grid);
    CHECK(cell_moments(even, grid).momentum == Vec3{});

    std::vector<double> single(grid.size(), 0.0);
    std::size_t const k = node_at(grid, {4, 1, 2});
    single[k] = 1.0;
    Vec3 const v0 = grid.node(k);
    MomentSet const s = cell_moments(single, grid);
    CHECK(s.mass == doctest::Approx(grid.weight()));
    CHECK(norm(s.momentum - grid.weight() * v0) <= 1e-15);
    CHECK(s.energy == doctest::Approx(grid.weight() * norm2(v0)));
}

TEST_CASE("cell fluxes")
{
    VelocityGrid const grid(2.0, 5);
    std::vector<double> even(grid.size());
    for (std::size_t i = 0; i < even.size(); ++i)
        even[i] = std::exp(-norm2(grid.node(i)));
    make_even(even, grid);
    FluxSet const fe = cell_fluxes(even, grid);
    CHECK(norm(fe.mass_flux) <= 1e-15);
    CHECK(norm(fe.energy_flux) <= 1e-15);

    // f = 1: the midpoint rule of int v1^2 over the cube, with the midpoint sum of 1D squares
    std::vector<double> const one(grid.size(), 1.0);
    FluxSet const f1 = cell_fluxes(one, grid);
    double s2 = 0;
    for (int i = 0; i < grid.nodes_per_axis(); ++i)
        s2 += grid.coordinate(i) * grid.coordinate(i);
    double const expected = s2 * grid.spacing() * 16.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK(f1.momentum_flux[a][b] == doctest::Approx(a == b ? expected : 0.0).scale(1).epsilon(1e-13));
    // and the closed form (2V)^3 V^2 / 3 up to the midpoint error (2V)^2 h^2 / 12 * 2V
    CHECK(expected == doctest::Approx(64.0 * 4.0 / 3.0 - 16.0 * grid.spacing() * grid.spacing() / 12.0 * 4.0));

    std::vector<double> single(grid.size(), 0.0);
    std::size_t const k = node_at(grid, {0, 3, 1});
    single[k] = 1.0;
    Vec3 const v0 = grid.node(k);
    FluxSet const fs = cell_fluxes(single, grid);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK(fs.momentum_flux[a][b] == doctest::Approx(grid.weight() * v0[a] * v0[b]));
}

TEST_CASE("global invariants")
{
    VelocityGrid const grid(2.0, 5);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> cell(grid.size());
    for (double& x : cell)
        x = u(rng);
    SolverState one{0.0, 0, cell};
    MomentSet const a = global_invariants(one, SpatialGrid::homogeneous(), grid);
    MomentSet const c = cell_moments(cell, grid);
    CHECK(a.mass == c.mass);
    CHECK(a.energy == c.energy);

    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    SpatialGrid const two = SpatialGrid::line(slab, 2);
    SolverState pair{0.0, 0, cell};
    pair.field.insert(pair.field.end(), cell.begin(), cell.end());
    MomentSet const p = global_invariants(pair, two, grid);
    CHECK(p.mass == doctest::Approx(c.mass));  // two cells of volume 1/2
}

TEST_CASE("q moment defect")
{
    VelocityGrid const grid(2.0, 5);
    std::vector<double> const zero(grid.size(), 0.0);
    MomentSet const d = q_moment_defect(zero, grid);
    CHECK(d.mass == 0.0);
    CHECK(d.momentum == Vec3{});
    CHECK(d.energy == 0.0);
}

TEST_CASE("cutoff function")
{
    CutoffFunction const psi(1.5);
    CHECK(psi(0.0) == 1.0);
    CHECK(psi(1.5) == 1.0);
    CHECK(psi(3.0) == 0.0);
    CHECK(psi(4.0) == 0.0);
    CHECK(psi(2.25) == doctest::Approx(0.5));
    double prev = 1.0;
    for (double s = 1.5; s <= 3.0; s += 0.01)
    {
        CHECK(psi(s) <= prev + 1e-15);
        prev = psi(s);
    }
}

TEST_CASE("weak residual of a constant field")
{
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    VelocityGrid const grid(3.0, 7);
    SpatialGrid const spatial = SpatialGrid::line(slab, 40);
    std::vector<SolverState> history;
    for (int n = 0; n <= 40; ++n)
        history.push_back({0.025 * n, static_cast<std::size_t>(n),
                           std::vector<double>(spatial.size() * grid.size(), 0.3)});
    TestFunction const phi = TestFunction::polynomial_bump(0.2, 0.8, {0, 0, 0.5}, {inf, inf, 0.3});
    for (auto which : {ConservedQuantity::Mass, ConservedQuantity::Momentum, ConservedQuantity::Energy})
        CHECK(weak_conservation_residual(history, slab, spatial, grid, nullptr, false, phi, CutoffFunction(1.5), which)
              <= 1e-12);

    TestFunction const late = TestFunction::polynomial_bump(0.5, 1.2, {0, 0, 0.5}, {inf, inf, 0.3});
    CHECK_THROWS_AS(weak_conservation_residual(history, slab, spatial, grid, nullptr, false, late, std::nullopt,
                                               ConservedQuantity::Mass),
                    SupportViolationError);
    TestFunction const wide = TestFunction::polynomial_bump(0.2, 0.8, {0, 0, 0.5}, {inf, inf, 0.6});
    CHECK_THROWS_AS(weak_conservation_residual(history, slab, spatial, grid, nullptr, false, wide, std::nullopt,
                                               ConservedQuantity::Mass),
                    SupportViolationError);
}

TEST_CASE("boundary tangency of v-even data")
{
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    VelocityGrid const grid(3.0, 7);
    SpatialGrid const spatial = SpatialGrid::line(slab, 8);
    SolverState state;
    for (std::size_t c = 0; c < spatial.size(); ++c)
        for (std::size_t i = 0; i < grid.size(); ++i)
            state.field.push_back((0.5 + 0.4 * spatial.center(c).z) * std::exp(-norm2(grid.node(i))));
    for (std::size_t c = 0; c < spatial.size(); ++c)
        make_even(state.field, grid, c * grid.size());
    CHECK(boundary_tangency(state, slab, spatial, grid) == 0.0);
}

TEST_CASE("cubed velocity moment")
{
    VelocityGrid const grid(2.0, 5);
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    SpatialGrid const spatial = SpatialGrid::line(slab, 4);
    auto const all = [](Vec3 const&) { return true; };
    SolverState zero{0.0, 0, std::vector<double>(spatial.size() * grid.size(), 0.0)};
    CHECK(cubed_velocity_moment(zero, spatial, grid, all) == 0.0);

    SolverState single = zero;
    std::size_t const k = grid.flatten({1, 4, 2});
    single.field[2 * grid.size() + k] = 1.0;
    double const expected = spatial.volume(2) * grid.weight() * std::pow(norm(grid.node(k)), 3);
    CHECK(cubed_velocity_moment(single, spatial, grid, all) == doctest::Approx(expected));
    auto const low = [](Vec3 const& x) { return x.z < 0.5; };
    CHECK(cubed_velocity_moment(single, spatial, grid, low) == 0.0);
}

TEST_CASE("moments are linear")
{
    VelocityGrid const grid(2.0, 5);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> a(grid.size()), b(grid.size()), c(grid.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        a[i] = u(rng);
        b[i] = u(rng);
        c[i] = 0.3 * a[i] + 0.7 * b[i];
    }
    MomentSet const ma = cell_moments(a, grid), mb = cell_moments(b, grid), mc = cell_moments(c, grid);
    CHECK(mc.mass == doctest::Approx(0.3 * ma.mass + 0.7 * mb.mass).epsilon(1e-13));
    CHECK(mc.energy == doctest::Approx(0.3 * ma.energy + 0.7 * mb.energy).epsilon(1e-13));
    CHECK(norm(mc.momentum - (0.3 * ma.momentum + 0.7 * mb.momentum)) <= 1e-13);
}
