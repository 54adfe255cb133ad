#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "fermikin/config.hpp"
#include "fermikin/error.hpp"
#include "fermikin/io.hpp"

using namespace fermikin;

namespace
{

std::filesystem::path scratch(std::string const& name)
{
    auto const dir = std::filesystem::temp_directory_path() / "fermikin_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string const slab_text = R"(
# a slab run
[domain]
shape = slab
axis = 0, 0, 1
low = 0
high = 1

[space]
kind = line
cells = 12

[velocity]
v_max = 4
nodes = 9

[collision]
kernel = constant(1.5, 0.3)
target_norm = 0.5
sphere = product(4, 6)
conservative = false

[time]
theta = 0.05
steps = 7

[initial]
profile = double_bump(0.7, 1.1, 0.5, 1.9)
shift = 0.4, 0.1, 0.8
modulation = 0.25

[output]
directory = /tmp/x
snapshot_stride = 3

[diagnostics]
weak_residual = true
cutoff_radius = 1.5

[run]
seed = 99
)";

}  // namespace

TEST_CASE("empty config gives the defaults")
{
    RunConfig const c = parse_config_text("");
    CHECK(c == RunConfig{});
    CHECK(c.space.kind == "homogeneous");
    CHECK(c.velocity.nodes == 21);
    CHECK(c.time.theta == 0.1);
    CHECK(c.collision.target_norm == 1.0);
    CHECK_NOTHROW(validate(c));
    RunConfig const raw = parse_config_text("[collision]\ntarget_norm = none\n");
    CHECK_FALSE(raw.collision.target_norm);
    CHECK(parse_config_text(serialize_config(raw)) == raw);
}

TEST_CASE("parse and round trip")
{
    RunConfig const c = parse_config_text(slab_text);
    CHECK(c.domain.shape == "slab");
    CHECK(c.space.cells == 12);
    CHECK(c.collision.kernel == CallSpec{"constant", {1.5, 0.3}, {}});
    CHECK(c.collision.target_norm == 0.5);
    CHECK(c.collision.sphere == CallSpec{"product", {4, 6}, {}});
    CHECK_FALSE(c.collision.conservative);
    CHECK(c.initial.shift == Vec3{0.4, 0.1, 0.8});
    CHECK(c.diagnostics.weak_residual);
    CHECK(c.seed == 99);

    RunConfig const again = parse_config_text(serialize_config(c));
    CHECK(again == c);
    CHECK(serialize_config(again) == serialize_config(c));

    RunConfig odd;
    odd.time.theta = 0.1 + 1e-17 * 3;
    odd.velocity.v_max = std::nextafter(6.0, 7.0);
    CHECK(parse_config_text(serialize_config(odd)) == odd);
}

TEST_CASE("unknown key names the nearest known key")
{
    try
    {
        parse_config_text("[time]\ntheat = 0.1\n");
        FAIL("no error");
    }
    catch (ParseError const& e)
    {
        std::string const what = e.what();
        CHECK(what.find("theat") != std::string::npos);
        CHECK(what.find("theta") != std::string::npos);
        CHECK(what.find(":2:") != std::string::npos);
    }
    CHECK(nearest_key("nodez", {"nodes", "v_max"}) == "nodes");
    CHECK(nearest_key("zzzzzzzz", {"nodes", "v_max"}).empty());
}

TEST_CASE("malformed lines")
{
    CHECK_THROWS_AS(parse_config_text("[time]\ntheta 0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[nowhere]\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[time]\nsteps = many\n"), ParseError);
}

TEST_CASE("contraction bound is validated")
{
    RunConfig c;
    c.velocity.nodes = 9;
    c.velocity.v_max = 4;
    c.time.theta = 0.5;  // theta * 4B = 2
    try
    {
        build_setup(c);
        FAIL("no error");
    }
    catch (ValidationError const& e)
    {
        CHECK(e.constraint() == "contraction_bound");
        CHECK(std::string(e.what()).find("contraction") != std::string::npos);
    }
    c.time.theta = 0.1;
    RunSetup const s = build_setup(c);
    CHECK(s.l1_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("other validation failures")
{
    RunConfig c;
    c.velocity.nodes = 8;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = RunConfig{};
    c.space.kind = "plane";
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = parse_config_text(slab_text);
    c.diagnostics.cutoff_radius = 3.0;  // 2R > v_max
    CHECK_THROWS_AS(validate(c), ValidationError);
}

TEST_CASE("initial data")
{
    VelocityGrid const grid(3.0, 7);
    SpatialGrid const one = SpatialGrid::homogeneous();
    InitialSpec spec;
    spec.profile = CallSpec{"constant", {0.5}, {}};
    for (double x : build_initial(spec, one, grid, 0))
        CHECK(x == 0.5);

    spec.profile = CallSpec{"fermi_dirac", {0.0, 1.0}, {}};
    auto const fd = build_initial(spec, one, grid, 0);
    for (std::size_t i = 0; i < fd.size(); ++i)
    {
        CHECK(fd[i] == doctest::Approx(1.0 / (1.0 + std::exp(norm2(grid.node(i))))).epsilon(1e-15));
        CHECK(fd[i] > 0.0);
        CHECK(fd[i] < 1.0);
    }

    spec.profile = CallSpec{"random", {0.2, 0.6}, {}};
    auto const r1 = build_initial(spec, one, grid, 5);
    auto const r2 = build_initial(spec, one, grid, 5);
    CHECK(r1 == r2);
    CHECK(r1 != build_initial(spec, one, grid, 6));
    for (double x : r1)
        CHECK((x >= 0.2 && x <= 0.6));

    spec.profile = CallSpec{"constant", {1.5}, {}};
    CHECK_THROWS_AS(build_initial(spec, one, grid, 0), InvalidValueError);
}

TEST_CASE("snapshot round trip is bitwise")
{
    VelocityGrid const grid(3.0, 5);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    SolverState state{1.2345678901234567, 42, std::vector<double>(3 * grid.size())};
    for (double& x : state.field)
        x = u(rng);
    state.field[0] = 0.0;
    state.field[1] = 1.0;
    state.field[2] = std::nextafter(1.0, 0.0);
    auto const path = scratch("snap.bin");
    write_snapshot(path.string(), state, 3, grid);
    Snapshot const back = read_snapshot(path.string());
    CHECK(back.spatial_cells == 3);
    CHECK(back.nodes_per_axis == 5);
    CHECK(back.v_max == 3.0);
    CHECK(back.state.time == state.time);
    CHECK(back.state.step_count == 42);
    CHECK(back.state.field == state.field);

    // reload as initial data
    Domain const slab = Domain::slab({0, 0, 1}, 0.0, 1.0);
    InitialSpec spec;
    spec.profile = CallSpec{"file", {}, path.string()};
    CHECK(build_initial(spec, SpatialGrid::line(slab, 3), grid, 0) == state.field);
    CHECK_THROWS_AS(build_initial(spec, SpatialGrid::line(slab, 4), grid, 0), ShapeMismatchError);

    CHECK_THROWS_AS(write_snapshot(path.string(), state, 2, grid), ShapeMismatchError);
    CHECK_THROWS_AS(read_snapshot(scratch("missing.bin").string()), IoError);
}
