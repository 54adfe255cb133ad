#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fermikin/geometry.hpp"
#include "fermikin/kernel.hpp"
#include "fermikin/solver.hpp"
#include "fermikin/spatial_grid.hpp"
#include "fermikin/sphere_quadrature.hpp"
#include "fermikin/velocity_grid.hpp"

namespace fermikin
{

//---------------------------------------------------------------------------//
/*!
 * Run configuration.
 *
 * Text format: `[section]` headers followed by `key = value` lines; `#` and
 * `;` start comments. Function-style values such as `constant(2, 1)` carry
 * their parameters inline. Every key has a default, so an empty file is a
 * valid homogeneous run.
 */
//---------------------------------------------------------------------------//

struct DomainSpec
{
    std::string shape = "full";  // full | ball | slab
    Vec3 center;
    double radius = 1.0;
    Vec3 axis{0, 0, 1};
    double low = 0.0;
    double high = 1.0;
    double period = 1.0;
    double tangent_tolerance = Domain::default_tangent_tolerance;

    bool operator==(DomainSpec const&) const = default;
};

struct SpaceSpec
{
    std::string kind = "homogeneous";  // homogeneous | line | ball
    int cells = 16;
    // periodic line in full space only
    int axis = 0;
    double low = 0.0;
    double high = 1.0;

    bool operator==(SpaceSpec const&) const = default;
};

struct VelocitySpec
{
    double v_max = 6.0;
    int nodes = 21;

    bool operator==(VelocitySpec const&) const = default;
};

//! A name plus numeric or path arguments, e.g. `product(8, 16)` or `file(a.bin)`.
struct CallSpec
{
    std::string name;
    std::vector<double> args;
    std::string path;

    bool operator==(CallSpec const&) const = default;
};

CallSpec parse_call(std::string const& text, std::string const& key);
std::string format_call(CallSpec const& call);

struct CollisionSpec
{
    CallSpec kernel{"constant", {2.0, 1.0}, {}};  // constant(radius, amplitude) | tabulated(path) | zero
    //! Rescale the kernel so the discrete B equals this value (`none` keeps it as given).
    std::optional<double> target_norm = 1.0;
    CallSpec sphere{"lebedev", {26.0}, {}};  // lebedev(n) | product(n_polar, n_azimuth)
    bool conservative = true;

    bool operator==(CollisionSpec const&) const = default;
};

struct TimeSpec
{
    double theta = 0.1;
    int steps = 100;
    double picard_tol = 1e-12;
    int picard_max_iter = 50;
    double contraction_safety = 0.5;

    bool operator==(TimeSpec const&) const = default;
};

struct InitialSpec
{
    //! constant(c) | fermi_dirac(a, b) | double_bump(p1, w1, p2, w2) | random(lo, hi) | file(path)
    CallSpec profile{"random", {0.0, 1.0}, {}};
    //! Bump centres are +shift and -shift.
    Vec3 shift{1.2, 0.4, -0.3};
    //! Relative amplitude of a cos modulation along the line axis (line grids).
    double modulation = 0.0;

    bool operator==(InitialSpec const&) const = default;
};

struct OutputSpec
{
    std::string directory = "out";
    int snapshot_stride = 10;

    bool operator==(OutputSpec const&) const = default;
};

struct DiagnosticsSpec
{
    bool weak_residual = false;
    double cutoff_radius = 3.0;
    //! Radius of the ball K for the |v|^3 monitor (centred on the domain centre).
    double region_radius = 0.5;

    bool operator==(DiagnosticsSpec const&) const = default;
};

struct RunConfig
{
    DomainSpec domain;
    SpaceSpec space;
    VelocitySpec velocity;
    CollisionSpec collision;
    TimeSpec time;
    InitialSpec initial;
    OutputSpec output;
    DiagnosticsSpec diagnostics;
    std::uint64_t seed = 1;

    bool operator==(RunConfig const&) const = default;
};

//! Parses text; syntax errors carry the line number, unknown keys a suggestion.
RunConfig parse_config_text(std::string const& text, std::string const& origin = "<text>");
//! parse_config_text on a file followed by validate().
RunConfig parse_config(std::string const& path);
//! Canonical text for a configuration; parsing it gives back an equal RunConfig.
std::string serialize_config(RunConfig const& config);

//! Objects built from a configuration.
struct RunSetup
{
    Domain domain;
    SpatialGrid spatial;
    VelocityGrid velocity;
    CollisionKernel kernel;
    SphereQuadrature sphere;
    StepConfig step;
    double l1_norm = 0.0;
};

/*!
 * Builds grids, kernel and quadrature and checks every cross-key constraint,
 * including theta * 4B <= contraction_safety. Throws ValidationError naming
 * the constraint.
 */
RunSetup build_setup(RunConfig const& config);
void validate(RunConfig const& config);

//! Closest known key (edit distance) for an unknown one, empty if nothing is near.
std::string nearest_key(std::string const& key, std::vector<std::string> const& known);

}  // namespace fermikin
