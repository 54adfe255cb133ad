#include "fermikin/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "fermikin/error.hpp"

namespace fermikin
{
namespace
{

constexpr char const* magic = "FERMIKIN-SNAPSHOT 1";

std::uint64_t to_little(std::uint64_t x)
{
    if constexpr (std::endian::native == std::endian::big)
        return __builtin_bswap64(x);
    return x;
}

template<class T>
T header_value(std::istream& in, std::string const& name, std::string const& path)
{
    std::string line;
    if (!std::getline(in, line))
        throw ShapeMismatchError(path + ": truncated header, expected '" + name + "'");
    std::istringstream ls(line);
    std::string key;
    T value{};
    if (!(ls >> key >> value) || key != name)
        throw ShapeMismatchError(path + ": malformed header line '" + line + "', expected '" + name + "'");
    return value;
}

}  // namespace

void write_snapshot(std::string const& path,
                    SolverState const& state,
                    std::size_t spatial_cells,
                    VelocityGrid const& grid)
{
    if (state.field.size() != spatial_cells * grid.size())
        throw ShapeMismatchError("snapshot field has " + std::to_string(state.field.size()) + " values, expected "
                                 + std::to_string(spatial_cells * grid.size()));
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write snapshot '" + path + "'");
    char v_max[32], time[32];
    std::snprintf(v_max, sizeof v_max, "%.17g", grid.v_max());
    std::snprintf(time, sizeof time, "%.17g", state.time);
    out << magic << '\n'
        << "spatial_cells " << spatial_cells << '\n'
        << "nodes_per_axis " << grid.nodes_per_axis() << '\n'
        << "v_max " << v_max << '\n'
        << "time " << time << '\n'
        << "step " << state.step_count << '\n'
        << "end_header\n";
    std::vector<std::uint64_t> raw(state.field.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = to_little(std::bit_cast<std::uint64_t>(state.field[i]));
    out.write(reinterpret_cast<char const*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
    if (!out)
        throw IoError("failed writing snapshot '" + path + "'");
}

Snapshot read_snapshot(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read snapshot '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line != magic)
        throw ShapeMismatchError(path + ": not a snapshot file");
    Snapshot snap;
    snap.spatial_cells = header_value<std::size_t>(in, "spatial_cells", path);
    snap.nodes_per_axis = header_value<int>(in, "nodes_per_axis", path);
    snap.v_max = header_value<double>(in, "v_max", path);
    snap.state.time = header_value<double>(in, "time", path);
    snap.state.step_count = header_value<std::size_t>(in, "step", path);
    std::getline(in, line);
    if (line != "end_header")
        throw ShapeMismatchError(path + ": missing end_header");
    if (snap.nodes_per_axis < 1 || snap.spatial_cells < 1)
        throw ShapeMismatchError(path + ": empty grid in header");

    std::size_t const n = snap.spatial_cells * static_cast<std::size_t>(snap.nodes_per_axis)
                          * snap.nodes_per_axis * snap.nodes_per_axis;
    std::vector<std::uint64_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 8));
    if (in.gcount() != static_cast<std::streamsize>(n * 8))
        throw ShapeMismatchError(path + ": data shorter than the header promises");
    if (in.peek() != std::char_traits<char>::eof())
        throw ShapeMismatchError(path + ": trailing data after the field");
    snap.state.field.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        snap.state.field[i] = std::bit_cast<double>(to_little(raw[i]));
    return snap;
}

std::vector<double> build_initial(InitialSpec const& spec,
                                  SpatialGrid const& spatial,
                                  VelocityGrid const& grid,
                                  std::uint64_t seed)
{
    auto const& p = spec.profile;
    std::size_t const nv = grid.size();
    std::size_t const nc = spatial.size();
    std::vector<double> field(nc * nv);

    if (p.name == "file")
    {
        Snapshot snap = read_snapshot(p.path);
        if (snap.spatial_cells != nc || snap.nodes_per_axis != grid.nodes_per_axis() || snap.v_max != grid.v_max())
            throw ShapeMismatchError(p.path + ": snapshot grid (" + std::to_string(snap.spatial_cells) + " cells, "
                                     + std::to_string(snap.nodes_per_axis) + "^3 nodes) does not match the run ("
                                     + std::to_string(nc) + " cells, " + std::to_string(grid.nodes_per_axis())
                                     + "^3 nodes) or v_max differs");
        for (double x : snap.state.field)
            if (!(x >= 0.0 && x <= 1.0))
                throw InvalidValueError(p.path + ": snapshot value outside [0, 1]");
        field = std::move(snap.state.field);
    }
    else if (p.name == "random")
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(p.args.at(0), p.args.at(1));
        for (double& x : field)
            x = std::min(u(rng), p.args[1]);
    }
    else
    {
        std::vector<double> slice(nv);
        for (std::size_t i = 0; i < nv; ++i)
        {
            Vec3 const v = grid.node(i);
            double x = 0.0;
            if (p.name == "constant")
            {
                x = p.args.at(0);
            }
            else if (p.name == "fermi_dirac")
            {
                // 1 / (1 + e^z) without overflow
                double const z = p.args.at(0) + p.args.at(1) * norm2(v);
                x = z > 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
            }
            else if (p.name == "double_bump")
            {
                std::array<double, 4> a{0.8, 1.5, 0.6, 2.0};
                if (p.args.size() == 4)
                    std::copy(p.args.begin(), p.args.end(), a.begin());
                x = std::min(1.0, a[0] * std::exp(-norm2(v - spec.shift) / a[1])
                                      + a[2] * std::exp(-norm2(v + spec.shift) / a[3]));
            }
            else
            {
                throw ValidationError("initial.profile", "initial.profile: unknown profile '" + p.name + "'");
            }
            slice[i] = x;
        }
        for (std::size_t c = 0; c < nc; ++c)
            std::copy(slice.begin(), slice.end(), field.begin() + static_cast<std::ptrdiff_t>(c * nv));
    }

    if (spec.modulation != 0.0)
    {
        if (spatial.kind() != SpatialKind::Line1D)
            throw ValidationError("initial.modulation", "initial.modulation: spatial modulation needs a line grid");
        double const length = spatial.high() - spatial.low();
        for (std::size_t c = 0; c < nc; ++c)
        {
            double const x = spatial.center(c)[spatial.axis()];
            double const factor = (1.0 + spec.modulation * std::cos(2.0 * std::numbers::pi * (x - spatial.low()) / length))
                                  / (1.0 + std::abs(spec.modulation));
            for (std::size_t i = 0; i < nv; ++i)
                field[c * nv + i] *= factor;
        }
    }

    for (double x : field)
        if (!(x >= 0.0 && x <= 1.0))
            throw InvalidValueError("initial data left [0, 1]");
    return field;
}

}  // namespace fermikin
