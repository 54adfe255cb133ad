#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fermikin/config.hpp"
#include "fermikin/solver.hpp"

namespace fermikin
{

/*!
 * Snapshot file: a text header
 *
 *   FERMIKIN-SNAPSHOT 1
 *   spatial_cells <n>
 *   nodes_per_axis <n>
 *   v_max <x>
 *   time <t>
 *   step <k>
 *   end_header
 *
 * followed by little-endian float64 values, cell-major over
 * (spatial cell, velocity node).
 */
struct Snapshot
{
    std::size_t spatial_cells = 0;
    int nodes_per_axis = 0;
    double v_max = 0.0;
    SolverState state;
};

void write_snapshot(std::string const& path, SolverState const& state, std::size_t spatial_cells, VelocityGrid const& grid);
Snapshot read_snapshot(std::string const& path);

/*!
 * Initial field for a run. Analytic profiles land in [0, 1] without
 * clamping; file data must match the grids and lie in [0, 1].
 *
 * - constant(c)
 * - fermi_dirac(a, b): 1 / (1 + exp(a + b |v|^2))
 * - double_bump(p1, w1, p2, w2): min(1, p1 exp(-|v - u|^2 / w1) + p2 exp(-|v + u|^2 / w2)),
 *   u = shift; defaults (0.8, 1.5, 0.6, 2)
 * - random(lo, hi): independent uniform values from the seed
 * - file(path): a snapshot
 *
 * A nonzero modulation multiplies line-grid data by
 * (1 + m cos(2 pi (x - low) / L)) / (1 + |m|).
 */
std::vector<double> build_initial(InitialSpec const& spec,
                                  SpatialGrid const& spatial,
                                  VelocityGrid const& grid,
                                  std::uint64_t seed);

}  // namespace fermikin
