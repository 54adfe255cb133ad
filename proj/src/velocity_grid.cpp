#include "fermikin/velocity_grid.hpp"

#include <string>

#include "fermikin/error.hpp"

namespace fermikin
{

VelocityGrid::VelocityGrid(double v_max, int nodes_per_axis)
    : v_max_(v_max), n_(nodes_per_axis), h_(2.0 * v_max / nodes_per_axis)
{
    if (!(v_max > 0.0))
        throw ValidationError("velocity.v_max", "v_max must be positive");
    if (nodes_per_axis < 1 || nodes_per_axis % 2 == 0)
        throw ValidationError("velocity.nodes_per_axis",
                              "nodes_per_axis must be an odd positive integer, got "
                                  + std::to_string(nodes_per_axis));
}

}  // namespace fermikin
