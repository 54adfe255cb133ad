#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "fermikin/vec3.hpp"

namespace fermikin
{

using Index3 = std::array<int, 3>;

/*!
 * Uniform cell-centred Cartesian grid on [-v_max, v_max]^3.
 *
 * The number of nodes per axis is odd so the node set is symmetric under
 * v -> -v and contains v = 0. Flat indices run x fastest.
 */
class VelocityGrid
{
  public:
    VelocityGrid(double v_max, int nodes_per_axis);

    double v_max() const { return v_max_; }
    int nodes_per_axis() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
    double spacing() const { return h_; }
    //! Quadrature weight of every node (cell volume).
    double weight() const { return h_ * h_ * h_; }

    double coordinate(int i) const { return -v_max_ + (i + 0.5) * h_; }
    Vec3 node(Index3 const& i) const { return {coordinate(i[0]), coordinate(i[1]), coordinate(i[2])}; }
    Vec3 node(std::size_t flat) const { return node(unflatten(flat)); }

    std::size_t flatten(Index3 const& i) const
    {
        return static_cast<std::size_t>(i[0])
               + static_cast<std::size_t>(n_) * (static_cast<std::size_t>(i[1])
                                                 + static_cast<std::size_t>(n_) * i[2]);
    }
    Index3 unflatten(std::size_t flat) const
    {
        int const x = static_cast<int>(flat % n_);
        int const y = static_cast<int>((flat / n_) % n_);
        int const z = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
        return {x, y, z};
    }
    bool in_range(Index3 const& i) const
    {
        return i[0] >= 0 && i[0] < n_ && i[1] >= 0 && i[1] < n_ && i[2] >= 0 && i[2] < n_;
    }
    //! Flat index of the node mirrored through v = 0.
    std::size_t mirror(std::size_t flat) const { return size() - 1 - flat; }

    //! Continuous index coordinate of a velocity component (node i sits at i).
    double index_coordinate(double v) const { return (v + v_max_) / h_ - 0.5; }

    bool inside_box(Vec3 const& v) const
    {
        return std::abs(v.x) <= v_max_ && std::abs(v.y) <= v_max_ && std::abs(v.z) <= v_max_;
    }

  private:
    double v_max_;
    int n_;
    double h_;
};

}  // namespace fermikin
