#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "fermikin/geometry.hpp"

namespace fermikin
{

enum class SpatialKind
{
    Homogeneous,
    Line1D,
    Ball3D,
};

/*!
 * Cells carrying one velocity slice each.
 *
 * - Homogeneous: a single point of unit volume; transport is the identity.
 * - Line1D: cells along one coordinate axis. The field is uniform in the
 *   other two coordinates. On a slab the cells fill [low, high]; in full
 *   space the line is periodic over the configured extent.
 * - Ball3D: a cube of n^3 cells around a ball, keeping cells whose centre is
 *   inside.
 */
class SpatialGrid
{
  public:
    static SpatialGrid homogeneous();
    //! Slab domain: cells across the slab. The slab axis must be a coordinate axis.
    static SpatialGrid line(Domain const& domain, int n_cells);
    //! Full space: periodic line along coordinate `axis` over [low, high].
    static SpatialGrid periodic_line(int axis, double low, double high, int n_cells);
    static SpatialGrid ball(Domain const& domain, int cells_per_axis);

    SpatialKind kind() const { return kind_; }
    std::size_t size() const { return centers_.size(); }
    Vec3 const& center(std::size_t c) const { return centers_[c]; }
    double volume(std::size_t c) const { return volumes_[c]; }
    std::vector<Vec3> const& centers() const { return centers_; }

    //! Line1D: axis index, extent and spacing.
    int axis() const { return axis_; }
    double low() const { return low_; }
    double high() const { return high_; }
    double spacing() const { return dx_; }
    bool periodic() const { return periodic_; }

    //! Ball3D: cells per cube axis and the retained index of a cube cell (-1 if masked).
    int cells_per_axis() const { return n_; }
    int retained_index(std::array<int, 3> const& cube) const;
    Vec3 const& cube_origin() const { return origin_; }

    std::string describe() const;

  private:
    SpatialGrid() = default;

    SpatialKind kind_ = SpatialKind::Homogeneous;
    std::vector<Vec3> centers_;
    std::vector<double> volumes_;
    int axis_ = 0;
    double low_ = 0.0;
    double high_ = 1.0;
    double dx_ = 1.0;
    bool periodic_ = false;
    int n_ = 1;
    Vec3 origin_;
    std::vector<int> cube_to_cell_;
};

//! Index (0, 1, 2) of a unit vector along a coordinate axis, or -1.
int coordinate_axis(Vec3 const& axis);

}  // namespace fermikin
