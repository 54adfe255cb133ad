#include "fermikin/spatial_grid.hpp"

#include <cmath>
#include <sstream>

#include "fermikin/error.hpp"

namespace fermikin
{

int coordinate_axis(Vec3 const& axis)
{
    for (int k = 0; k < 3; ++k)
    {
        Vec3 e;
        e[k] = 1.0;
        if (std::abs(std::abs(dot(axis, e)) - 1.0) < 1e-12)
            return k;
    }
    return -1;
}

SpatialGrid SpatialGrid::homogeneous()
{
    SpatialGrid g;
    g.centers_ = {Vec3{}};
    g.volumes_ = {1.0};
    return g;
}

SpatialGrid SpatialGrid::line(Domain const& domain, int n_cells)
{
    auto const* slab = std::get_if<Slab>(&domain.shape());
    if (!slab)
        throw ValidationError("space.kind", "a bounded line grid needs a slab domain");
    int const axis = coordinate_axis(slab->axis);
    if (axis < 0)
        throw ValidationError("domain.axis", "line grids need the slab axis along a coordinate axis");
    // slab bounds are measured along slab->axis, which may point down the coordinate axis
    double const sign = slab->axis[axis];
    double lo = sign * slab->low;
    double hi = sign * slab->high;
    if (lo > hi)
        std::swap(lo, hi);
    SpatialGrid g = periodic_line(axis, lo, hi, n_cells);
    g.periodic_ = false;
    return g;
}

SpatialGrid SpatialGrid::periodic_line(int axis, double low, double high, int n_cells)
{
    if (axis < 0 || axis > 2)
        throw ValidationError("space.axis", "line axis must be 0, 1 or 2");
    if (n_cells < 2)
        throw ValidationError("space.cells", "line grid needs at least 2 cells");
    if (!(high > low))
        throw ValidationError("space.extent", "line extent must have low < high");
    SpatialGrid g;
    g.kind_ = SpatialKind::Line1D;
    g.axis_ = axis;
    g.low_ = low;
    g.high_ = high;
    g.dx_ = (high - low) / n_cells;
    g.periodic_ = true;
    for (int i = 0; i < n_cells; ++i)
    {
        Vec3 x;
        x[axis] = low + (i + 0.5) * g.dx_;
        g.centers_.push_back(x);
        g.volumes_.push_back(g.dx_);
    }
    return g;
}

SpatialGrid SpatialGrid::ball(Domain const& domain, int cells_per_axis)
{
    auto const* b = std::get_if<Ball>(&domain.shape());
    if (!b)
        throw ValidationError("space.kind", "a ball grid needs a ball domain");
    if (cells_per_axis < 2)
        throw ValidationError("space.cells", "ball grid needs at least 2 cells per axis");
    SpatialGrid g;
    g.kind_ = SpatialKind::Ball3D;
    g.n_ = cells_per_axis;
    g.dx_ = 2.0 * b->radius / cells_per_axis;
    g.origin_ = b->center - Vec3{b->radius, b->radius, b->radius};
    g.cube_to_cell_.assign(static_cast<std::size_t>(cells_per_axis) * cells_per_axis * cells_per_axis, -1);
    double const vol = g.dx_ * g.dx_ * g.dx_;
    std::size_t flat = 0;
    for (int k = 0; k < cells_per_axis; ++k)
        for (int j = 0; j < cells_per_axis; ++j)
            for (int i = 0; i < cells_per_axis; ++i, ++flat)
            {
                Vec3 const x = g.origin_ + g.dx_ * Vec3{i + 0.5, j + 0.5, k + 0.5};
                if (norm(x - b->center) < b->radius)
                {
                    g.cube_to_cell_[flat] = static_cast<int>(g.centers_.size());
                    g.centers_.push_back(x);
                    g.volumes_.push_back(vol);
                }
            }
    if (g.centers_.empty())
        throw ValidationError("space.cells", "ball grid keeps no cells");
    return g;
}

int SpatialGrid::retained_index(std::array<int, 3> const& cube) const
{
    for (int k = 0; k < 3; ++k)
        if (cube[k] < 0 || cube[k] >= n_)
            return -1;
    return cube_to_cell_[static_cast<std::size_t>(cube[0])
                         + static_cast<std::size_t>(n_) * (cube[1] + static_cast<std::size_t>(n_) * cube[2])];
}

std::string SpatialGrid::describe() const
{
    std::ostringstream os;
    switch (kind_)
    {
        case SpatialKind::Homogeneous:
            os << "homogeneous";
            break;
        case SpatialKind::Line1D:
            os << (periodic_ ? "periodic line" : "line") << " axis " << axis_ << " [" << low_ << ", "
               << high_ << "] with " << size() << " cells";
            break;
        case SpatialKind::Ball3D:
            os << "ball " << n_ << "^3 cube, " << size() << " cells retained";
            break;
    }
    return os.str();
}

}  // namespace fermikin
