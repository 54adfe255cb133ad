#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fermikin/collision.hpp"
#include "fermikin/geometry.hpp"
#include "fermikin/solver.hpp"
#include "fermikin/spatial_grid.hpp"
#include "fermikin/velocity_grid.hpp"

namespace fermikin
{

struct MomentSet
{
    double mass = 0.0;
    Vec3 momentum;
    double energy = 0.0;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct FluxSet
{
    Vec3 mass_flux;
    Matrix3 momentum_flux{};
    Vec3 energy_flux;
};

/*!
 * Smooth velocity cutoff: 1 for |v| <= R, 0 for |v| >= 2R, and
 * 1 - s^3 (10 - 15 s + 6 s^2) with s = (|v| - R) / R in between.
 */
class CutoffFunction
{
  public:
    explicit CutoffFunction(double r_inner);

    double r_inner() const { return r_; }
    double r_outer() const { return 2.0 * r_; }
    double operator()(double speed) const;
    double operator()(Vec3 const& v) const { return (*this)(norm(v)); }

  private:
    double r_;
};

/*!
 * Test function phi(t, x) with compact support in time and space.
 *
 * The spatial part is a product over axes; an axis with infinite radius
 * contributes the factor 1 (use this for directions in which the field is
 * uniform).
 */
struct TestFunction
{
    std::function<double(double, Vec3 const&)> value;
    std::function<double(double, Vec3 const&)> time_derivative;
    std::function<Vec3(double, Vec3 const&)> gradient;
    double t_begin = 0.0;
    double t_end = 0.0;
    Vec3 center;
    Vec3 radius;

    //! (1 - u^2)^4 bumps in t and in each finite-radius axis.
    static TestFunction polynomial_bump(double t_begin, double t_end, Vec3 center, Vec3 radius);
};

enum class ConservedQuantity
{
    Mass,
    Momentum,
    Energy,
};

MomentSet cell_moments(std::span<double const> f,
                       VelocityGrid const& grid,
                       std::optional<CutoffFunction> const& cutoff = std::nullopt);

FluxSet cell_fluxes(std::span<double const> f,
                    VelocityGrid const& grid,
                    std::optional<CutoffFunction> const& cutoff = std::nullopt);

//! Volume-weighted totals over all cells.
MomentSet global_invariants(SolverState const& state, SpatialGrid const& spatial, VelocityGrid const& grid);

//! Discrete (mass, momentum, energy) moments of Q.
MomentSet q_moment_defect(std::span<double const> q, VelocityGrid const& grid);

/*!
 * Largest moment of Q relative to the same moment of |Q|:
 * max(|int Q| / int |Q|, |int v Q| / int |v||Q|, |int |v|^2 Q| / int |v|^2 |Q|).
 */
double relative_q_defect(std::span<double const> q, VelocityGrid const& grid);

/*!
 * |int dt phi M + grad phi . F + phi Q_M dt dx| for the chosen conserved
 * quantity, with velocity cutoff applied to the densities, fluxes and
 * collision moments. Time uses the trapezoid rule over the stored history,
 * space the cell sum. For momentum the largest component is returned.
 *
 * `collision` may be null (no collision term). Throws SupportViolationError
 * if phi's support reaches t = 0, the end of the history, or the boundary.
 */
double weak_conservation_residual(std::vector<SolverState> const& history,
                                  Domain const& domain,
                                  SpatialGrid const& spatial,
                                  VelocityGrid const& grid,
                                  CollisionOperator const* collision,
                                  bool conservative,
                                  TestFunction const& phi,
                                  std::optional<CutoffFunction> const& cutoff,
                                  ConservedQuantity which);

/*!
 * max over wall cells of |n . int v f_wall dv| / (mass * rms speed).
 *
 * Line1D slabs use the wall value the transport step itself sees: the mean
 * of the first cell and its mirrored ghost, f_wall(v) = (f(c, v) + f(c, Rv)) / 2.
 * Ball grids use the cells that have a masked neighbour.
 */
double boundary_tangency(SolverState const& state,
                         Domain const& domain,
                         SpatialGrid const& spatial,
                         VelocityGrid const& grid);

//! Same ratio evaluated on the wall-adjacent cell averages themselves.
double boundary_layer_momentum(SolverState const& state,
                               Domain const& domain,
                               SpatialGrid const& spatial,
                               VelocityGrid const& grid);

//! int_K int |v|^3 f dv dx over cells whose centre satisfies `in_k`.
double cubed_velocity_moment(SolverState const& state,
                             SpatialGrid const& spatial,
                             VelocityGrid const& grid,
                             std::function<bool(Vec3 const&)> const& in_k);

}  // namespace fermikin
