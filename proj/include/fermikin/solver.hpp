#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fermikin/collision.hpp"
#include "fermikin/geometry.hpp"
#include "fermikin/spatial_grid.hpp"
#include "fermikin/transport.hpp"
#include "fermikin/velocity_grid.hpp"

namespace fermikin
{

/*!
 * f at every (spatial cell, velocity node), cell-major: value (c, i) sits at
 * c * velocity_size + i.
 */
struct SolverState
{
    double time = 0.0;
    std::size_t step_count = 0;
    std::vector<double> field;
};

struct StepConfig
{
    double theta = 0.1;
    double picard_tol = 1e-12;
    int picard_max_iter = 50;
    double contraction_safety = 0.5;
    bool conservative = true;
    //! Reject theta * 4B > contraction_safety before iterating.
    bool enforce_step_bound = true;
};

enum class PicardGuess
{
    Transported,         // f_start carried along the characteristics
    DoubledTransported,  // clamp_bar(2 * transported f_start)
};

struct StepReport
{
    int iterations = 0;
    //! Sup-norm change of each iteration.
    std::vector<double> changes;
    //! changes[k] / changes[k - 1].
    std::vector<double> ratios;
    double last_ratio = 0.0;
    double clamp_defect = 0.0;
    double min_before_clamp = 0.0;
    double max_before_clamp = 0.0;
    //! Volume-weighted mass and energy moments of the last collision evaluation.
    double q_mass = 0.0;
    double q_energy = 0.0;
};

/*!
 * Semi-Lagrangian transport g -> g o Psi^{-theta} on a spatial x velocity grid.
 *
 * Each output value is a fixed linear combination of input values; the
 * coefficients are tabulated at construction for Line1D.
 *
 * - Line1D: the backtraced velocity is a grid node (reflection in a
 *   coordinate plane permutes nodes). Space is linear between cell centres;
 *   next to a wall the ghost value at distance dx/2 outside is the mirrored
 *   node of the first cell.
 * - Ball3D: trilinear in space over retained cells (weights renormalized)
 *   times trilinear in velocity, with zero outside the velocity box. A stencil
 *   corner outside the ball takes f at its mirror point with the reflected
 *   velocity. The free flight keeps |v|, so after each application every
 *   speed shell is rescaled to its input mass; this removes the mass and
 *   energy drift of the interpolation. Rows are recomputed on each
 *   application instead of tabulated.
 */
class TransportMap
{
  public:
    TransportMap(Domain const& domain, SpatialGrid const& spatial, VelocityGrid const& velocity, double theta);

    bool identity() const { return identity_; }
    void apply(std::span<double const> in, std::span<double> out) const;

    struct BallContext
    {
        Domain domain;
        SpatialGrid spatial;
        VelocityGrid velocity;
        double theta;
        std::vector<std::size_t> shell;  // speed shell of each velocity node
        std::size_t shells = 0;
    };

  private:
    struct Tap
    {
        std::size_t source;
        double weight;
    };

    bool identity_ = false;
    std::vector<std::size_t> offsets_;
    std::vector<Tap> taps_;
    std::shared_ptr<BallContext const> ball_;
};

using StepSink = std::function<void(SolverState const&, StepReport const&)>;

/*!
 * Mild-solution time stepping.
 *
 * Each step of length theta iterates the fixed-point map
 *   f <- (f_start + theta/2 Q(f_start)) o Psi^{-theta} + theta/2 Q(clamp_bar(f))
 * which is the trapezoid rule on the collision integral along characteristics.
 */
class Solver
{
  public:
    Solver(Domain domain,
           SpatialGrid spatial,
           VelocityGrid velocity,
           CollisionKernel const& kernel,
           SphereQuadrature const& sphere,
           StepConfig config);

    Domain const& domain() const { return domain_; }
    SpatialGrid const& spatial() const { return spatial_; }
    VelocityGrid const& velocity() const { return velocity_; }
    CollisionOperator const& collision() const { return *collision_; }
    StepConfig const& config() const { return config_; }
    double l1_norm() const { return collision_->l1_norm(); }
    TransportMap const& transport() const { return transport_; }

    SolverState initial_state(std::vector<double> field) const;

    //! Q(f) for every cell (clamped inside, projected if configured).
    std::vector<double> collision_field(std::span<double const> field) const;

    StepReport step(SolverState& state, PicardGuess guess = PicardGuess::Transported) const;
    SolverState run(SolverState state, std::size_t n_steps, std::vector<StepSink> const& sinks = {}) const;

  private:
    Domain domain_;
    SpatialGrid spatial_;
    VelocityGrid velocity_;
    std::unique_ptr<CollisionOperator> collision_;
    StepConfig config_;
    TransportMap transport_;
};

//---------------------------------------------------------------------------//
// Duhamel check for the linear problem d_t f + v . grad_x f = h
//---------------------------------------------------------------------------//

using SourceFunction = std::function<double(double t, PhaseState const&)>;

//! f(t, s) = f0(Psi^{-t} s) + int_0^t h(r, Psi^{r-t} s) dr.
double duhamel_solution(SourceFunction const& h,
                        PhaseFunction const& f0,
                        Domain const& domain,
                        double t,
                        PhaseState const& s,
                        int gauss_points = 8);

struct DuhamelStudy
{
    std::vector<double> deltas;
    //! max |centred difference of f# - h#| over the checked points, per delta.
    std::vector<double> residuals;
    //! log2-style order between consecutive deltas.
    std::vector<double> orders;
    std::size_t checked_points = 0;
};

/*!
 * Builds f by the Duhamel formula and checks that t -> f#(t, s) has
 * derivative h#(t, s) by centred differences at several times in
 * (0, t_final). Windows that contain a reflection are skipped (the same set
 * for every delta).
 */
DuhamelStudy verify_duhamel(SourceFunction const& h,
                            PhaseFunction const& f0,
                            Domain const& domain,
                            double t_final,
                            std::vector<PhaseState> const& samples,
                            std::vector<double> const& deltas);

}  // namespace fermikin
