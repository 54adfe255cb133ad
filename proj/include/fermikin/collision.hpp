#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fermikin/kernel.hpp"
#include "fermikin/sphere_quadrature.hpp"
#include "fermikin/velocity_grid.hpp"

namespace fermikin
{

//! Values of f at every velocity node for one spatial location.
using DistributionSlice = std::vector<double>;

//! (v', v*') = (v - ((v - v*).w) w, v* + ((v - v*).w) w).
inline std::pair<Vec3, Vec3> post_collision_velocities(Vec3 const& v,
                                                       Vec3 const& v_star,
                                                       Vec3 const& omega)
{
    Vec3 const shift = dot(v - v_star, omega) * omega;
    return {v - shift, v_star + shift};
}

/*!
 * Elementwise truncation to [0, 1].
 *
 * NaN is rejected with InvalidValueError instead of being clamped.
 */
std::vector<double> clamp_bar(std::span<double const> f);
void clamp_bar_into(std::span<double const> f, std::span<double> out);

//! Largest distance any value moves when clamped to [0, 1].
double clamp_defect(std::span<double const> f);

/*!
 * Orthogonal projection onto the complement of span{1, v1, v2, v3, |v|^2}.
 *
 * The inner product is the grid quadrature. The 5x5 Gram matrix is factored
 * once at construction and only read afterwards.
 */
class ConservativeProjector
{
  public:
    explicit ConservativeProjector(VelocityGrid const& grid);

    void apply(std::span<double> q) const;
    std::vector<double> operator()(std::span<double const> q) const;

  private:
    VelocityGrid grid_;
    std::vector<std::array<double, 5>> basis_;
    Eigen::LDLT<Eigen::Matrix<double, 5, 5>> gram_;
};

std::vector<double> conservative_projection(std::span<double const> q_values,
                                            VelocityGrid const& grid);

//---------------------------------------------------------------------------//
/*!
 * Discrete Fermi-Dirac collision operator on a truncated velocity grid.
 *
 * For each node v_i the (v*, omega) integral is a sum over grid nodes v* and
 * the sphere rule, with weight h^3 w_k q(|v - v*|, |(v - v*).omega|).
 * Antipodal directions give the same collision and are folded together.
 *
 * Off-grid values f(v') and f(v*') are reconstructed by triquadratic
 * interpolation of the logit log(f / (1 - f)) followed by the logistic map.
 * The reconstruction stays in [0, 1] for any input, reproduces constants
 * exactly and reproduces every profile whose logit is a collision invariant
 * (a + b.v + c|v|^2).
 *
 * A collision counts only if v' and v*' stay inside [-v_max, v_max]^3, so
 * the truncated operator is the full one with the kernel restricted to
 * collisions that stay in the box. Constants are annihilated exactly.
 *
 * The four factors of each gain/loss product pass through the same
 * logit/logistic round trip, so equal node values give identical products.
 */
//---------------------------------------------------------------------------//
class CollisionOperator
{
  public:
    //! Logit range; values beyond map to exactly 0 or 1.
    static constexpr double logit_limit = 36.0;

    CollisionOperator(VelocityGrid const& grid,
                      CollisionKernel const& kernel,
                      SphereQuadrature const& sphere);

    VelocityGrid const& grid() const { return grid_; }
    //! Quadrature of |b|_L1 on this grid (an upper bound on gain and loss rates).
    double l1_norm() const { return l1_norm_; }
    bool trivial() const { return entries_.empty(); }
    std::size_t entry_count() const { return entries_.size(); }
    //! Fraction of (offset, direction) entries whose collisions land on grid nodes.
    double on_lattice_fraction() const;

    /*!
     * Q(clamp_bar(f)) at every node; projected onto the conservative
     * subspace when `conservative` is set.
     */
    void evaluate(std::span<double const> f, std::span<double> q, bool conservative) const;
    std::vector<double> evaluate(std::span<double const> f, bool conservative) const;

    ConservativeProjector const& projector() const { return projector_; }

  private:
    struct Stencil
    {
        std::array<double, 3> offset;  // displacement in index units
        std::array<bool, 3> exact;     // axis displacement is an integer
        bool on_lattice;
    };
    struct Entry
    {
        std::array<int, 3> shift;  // v* - v in index units
        double weight;
        int post;       // stencil for v' - v
        int post_star;  // stencil for v*' - v
    };

    int stencil_for(std::array<double, 3> const& offset);
    // f at node + stencil offset for every node; outside_box where that point leaves the box
    static constexpr double outside_box = -1.0;
    void reconstruct(Stencil const& s,
                     std::span<double const> logit,
                     std::span<double const> value,
                     std::span<double> out) const;

    VelocityGrid grid_;
    double l1_norm_ = 0.0;
    std::vector<Stencil> stencils_;
    std::map<std::array<long long, 3>, int> stencil_index_;
    std::vector<Entry> entries_;
    ConservativeProjector projector_;
};

/*!
 * One-shot evaluation of Q(f) (builds the operator tables each call; hold a
 * CollisionOperator for repeated use).
 */
std::vector<double> evaluate_Q(std::span<double const> f,
                               VelocityGrid const& grid,
                               CollisionKernel const& kernel,
                               SphereQuadrature const& sphere,
                               bool conservative);

}  // namespace fermikin
