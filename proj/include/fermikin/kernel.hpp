#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fermikin
{

class VelocityGrid;
class SphereQuadrature;

/*!
 * Collision kernel b(w, omega) = q(|w|, |w.omega|).
 *
 * Only bounded, compactly supported q are representable, which keeps b
 * integrable over R^3 x S^2.
 */
class CollisionKernel
{
  public:
    using Evaluator = std::function<double(double speed, double normal_component)>;

    CollisionKernel(Evaluator q, double support_radius, std::string description);

    //! q = amplitude on |w| <= radius, zero beyond.
    static CollisionKernel constant(double radius, double amplitude);
    //! q = 0 (pure transport).
    static CollisionKernel zero();
    /*!
     * Bilinear interpolation of a rectilinear table of (|w|, |w.omega|, q)
     * samples; q is zero for |w| beyond the largest tabulated speed.
     */
    static CollisionKernel tabulated(std::vector<double> const& speeds,
                                     std::vector<double> const& normal_components,
                                     std::vector<double> const& values,
                                     std::string description);
    //! Loads a CSV table with rows `|w|, |w.omega|, q` (optional header line).
    static CollisionKernel from_csv(std::string const& path);

    double operator()(double speed, double normal_component) const
    {
        return speed > support_radius_ ? 0.0 : q_(speed, normal_component);
    }

    double support_radius() const { return support_radius_; }
    std::string const& description() const { return description_; }
    bool is_zero() const { return is_zero_; }

    //! Same kernel multiplied by a nonnegative factor.
    CollisionKernel scaled(double factor) const;

    //! Cached quadrature of |b|_L1 (set by cache_l1_norm).
    std::optional<double> l1_norm_B() const { return l1_norm_; }
    double cache_l1_norm(VelocityGrid const& grid, SphereQuadrature const& sphere);

  private:
    Evaluator q_;
    double support_radius_;
    std::string description_;
    bool is_zero_ = false;
    std::optional<double> l1_norm_;
};

/*!
 * Quadrature of the L1 norm B of b over R^3 x S^2.
 *
 * The relative velocity is summed over the lattice of grid differences
 * (spacing h, extent 2 v_max per side) and the direction over the sphere
 * rule. This is the same quadrature the collision operator uses, so the
 * returned B bounds the discrete gain and loss rates. Throws
 * UnresolvedSupportError if the support radius exceeds 2 v_max.
 */
double kernel_l1_norm(CollisionKernel const& kernel,
                      VelocityGrid const& grid,
                      SphereQuadrature const& sphere);

}  // namespace fermikin
