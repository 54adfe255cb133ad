#pragma once

#include <string>
#include <vector>

#include "fermikin/vec3.hpp"

namespace fermikin
{

/*!
 * Quadrature rule on the unit sphere for the scattering-direction integral.
 *
 * Weights are positive and sum to 4 pi; the node set is closed under
 * omega -> -omega.
 */
class SphereQuadrature
{
  public:
    //! Lebedev rules with 6, 14 or 26 nodes (exact to degree 3, 5, 7).
    static SphereQuadrature lebedev(int nodes);

    //! Gauss-Legendre in cos(polar) times uniform azimuth; n_azimuth must be even.
    static SphereQuadrature product(int n_polar, int n_azimuth);

    SphereQuadrature(std::vector<Vec3> directions, std::vector<double> weights, std::string name);

    std::vector<Vec3> const& directions() const { return directions_; }
    std::vector<double> const& weights() const { return weights_; }
    std::size_t size() const { return directions_.size(); }
    std::string const& name() const { return name_; }

    //! Index of -omega_k in the node list, or -1 if absent.
    int antipode(std::size_t k) const;

  private:
    std::vector<Vec3> directions_;
    std::vector<double> weights_;
    std::string name_;
};

//! Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fermikin
