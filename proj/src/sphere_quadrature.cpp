#include "fermikin/sphere_quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fermikin/error.hpp"

namespace fermikin
{
namespace
{
constexpr double four_pi = 4.0 * std::numbers::pi;

void add_orbit_axes(std::vector<Vec3>& d, std::vector<double>& w, double weight)
{
    for (int k = 0; k < 3; ++k)
        for (double s : {1.0, -1.0})
        {
            Vec3 e;
            e[k] = s;
            d.push_back(e);
            w.push_back(weight);
        }
}

void add_orbit_edges(std::vector<Vec3>& d, std::vector<double>& w, double weight)
{
    double const a = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < 3; ++k)
    {
        int const p = (k + 1) % 3;
        int const q = (k + 2) % 3;
        for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0})
            {
                Vec3 e;
                e[p] = s1 * a;
                e[q] = s2 * a;
                d.push_back(e);
                w.push_back(weight);
            }
    }
}

void add_orbit_corners(std::vector<Vec3>& d, std::vector<double>& w, double weight)
{
    double const a = 1.0 / std::sqrt(3.0);
    for (double sx : {1.0, -1.0})
        for (double sy : {1.0, -1.0})
            for (double sz : {1.0, -1.0})
            {
                d.push_back({sx * a, sy * a, sz * a});
                w.push_back(weight);
            }
}
}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    // returns (P_n(x), P_n'(x)) by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k)
        {
            double const p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };

    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter)
        {
            auto const [p, dp] = legendre(x);
            double const dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double const dp = legendre(x).second;
        double const w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        nodes[n / 2] = 0.0;
}

SphereQuadrature::SphereQuadrature(std::vector<Vec3> directions,
                                   std::vector<double> weights,
                                   std::string name)
    : directions_(std::move(directions)), weights_(std::move(weights)), name_(std::move(name))
{
    if (directions_.empty() || directions_.size() != weights_.size())
        throw ValidationError("sphere", "sphere quadrature needs matching nonempty node/weight lists");
    double total = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
    {
        if (std::abs(norm(directions_[k]) - 1.0) > 1e-12)
            throw ValidationError("sphere", "sphere quadrature node is not a unit vector");
        if (!(weights_[k] > 0.0))
            throw ValidationError("sphere", "sphere quadrature weights must be positive");
        total += weights_[k];
    }
    if (std::abs(total - four_pi) > 1e-12 * four_pi)
        throw ValidationError("sphere", "sphere quadrature weights must sum to 4 pi");
}

int SphereQuadrature::antipode(std::size_t k) const
{
    Vec3 const target = -directions_[k];
    for (std::size_t j = 0; j < size(); ++j)
        if (max_abs_diff(directions_[j], target) < 1e-12)
            return static_cast<int>(j);
    return -1;
}

SphereQuadrature SphereQuadrature::lebedev(int nodes)
{
    std::vector<Vec3> d;
    std::vector<double> w;
    switch (nodes)
    {
        case 6:
            add_orbit_axes(d, w, 1.0 / 6.0);
            break;
        case 14:
            add_orbit_axes(d, w, 1.0 / 15.0);
            add_orbit_corners(d, w, 3.0 / 40.0);
            break;
        case 26:
            add_orbit_axes(d, w, 1.0 / 21.0);
            add_orbit_edges(d, w, 4.0 / 105.0);
            add_orbit_corners(d, w, 27.0 / 840.0);
            break;
        default:
            throw ValidationError("sphere", "lebedev rule must have 6, 14 or 26 nodes, got "
                                                + std::to_string(nodes));
    }
    for (double& x : w)
        x *= four_pi;
    return SphereQuadrature(std::move(d), std::move(w), "lebedev(" + std::to_string(nodes) + ")");
}

SphereQuadrature SphereQuadrature::product(int n_polar, int n_azimuth)
{
    if (n_polar < 1 || n_azimuth < 2 || n_azimuth % 2 != 0)
        throw ValidationError("sphere",
                              "product rule needs n_polar >= 1 and an even n_azimuth >= 2");
    std::vector<double> mu, a;
    gauss_legendre(n_polar, mu, a);
    std::vector<Vec3> d;
    std::vector<double> w;
    double const dphi = 2.0 * std::numbers::pi / n_azimuth;
    for (int i = 0; i < n_polar; ++i)
    {
        double const s = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
        for (int m = 0; m < n_azimuth; ++m)
        {
            double const phi = (m + 0.5) * dphi;
            Vec3 e{s * std::cos(phi), s * std::sin(phi), mu[i]};
            d.push_back(normalized(e));
            w.push_back(a[i] * dphi);
        }
    }
    return SphereQuadrature(std::move(d), std::move(w),
                            "product(" + std::to_string(n_polar) + "," + std::to_string(n_azimuth)
                                + ")");
}

}  // namespace fermikin
