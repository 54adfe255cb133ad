#include "fermikin/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "fermikin/error.hpp"
#include "fermikin/sphere_quadrature.hpp"
#include "fermikin/velocity_grid.hpp"

namespace fermikin
{

CollisionKernel::CollisionKernel(Evaluator q, double support_radius, std::string description)
    : q_(std::move(q)), support_radius_(support_radius), description_(std::move(description))
{
    if (!(support_radius_ >= 0.0) || !std::isfinite(support_radius_))
        throw ValidationError("kernel", "kernel support radius must be finite and nonnegative");
}

CollisionKernel CollisionKernel::constant(double radius, double amplitude)
{
    if (!(radius > 0.0))
        throw ValidationError("kernel", "constant kernel radius must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ValidationError("kernel", "constant kernel amplitude must be finite and >= 0");
    std::ostringstream os;
    os.precision(17);
    os << "constant(" << radius << ", " << amplitude << ")";
    CollisionKernel k([amplitude](double, double) { return amplitude; }, radius, os.str());
    k.is_zero_ = amplitude == 0.0;
    return k;
}

CollisionKernel CollisionKernel::zero()
{
    CollisionKernel k([](double, double) { return 0.0; }, 0.0, "zero");
    k.is_zero_ = true;
    return k;
}

CollisionKernel CollisionKernel::tabulated(std::vector<double> const& speeds,
                                           std::vector<double> const& normal_components,
                                           std::vector<double> const& values,
                                           std::string description)
{
    auto const ns = speeds.size();
    auto const nu = normal_components.size();
    if (ns < 2 || nu < 2 || values.size() != ns * nu)
        throw ValidationError("kernel.table",
                              "tabulated kernel needs a full grid of at least 2x2 samples");
    if (!std::is_sorted(speeds.begin(), speeds.end())
        || !std::is_sorted(normal_components.begin(), normal_components.end()))
        throw ValidationError("kernel.table", "table axes must be increasing");
    bool all_zero = true;
    for (double v : values)
    {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("kernel.table", "tabulated q must be finite and nonnegative");
        all_zero = all_zero && v == 0.0;
    }

    auto table = std::make_shared<std::vector<double> const>(values);
    auto s_axis = std::make_shared<std::vector<double> const>(speeds);
    auto u_axis = std::make_shared<std::vector<double> const>(normal_components);
    auto locate = [](std::vector<double> const& axis, double x, std::size_t& i, double& t) {
        x = std::clamp(x, axis.front(), axis.back());
        auto it = std::upper_bound(axis.begin(), axis.end(), x);
        i = std::min<std::size_t>(axis.size() - 2,
                                  static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                      0, (it - axis.begin()) - 1)));
        t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    };
    Evaluator q = [=](double speed, double u) {
        std::size_t i, j;
        double ts, tu;
        locate(*s_axis, speed, i, ts);
        locate(*u_axis, u, j, tu);
        auto at = [&](std::size_t a, std::size_t b) { return (*table)[a * nu + b]; };
        return (1 - ts) * ((1 - tu) * at(i, j) + tu * at(i, j + 1))
               + ts * ((1 - tu) * at(i + 1, j) + tu * at(i + 1, j + 1));
    };
    CollisionKernel k(std::move(q), speeds.back(), std::move(description));
    k.is_zero_ = all_zero;
    return k;
}

CollisionKernel CollisionKernel::from_csv(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open kernel table '" + path + "'");
    std::map<std::pair<double, double>, double> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double s, u, v;
        if (!(row >> s >> u >> v))
        {
            if (lineno == 1)
                continue;  // header
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected `|w|, |w.omega|, q`");
        }
        samples[{s, u}] = v;
    }
    std::vector<double> speeds, comps;
    for (auto const& [key, v] : samples)
    {
        if (speeds.empty() || speeds.back() != key.first)
            speeds.push_back(key.first);
        if (std::find(comps.begin(), comps.end(), key.second) == comps.end())
            comps.push_back(key.second);
    }
    std::sort(comps.begin(), comps.end());
    std::vector<double> values;
    values.reserve(speeds.size() * comps.size());
    for (double s : speeds)
        for (double u : comps)
        {
            auto it = samples.find({s, u});
            if (it == samples.end())
                throw ValidationError("kernel.table", path + ": table is not a full rectilinear grid");
            values.push_back(it->second);
        }
    return tabulated(speeds, comps, values, "tabulated(" + path + ")");
}

CollisionKernel CollisionKernel::scaled(double factor) const
{
    if (!(factor >= 0.0) || !std::isfinite(factor))
        throw ValidationError("kernel", "kernel scale factor must be finite and >= 0");
    Evaluator inner = q_;
    std::ostringstream os;
    os.precision(17);
    os << factor << "*" << description_;
    CollisionKernel k([inner, factor](double s, double u) { return factor * inner(s, u); },
                      support_radius_, os.str());
    k.is_zero_ = is_zero_ || factor == 0.0;
    return k;
}

double CollisionKernel::cache_l1_norm(VelocityGrid const& grid, SphereQuadrature const& sphere)
{
    l1_norm_ = kernel_l1_norm(*this, grid, sphere);
    return *l1_norm_;
}

double kernel_l1_norm(CollisionKernel const& kernel,
                      VelocityGrid const& grid,
                      SphereQuadrature const& sphere)
{
    if (kernel.support_radius() > 2.0 * grid.v_max())
        throw UnresolvedSupportError("kernel support radius exceeds the relative-velocity extent 2*v_max");
    if (kernel.is_zero())
        return 0.0;
    int const n = grid.nodes_per_axis();
    double const h = grid.spacing();
    double total = 0.0;
    for (int a = -(n - 1); a <= n - 1; ++a)
        for (int b = -(n - 1); b <= n - 1; ++b)
            for (int c = -(n - 1); c <= n - 1; ++c)
            {
                Vec3 const w{a * h, b * h, c * h};
                double const speed = norm(w);
                if (speed > kernel.support_radius())
                    continue;
                double inner = 0.0;
                for (std::size_t k = 0; k < sphere.size(); ++k)
                    inner += sphere.weights()[k]
                             * kernel(speed, std::abs(dot(w, sphere.directions()[k])));
                total += inner;
            }
    return total * grid.weight();
}

}  // namespace fermikin
