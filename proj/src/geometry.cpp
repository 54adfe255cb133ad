#include "fermikin/geometry.hpp"

#include <cmath>
#include <sstream>

#include "fermikin/error.hpp"

namespace fermikin
{
namespace
{
template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

Domain::Domain(DomainShape shape, double tangent_tolerance)
    : shape_(std::move(shape)), tangent_tolerance_(tangent_tolerance)
{
    if (!(tangent_tolerance_ > 0.0) || tangent_tolerance_ >= 1.0)
        throw ValidationError("tangent_tolerance",
                              "tangent_tolerance must lie in (0, 1), got "
                                  + std::to_string(tangent_tolerance_));
    std::visit(overloaded{
                   [](FullSpace&) {},
                   [](Ball& b) {
                       if (!(b.radius > 0.0))
                           throw ValidationError("ball.radius", "ball radius must be positive");
                   },
                   [](Slab& s) {
                       double const len = norm(s.axis);
                       if (!(len > 0.0))
                           throw ValidationError("slab.axis", "slab axis must be nonzero");
                       s.axis = s.axis * (1.0 / len);
                       if (!(s.low < s.high))
                           throw ValidationError("slab.low<high", "slab requires low < high");
                       if (!(s.period > 0.0))
                           throw ValidationError("slab.period", "slab period must be positive");
                   },
               },
               shape_);
}

double Domain::level(Vec3 const& x) const
{
    return std::visit(overloaded{
                          [](FullSpace const&) { return -1.0; },
                          [&](Ball const& b) { return norm(x - b.center) - b.radius; },
                          [&](Slab const& s) {
                              double const p = dot(x, s.axis);
                              return std::max(s.low - p, p - s.high);
                          },
                      },
                      shape_);
}

double Domain::length_scale() const
{
    return std::visit(overloaded{
                          [](FullSpace const&) { return 1.0; },
                          [](Ball const& b) { return b.radius; },
                          [](Slab const& s) { return s.high - s.low; },
                      },
                      shape_);
}

std::string Domain::describe() const
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](FullSpace const&) { os << "full_space"; },
                   [&](Ball const& b) { os << "ball(center=" << b.center << ", r=" << b.radius << ")"; },
                   [&](Slab const& s) {
                       os << "slab(axis=" << s.axis << ", " << s.low << ".." << s.high << ")";
                   },
               },
               shape_);
    return os.str();
}

bool contains(Domain const& domain, Vec3 const& x)
{
    return domain.level(x) <= Domain::boundary_tolerance * domain.length_scale();
}

Vec3 outward_normal(Domain const& domain, Vec3 const& x)
{
    return std::visit(overloaded{
                          [](FullSpace const&) -> Vec3 {
                              throw UndefinedNormalError("full space has no boundary normal");
                          },
                          [&](Ball const& b) -> Vec3 {
                              Vec3 const r = x - b.center;
                              double const len = norm(r);
                              if (len == 0.0)
                                  throw UndefinedNormalError("ball normal undefined at the center");
                              return r * (1.0 / len);
                          },
                          [&](Slab const& s) -> Vec3 {
                              double const p = dot(x, s.axis);
                              // nearer face decides; midplane ties go to the upper face
                              return (p - s.low < s.high - p) ? -s.axis : s.axis;
                          },
                      },
                      domain.shape());
}

}  // namespace fermikin
