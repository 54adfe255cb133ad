#pragma once

#include <cstddef>

namespace fermikin
{

/// out[i] = 1 / (1 + exp(-g[i])), saturated to exactly 0 for g <= -limit and
/// exactly 1 for g >= limit. `out` must not alias `g`.
void logistic(double const* g, double* out, std::size_t n, double limit);

}  // namespace fermikin
