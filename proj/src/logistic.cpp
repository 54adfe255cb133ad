#include "fermikin/logistic.hpp"

#include <algorithm>
#include <cmath>

// Expose glibc's vector exp so the loop below can call it a block at a time.
#if defined(FERMIKIN_HAVE_LIBMVEC) && defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
extern "C" __attribute__((simd("notinbranch"))) double exp(double) noexcept;
#    define FERMIKIN_EXP exp
#else
#    define FERMIKIN_EXP std::exp
#endif

namespace fermikin
{

// Fixed-width blocks, padded at the tail, so every element goes through the
// same vector exp and equal inputs give equal outputs wherever they sit.
// Straight-line passes: a conditional around the exp call stops the loop
// from vectorizing.
void logistic(double const* g, double* out, std::size_t n, double limit)
{
    constexpr std::size_t block = 8;
    for (std::size_t i0 = 0; i0 < n; i0 += block)
    {
        std::size_t const m = std::min(block, n - i0);
        alignas(64) double x[block];
        for (std::size_t j = 0; j < block; ++j)
            x[j] = j < m ? std::min(std::max(g[i0 + j], -limit), limit) : 0.0;
#pragma omp simd
        for (std::size_t j = 0; j < block; ++j)
            x[j] = 1.0 / (1.0 + FERMIKIN_EXP(-x[j]));
        for (std::size_t j = 0; j < m; ++j)
        {
            double const v = g[i0 + j];
            out[i0 + j] = v >= limit ? 1.0 : (v <= -limit ? 0.0 : x[j]);
        }
    }
}

}  // namespace fermikin
