#include "internal.hpp"

#include <cmath>

namespace fracadapt::detail {

// Built with vectorized exp/log; callers only pass finite positive arguments.
void pow_batch(const double *x, double *out, std::size_t n, double exponent)
{
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(exponent * std::log(x[i]));
}

} // namespace fracadapt::detail
