#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace dmsc {

/// C(n, k) as an exact 64-bit integer; saturates at UINT64_MAX on overflow.
inline std::uint64_t binomial_u64(std::int64_t n, std::int64_t k) noexcept {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned __int128>(n - k + i);
        acc /= static_cast<unsigned __int128>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max())
            return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

/// C(n, k) in floating point: exact while it fits in 53 bits, lgamma beyond.
inline double binomial(std::int64_t n, std::int64_t k) noexcept {
    if (k < 0 || n < 0 || k > n) return 0.0;
    const std::uint64_t exact = binomial_u64(n, k);
    if (exact < (std::uint64_t{1} << 53)) return static_cast<double>(exact);
    return std::exp(std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
                    std::lgamma(double(n - k) + 1));
}

inline double factorial(int m) noexcept {
    double r = 1.0;
    for (int i = 2; i <= m; ++i) r *= i;
    return r;
}

} // namespace dmsc
