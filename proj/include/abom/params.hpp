#pragma once

#include <cstdint>
#include <vector>

namespace abom::params {

/// One candidate filter configuration with its capacity and modeled size.
struct ParamPoint {
    std::uint64_t m = 0;
    unsigned k = 0;
    std::uint64_t n_max = 0;
    double f = 0.0;
    std::uint64_t z_bytes = 0;
    double bytes_per_item = 0.0;
};

/// False-positive probability (1 - (1 - 1/m)^(kn))^k, exact power form.
long double fpr(std::uint64_t m, unsigned k, std::uint64_t n);

/// Size in bytes of an entropy-optimal encoding of the filter after n
/// insertions, rounded half-up.
std::uint64_t entropy_size_bytes(std::uint64_t m, unsigned k, std::uint64_t n);

/// 1 - (1 - f)^q for q successive filters.
long double cumulative_fpr(long double f, std::uint64_t q);

/// Largest n with fpr(m, k, n) <= f_bound; 0 when n = 1 already exceeds it.
std::uint64_t max_n(std::uint64_t m, unsigned k, long double f_bound);

struct SweepBounds {
    unsigned max_log2_m = 24;
    unsigned max_k = 6;
    std::uint64_t min_n = 1000;
    int max_f_log2 = -14;
};

/// Every (m = 2^j, k) with max_n >= min_n, sorted by z_bytes then (m, k).
std::vector<ParamPoint> sweep(const SweepBounds& bounds);

}  // namespace abom::params
