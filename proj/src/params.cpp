#include "abom/params.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace abom::params {
namespace {

// ln((1 - 1/m)^(kn)), the log of the probability that a given bit stays zero.
long double log_zero_probability(std::uint64_t m, unsigned k, std::uint64_t n) {
    return static_cast<long double>(k) * static_cast<long double>(n) *
           std::log1p(-1.0L / static_cast<long double>(m));
}

}  // namespace

long double fpr(std::uint64_t m, unsigned k, std::uint64_t n) {
    if (n == 0) {
        return 0.0L;
    }
    const long double one_probability = -std::expm1(log_zero_probability(m, k, n));
    return std::pow(one_probability, static_cast<long double>(k));
}

std::uint64_t entropy_size_bytes(std::uint64_t m, unsigned k, std::uint64_t n) {
    const long double log_p = log_zero_probability(m, k, n);
    const long double p = std::exp(log_p);
    const long double q = -std::expm1(log_p);
    long double entropy = 0.0L;
    if (p > 0.0L) {
        entropy -= p * log_p / std::log(2.0L);
    }
    if (q > 0.0L) {
        entropy -= q * std::log2(q);
    }
    const long double bytes = static_cast<long double>(m) * entropy / 8.0L;
    return static_cast<std::uint64_t>(std::floor(bytes + 0.5L));
}

long double cumulative_fpr(long double f, std::uint64_t q) {
    return -std::expm1(static_cast<long double>(q) * std::log1p(-f));
}

std::uint64_t max_n(std::uint64_t m, unsigned k, long double f_bound) {
    if (fpr(m, k, 1) > f_bound) {
        return 0;
    }
    std::uint64_t good = 1;
    std::uint64_t bad = 2;
    while (fpr(m, k, bad) <= f_bound) {
        good = bad;
        bad *= 2;
    }
    while (bad - good > 1) {
        const std::uint64_t mid = good + (bad - good) / 2;
        if (fpr(m, k, mid) <= f_bound) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    return good;
}

std::vector<ParamPoint> sweep(const SweepBounds& bounds) {
    const long double f_bound = std::ldexp(1.0L, bounds.max_f_log2);
    std::vector<ParamPoint> points;
    for (unsigned j = 1; j <= bounds.max_log2_m; ++j) {
        const std::uint64_t m = std::uint64_t{1} << j;
        for (unsigned k = 1; k <= bounds.max_k; ++k) {
            const std::uint64_t n = max_n(m, k, f_bound);
            if (n == 0 || n < bounds.min_n) {
                continue;
            }
            ParamPoint point;
            point.m = m;
            point.k = k;
            point.n_max = n;
            point.f = static_cast<double>(fpr(m, k, n));
            point.z_bytes = entropy_size_bytes(m, k, n);
            point.bytes_per_item = static_cast<double>(point.z_bytes) / static_cast<double>(n);
            points.push_back(point);
        }
    }
    std::sort(points.begin(), points.end(), [](const ParamPoint& a, const ParamPoint& b) {
        return std::tie(a.z_bytes, a.m, a.k) < std::tie(b.z_bytes, b.m, b.k);
    });
    return points;
}

}  // namespace abom::params
