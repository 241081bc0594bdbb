#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "abom/error.hpp"
#include "abom/filter.hpp"
#include "abom/params.hpp"
#include "test_support.hpp"

using namespace abom;
using testing::random_digest;

namespace {

Digest36 digest_at(std::uint32_t hi, std::uint32_t lo) {
    return Digest36((std::uint64_t{hi} << 18) | lo);
}

BloomFilter filter_with_prefix_bits(std::uint32_t count) {
    BloomFilter f;
    for (std::uint32_t bit = 0; bit < count; ++bit) {
        f.set(bit);
    }
    return f;
}

BloomFilter random_filter(std::mt19937_64& rng, int insertions) {
    BloomFilter f;
    for (int i = 0; i < insertions; ++i) {
        f.insert(random_digest(rng));
    }
    return f;
}

}  // namespace

TEST_CASE("new filter is empty") {
    BloomFilter f;
    CHECK(f.ones() == 0);
    CHECK(f.estimate_n() == 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE_FALSE(f.contains(random_digest(rng)));
    }
}

TEST_CASE("insert reports newly set bits") {
    BloomFilter f;
    const Digest36 d = digest_at(10, 20);
    CHECK(f.insert(d) == 2);
    CHECK(f.ones() == 2);
    CHECK(f.insert(d) == 0);
    CHECK(f.ones() == 2);

    // hi == lo: a single bit represents the digest.
    BloomFilter g;
    const Digest36 same = digest_at(777, 777);
    CHECK(g.would_set(same) == 1);
    CHECK(g.insert(same) == 1);
    CHECK(g.ones() == 1);
    CHECK(g.contains(same));

    // One index shared with an earlier insertion.
    CHECK(f.insert(digest_at(10, 99)) == 1);
}

TEST_CASE("contains requires every index") {
    BloomFilter f;
    f.set(5);
    CHECK_FALSE(f.contains(digest_at(5, 7)));
    f.set(7);
    CHECK(f.contains(digest_at(5, 7)));
    CHECK(f.contains(digest_at(7, 5)));
}

TEST_CASE("union_filters is an idempotent commutative monoid") {
    std::mt19937_64 rng(2);
    const BloomFilter empty;
    for (int trial = 0; trial < 20; ++trial) {
        const BloomFilter a = random_filter(rng, 300);
        const BloomFilter b = random_filter(rng, 300);
        const BloomFilter c = random_filter(rng, 300);
        REQUIRE(union_filters(a, empty) == a);
        REQUIRE(union_filters(a, a) == a);
        REQUIRE(union_filters(a, b) == union_filters(b, a));
        REQUIRE(union_filters(union_filters(a, b), c) == union_filters(a, union_filters(b, c)));
        REQUIRE(a.union_ones(b) == union_filters(a, b).ones());
    }

    BloomFilter a, b;
    const Digest36 d1 = digest_at(1, 2), d2 = digest_at(3, 4);
    a.insert(d1);
    b.insert(d2);
    const BloomFilter u = union_filters(a, b);
    CHECK(u.contains(d1));
    CHECK(u.contains(d2));
}

TEST_CASE("estimate_n follows the occupancy estimator") {
    // High-precision (mpmath) evaluations of -(m/k) ln(1 - x/m).
    CHECK(estimate_n_from_ones(0) == 0.0);
    CHECK(estimate_n_from_ones(2) == doctest::Approx(1.0000038147166683).epsilon(1e-12));
    CHECK(estimate_n_from_ones(1000) == doctest::Approx(500.95610659574824).epsilon(1e-12));
    CHECK(estimate_n_from_ones(2047) == doctest::Approx(1027.5170201324613).epsilon(1e-12));
    CHECK(estimate_n_from_ones(2048) == doctest::Approx(1028.0209561715858).epsilon(1e-12));
    CHECK(std::isinf(estimate_n_from_ones(FilterParams::m)));
    CHECK_FALSE(within_capacity(FilterParams::m));

    // 2047 set bits is the fullest a filter may get.
    CHECK(within_capacity(2047));
    CHECK_FALSE(within_capacity(2048));
}

TEST_CASE("estimator tracks the true insertion count") {
    std::mt19937_64 rng(3);
    for (int n : {10, 100, 500, 1028}) {
        int successes = 0;
        for (int trial = 0; trial < 100; ++trial) {
            std::set<Digest36> distinct;
            while (distinct.size() < static_cast<std::size_t>(n)) {
                distinct.insert(random_digest(rng));
            }
            BloomFilter f;
            for (Digest36 d : distinct) f.insert(d);
            const double tolerance = std::max(5.0, 0.05 * n);
            if (std::abs(f.estimate_n() - n) <= tolerance) ++successes;
        }
        CAPTURE(n);
        CHECK(successes >= 99);
    }
}

TEST_CASE("chain_insert fills the last filter then grows") {
    FilterChain chain;
    CHECK(chain.size() == 1);
    const Digest36 d = digest_at(100, 200);
    chain.insert(d);
    CHECK(chain.size() == 1);
    CHECK(chain.filters()[0].ones() == 2);
    CHECK(chain.contains(d));

    SUBCASE("overflow threshold sits between 2047 and 2048 ones") {
        // One new bit on top of 2046 ones keeps the estimate at 1027.5.
        auto below = FilterChain::from_filters({filter_with_prefix_bits(2046)});
        below.insert(digest_at(0, 5000));
        CHECK(below.size() == 1);
        CHECK(below.filters()[0].ones() == 2047);

        // The same insert on 2047 ones would reach 1028.02 > 1028.
        auto at = FilterChain::from_filters({filter_with_prefix_bits(2047)});
        at.insert(digest_at(0, 5000));
        REQUIRE(at.size() == 2);
        CHECK(at.filters()[0].ones() == 2047);
        CHECK(at.filters()[1].ones() == 2);
    }

    SUBCASE("random insertions saturate at the threshold") {
        std::mt19937_64 rng(4);
        FilterChain c;
        int inserted = 0;
        while (c.size() == 1) {
            c.insert(random_digest(rng));
            ++inserted;
        }
        const std::uint32_t ones = c.filters()[0].ones();
        CHECK(ones >= 2046);
        CHECK(ones <= 2047);
        CHECK(inserted > 1000);
        CHECK(inserted < 1060);
    }
}

TEST_CASE("chain_insert skips digests already answered by any filter") {
    BloomFilter first, second;
    const Digest36 d = digest_at(1, 2);
    first.insert(d);
    second.insert(digest_at(3, 4));
    auto chain = FilterChain::from_filters({first, second});
    const FilterChain before = chain;
    chain.insert(d);
    CHECK(chain == before);
}

TEST_CASE("from_filters validates length") {
    CHECK_THROWS_AS(FilterChain::from_filters({}), Error);
}

TEST_CASE("chain_union merges first-fit") {
    std::mt19937_64 rng(5);

    SUBCASE("identity with an empty chain") {
        FilterChain c;
        std::vector<Digest36> ds;
        for (int i = 0; i < 200; ++i) {
            ds.push_back(random_digest(rng));
            c.insert(ds.back());
        }
        const FilterChain u = chain_union(c, FilterChain{});
        CHECK(u == c);
        const FilterChain v = chain_union(FilterChain{}, c);
        CHECK(v == c);
    }

    SUBCASE("two half-full chains fit in one filter") {
        FilterChain a, b;
        for (int i = 0; i < 500; ++i) a.insert(random_digest(rng));
        for (int i = 0; i < 500; ++i) b.insert(random_digest(rng));
        CHECK(a.filters()[0].estimate_n() == doctest::Approx(500).epsilon(0.05));
        const FilterChain u = chain_union(a, b);
        CHECK(u.size() == 1);
        CHECK(u.filters()[0] == union_filters(a.filters()[0], b.filters()[0]));
    }

    SUBCASE("two saturated chains stay separate") {
        BloomFilter fa = random_filter(rng, 1020);
        BloomFilter fb = random_filter(rng, 1020);
        const auto a = FilterChain::from_filters({fa});
        const auto b = FilterChain::from_filters({fb});
        const FilterChain u = chain_union(a, b);
        REQUIRE(u.size() == 2);
        CHECK(u.filters()[0] == fa);
        CHECK(u.filters()[1] == fb);
    }

    SUBCASE("self union is idempotent in content") {
        FilterChain c;
        for (int i = 0; i < 300; ++i) c.insert(random_digest(rng));
        FilterChain d = c;
        d.merge(d);
        CHECK(d.size() == 1);
        CHECK(d.filters()[0] == c.filters()[0]);
    }
}

TEST_CASE("no false negatives under random insert and union sequences") {
    std::mt19937_64 rng(6);
    for (int sequence = 0; sequence < 60; ++sequence) {
        FilterChain chain;
        std::vector<Digest36> inserted;
        const int steps = 1 + static_cast<int>(rng() % 6);
        for (int step = 0; step < steps; ++step) {
            if (rng() % 2 == 0) {
                const int n = static_cast<int>(rng() % 1500);
                for (int i = 0; i < n; ++i) {
                    inserted.push_back(random_digest(rng));
                    chain.insert(inserted.back());
                }
            } else {
                FilterChain other;
                const int n = static_cast<int>(rng() % 1500);
                for (int i = 0; i < n; ++i) {
                    inserted.push_back(random_digest(rng));
                    other.insert(inserted.back());
                }
                chain.merge(other);
                // Monotonic: nothing answered before the merge is lost.
                for (std::size_t i = 0; i + n < inserted.size(); ++i) {
                    REQUIRE(chain.contains(inserted[i]));
                }
            }
        }
        for (Digest36 d : inserted) {
            REQUIRE(chain.contains(d));
        }
        for (const BloomFilter& f : chain.filters()) {
            REQUIRE(within_capacity(f.ones()));
        }
    }
}

TEST_CASE("saturated filter false-positive rate matches the model") {
    std::mt19937_64 rng(8);
    std::set<Digest36> members;
    while (members.size() < 1028) members.insert(random_digest(rng));
    BloomFilter f;
    for (Digest36 d : members) f.insert(d);

    const int queries = 1 << 18;
    int hits = 0;
    for (int i = 0; i < queries; ++i) {
        const Digest36 q = random_digest(rng);
        if (!members.contains(q) && f.contains(q)) ++hits;
    }
    // Expected 16 at f = 6.10e-5; generous band for a unit test.
    const double expected = static_cast<double>(params::fpr(FilterParams::m, 2, 1028)) * queries;
    CHECK(expected == doctest::Approx(16.0).epsilon(0.01));
    CHECK(hits >= 2);
    CHECK(hits <= 40);
}
