#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include "abom/coder.hpp"
#include "abom/error.hpp"
#include "abom/filter.hpp"
#include "test_support.hpp"

using namespace abom;

namespace {

struct Bits {
    std::vector<std::uint64_t> words;
    std::size_t size = 0;

    explicit Bits(std::size_t n) : words((n + 63) / 64, 0), size(n) {}
    void set(std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }
    BitView view() const { return {words, size}; }
};

Bits random_bits(std::mt19937_64& rng, std::size_t n, double p1) {
    Bits b(n);
    std::bernoulli_distribution coin(p1);
    for (std::size_t i = 0; i < n; ++i) {
        if (coin(rng)) b.set(i);
    }
    return b;
}

double entropy_bytes(std::size_t n, std::size_t ones) {
    if (ones == 0 || ones == n) return 0.0;
    const double p = static_cast<double>(ones) / static_cast<double>(n);
    return n * (-p * std::log2(p) - (1 - p) * std::log2(1 - p)) / 8.0;
}

std::size_t popcount(const Bits& b) {
    std::size_t ones = 0;
    for (auto w : b.words) ones += std::popcount(w);
    return ones;
}

void check_roundtrip(const Bits& bits, ArithModel model) {
    const auto coded = encode(bits.view(), model);
    const auto decoded = decode(coded, model, bits.size);
    REQUIRE(decoded == bits.words);
}

}  // namespace

TEST_CASE("model_from_bits quantizes and clamps") {
    Bits zeros(FilterParams::m);
    CHECK(model_from_bits(zeros.view()).p1_q() == 1);

    Bits ones(FilterParams::m);
    for (std::size_t i = 0; i < ones.size; ++i) ones.set(i);
    CHECK(model_from_bits(ones.view()).p1_q() == 0xFFFFFFFEu);

    // round(2048 / 2^18 * (2^32 - 1)) = round(33554431.9921875), exact.
    Bits sparse(FilterParams::m);
    for (std::size_t i = 0; i < 2048; ++i) sparse.set(i * 128);
    CHECK(model_from_bits(sparse.view()).p1_q() == 33554432u);

    // Half-up rounding: 1 one in 2 bits -> 2147483647.5 -> 2147483648.
    Bits half(2);
    half.set(0);
    CHECK(model_from_bits(half.view()).p1_q() == 2147483648u);

    CHECK_THROWS_AS(model_from_bits(BitView{}), Error);
    CHECK_THROWS_AS(ArithModel(0), Error);
    CHECK_THROWS_AS(ArithModel(0xFFFFFFFFu), Error);
}

TEST_CASE("all-zero filter encodes to a handful of bytes") {
    Bits zeros(FilterParams::m);
    const auto coded = encode(zeros.view(), ArithModel(1));
    CHECK(coded.size() < 64);
    CHECK(decode(coded, ArithModel(1), zeros.size) == zeros.words);
}

TEST_CASE("roundtrip holds for random bits and arbitrary models") {
    std::mt19937_64 rng(21);
    const std::uint32_t extreme_models[] = {1, 2, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFD, 0xFFFFFFFE};
    for (int trial = 0; trial < 1200; ++trial) {
        const std::size_t n = 1 + rng() % 5000;
        const double density = std::ldexp(1.0, -static_cast<int>(rng() % 12));
        const Bits bits = random_bits(rng, n, trial % 2 ? density : 1.0 - density);
        std::uint32_t p1;
        switch (trial % 3) {
            case 0: p1 = extreme_models[rng() % std::size(extreme_models)]; break;
            case 1: p1 = model_from_bits(bits.view()).p1_q(); break;
            default: p1 = static_cast<std::uint32_t>(1 + rng() % 0xFFFFFFFEu); break;
        }
        CAPTURE(trial);
        CAPTURE(n);
        CAPTURE(p1);
        check_roundtrip(bits, ArithModel(p1));
    }
}

TEST_CASE("roundtrip on long runs that force carries") {
    // Ones coded with a model that makes them nearly certain keep low near the
    // top of the window, the usual source of carry chains.
    Bits bits(200000);
    std::mt19937_64 rng(22);
    for (std::size_t i = 0; i < bits.size; ++i) {
        if (rng() % 1000 != 0) bits.set(i);
    }
    for (std::uint32_t p1 : {0xFFFFFFFEu, 0xF0000000u, 0x10000000u, 1u}) {
        check_roundtrip(bits, ArithModel(p1));
    }
}

TEST_CASE("matched-model output stays near the entropy bound") {
    std::mt19937_64 rng(23);
    for (double p : {0.5, 0.1, 0.0078, 0.001}) {
        const Bits bits = random_bits(rng, FilterParams::m, p);
        const ArithModel model = model_from_bits(bits.view());
        const auto coded = encode(bits.view(), model);
        const double bound = entropy_bytes(bits.size, popcount(bits)) * 1.02 + 16;
        CAPTURE(p);
        CHECK(static_cast<double>(coded.size()) <= bound);
    }
}

TEST_CASE("saturated filter compresses near the modeled size") {
    std::mt19937_64 rng(24);
    BloomFilter f;
    while (within_capacity(f.ones() + 2)) f.insert(testing::random_digest(rng));
    const BitView bits{f.words(), FilterParams::m};
    const auto coded = encode(bits, model_from_bits(bits));
    CHECK(coded.size() >= 2100);
    CHECK(coded.size() <= 2268);
}

TEST_CASE("encoding is deterministic") {
    std::mt19937_64 rng(25);
    const Bits bits = random_bits(rng, 30000, 0.03);
    const ArithModel model = model_from_bits(bits.view());
    CHECK(encode(bits.view(), model) == encode(bits.view(), model));
}

TEST_CASE("decode rejects bad input with typed errors") {
    std::mt19937_64 rng(26);
    const Bits bits = random_bits(rng, 20000, 0.05);
    const ArithModel model = model_from_bits(bits.view());
    const auto coded = encode(bits.view(), model);

    auto kind_of = [&](std::span<const std::uint8_t> data, std::size_t len) {
        try {
            decode(data, model, len);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;  // sentinel: decoded fine
    };

    CHECK(kind_of(coded, 0) == ErrorKind::InvalidArgument);
    CHECK(kind_of(std::span(coded).first(coded.size() - 1), bits.size) ==
          ErrorKind::CorruptPayload);
    CHECK(kind_of(std::span(coded).first(3), bits.size) == ErrorKind::CorruptPayload);

    auto extended = coded;
    extended.push_back(0);
    CHECK(kind_of(extended, bits.size) == ErrorKind::CorruptPayload);

    // Truncations of every length fail cleanly.
    for (std::size_t keep = 0; keep < coded.size(); ++keep) {
        REQUIRE(kind_of(std::span(coded).first(keep), bits.size) == ErrorKind::CorruptPayload);
    }

    // Random garbage never crashes; it either decodes or raises CorruptPayload.
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> junk(rng() % 64);
        for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
        const ErrorKind k = kind_of(junk, 1 + rng() % 4000);
        REQUIRE((k == ErrorKind::CorruptPayload || k == ErrorKind::Io));
    }
}
