#include <doctest.h>

#include <openssl/evp.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "abom/digest.hpp"
#include "abom/error.hpp"
#include "abom/shake128.hpp"
#include "test_support.hpp"

using namespace abom;

namespace {

// OpenSSL's SHAKE128 is the independent oracle for the in-house sponge.
std::uint64_t openssl_digest36(const std::vector<std::uint8_t>& data) {
    std::uint8_t out[5];
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_shake128(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinalXOF(ctx, out, sizeof out);
    EVP_MD_CTX_free(ctx);
    std::uint64_t prefix = 0;
    for (std::uint8_t b : out) {
        prefix = (prefix << 8) | b;
    }
    return prefix >> 4;
}

}  // namespace

TEST_CASE("hash_bytes reference vectors") {
    // Values from Python hashlib.shake_128(...).digest(5) >> 4.
    CHECK(hash_bytes(std::string_view{}).value() == 0x7f9c2ba4eULL);
    CHECK(hash_bytes("abc").value() == 0x5881092ddULL);
    CHECK(hash_bytes("The quick brown fox jumps over the lazy dog").value() == 0xf4202e3c5ULL);
    // Around the 168-byte rate boundary.
    CHECK(hash_bytes(std::string(167, 'a')).value() == 0x4f5c6c53aULL);
    CHECK(hash_bytes(std::string(168, 'a')).value() == 0xc22e11586ULL);
    CHECK(hash_bytes(std::string(169, 'a')).value() == 0x09fc23f3aULL);
    CHECK(hash_bytes(std::string(1000000, 'a')).value() == 0x9d222c79cULL);
}

TEST_CASE("hash_bytes agrees with OpenSSL on random inputs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> data(rng() % 700);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        REQUIRE(hash_bytes(data).value() == openssl_digest36(data));
    }
}

TEST_CASE("Shake128 incremental updates match one-shot") {
    std::vector<std::uint8_t> data(1000);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i * 31);
    std::array<std::uint8_t, 40> whole{}, pieces{};
    {
        Shake128 xof;
        xof.update(data);
        xof.squeeze(whole);
    }
    {
        Shake128 xof;
        std::span<const std::uint8_t> s(data);
        xof.update(s.subspan(0, 1));
        xof.update(s.subspan(1, 200));
        xof.update(s.subspan(201));
        xof.squeeze(std::span(pieces).first(3));
        xof.squeeze(std::span(pieces).subspan(3));
    }
    CHECK(whole == pieces);
}

TEST_CASE("hash_file streams file content") {
    testing::TempDir dir;
    const auto empty = dir / "empty.c";
    std::ofstream(empty).close();
    CHECK(hash_file(empty).value() == 0x7f9c2ba4eULL);

    const auto abc = dir / "abc.c";
    std::ofstream(abc, std::ios::binary) << "abc";
    CHECK(hash_file(abc) == hash_bytes("abc"));

    // Identical content under different names hashes identically.
    const auto copy = dir / "copy.c";
    std::ofstream(copy, std::ios::binary) << "abc";
    CHECK(hash_file(copy) == hash_file(abc));

    // Multi-block file, larger than the internal read buffer.
    const auto big = dir / "big.c";
    std::string content(200000, 'a');
    std::ofstream(big, std::ios::binary) << content;
    CHECK(hash_file(big) == hash_bytes(content));

    try {
        hash_file(dir / "missing.c");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
        CHECK(std::string(e.what()).find("missing.c") != std::string::npos);
    }
}

TEST_CASE("to_hex renders left-aligned 10 characters") {
    CHECK(to_hex(Digest36(0x7f9c2ba4eULL)) == "7f9c2ba4e0");
    CHECK(to_hex(Digest36(0)) == "0000000000");
    CHECK(to_hex(Digest36(0xfffffffffULL)) == "fffffffff0");
}

TEST_CASE("from_hex parses and validates") {
    CHECK(from_hex("7f9c2ba4e0").value() == 0x7f9c2ba4eULL);
    CHECK(from_hex("7F9C2BA4E0").value() == 0x7f9c2ba4eULL);

    auto kind_of = [](std::string_view s) {
        try {
            from_hex(s);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;  // sentinel: no error raised
    };
    CHECK(kind_of("7f9c2ba4e1") == ErrorKind::Parse);
    CHECK(kind_of("7f9c2ba4e") == ErrorKind::Parse);
    CHECK(kind_of("7f9c2ba4e00") == ErrorKind::Parse);
    CHECK(kind_of("7f9c2ba4g0") == ErrorKind::Parse);
    CHECK(kind_of("") == ErrorKind::Parse);
}

TEST_CASE("hex round trip and index slicing hold for random digests") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        const Digest36 d = testing::random_digest(rng);
        REQUIRE(from_hex(to_hex(d)) == d);
        const IndexPair idx = indices(d);
        REQUIRE(idx.hi < (1U << 18));
        REQUIRE(idx.lo < (1U << 18));
        REQUIRE(((std::uint64_t{idx.hi} << 18) | idx.lo) == d.value());
    }
}

TEST_CASE("indices slices the high and low 18 bits") {
    CHECK(indices(Digest36(0)) == IndexPair{0, 0});
    CHECK(indices(Digest36(0xfffffffffULL)) == IndexPair{(1U << 18) - 1, (1U << 18) - 1});
    // Expected values from an independent bit-slicing script.
    CHECK(indices(Digest36(0x7f9c2ba4eULL)) == IndexPair{130672, 178766});
}

TEST_CASE("Digest36 keeps only 36 bits and orders by value") {
    CHECK(Digest36(0xF000000000ULL).value() == 0);
    CHECK(Digest36(1) < Digest36(2));
    CHECK(Digest36(5) == Digest36(5));
}
