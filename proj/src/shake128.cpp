#include "abom/shake128.hpp"

#include <bit>
#include <cassert>

namespace abom {
namespace {

constexpr std::array<std::uint64_t, 24> round_constants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Lane visiting order and rotation amounts of the combined rho/pi step.
constexpr std::array<int, 24> pi_lanes = {10, 7,  11, 17, 18, 3,  5,  16,
                                          8,  21, 24, 4,  15, 23, 19, 13,
                                          12, 2,  20, 14, 22, 9,  6,  1};
constexpr std::array<int, 24> rho_offsets = {1,  3,  6,  10, 15, 21, 28, 36,
                                             45, 55, 2,  14, 27, 41, 56, 8,
                                             25, 43, 62, 18, 39, 61, 20, 44};

void keccak_f1600(std::array<std::uint64_t, 25>& a) noexcept {
    for (std::uint64_t rc : round_constants) {
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x) {
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        }
        for (int x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) {
                a[y + x] ^= d;
            }
        }

        std::uint64_t carried = a[1];
        for (int i = 0; i < 24; ++i) {
            const int lane = pi_lanes[i];
            const std::uint64_t next = a[lane];
            a[lane] = std::rotl(carried, rho_offsets[i]);
            carried = next;
        }

        for (int y = 0; y < 25; y += 5) {
            std::uint64_t row[5];
            for (int x = 0; x < 5; ++x) {
                row[x] = a[y + x];
            }
            for (int x = 0; x < 5; ++x) {
                a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
            }
        }

        a[0] ^= rc;
    }
}

inline void xor_byte(std::array<std::uint64_t, 25>& state, std::size_t pos,
                     std::uint8_t byte) noexcept {
    state[pos / 8] ^= static_cast<std::uint64_t>(byte) << (8 * (pos % 8));
}

inline std::uint8_t read_byte(const std::array<std::uint64_t, 25>& state,
                              std::size_t pos) noexcept {
    return static_cast<std::uint8_t>(state[pos / 8] >> (8 * (pos % 8)));
}

}  // namespace

Shake128::Shake128() noexcept = default;

void Shake128::update(std::span<const std::uint8_t> data) noexcept {
    assert(!squeezing_);
    for (std::uint8_t byte : data) {
        xor_byte(state_, position_++, byte);
        if (position_ == rate_bytes) {
            keccak_f1600(state_);
            position_ = 0;
        }
    }
}

void Shake128::finish() noexcept {
    // SHAKE domain separation bits 1111 followed by pad10*1.
    xor_byte(state_, position_, 0x1F);
    xor_byte(state_, rate_bytes - 1, 0x80);
    keccak_f1600(state_);
    position_ = 0;
    squeezing_ = true;
}

void Shake128::squeeze(std::span<std::uint8_t> out) noexcept {
    if (!squeezing_) {
        finish();
    }
    for (std::uint8_t& byte : out) {
        if (position_ == rate_bytes) {
            keccak_f1600(state_);
            position_ = 0;
        }
        byte = read_byte(state_, position_++);
    }
}

}  // namespace abom
