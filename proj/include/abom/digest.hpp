#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace abom {

/// The first 36 bits of SHAKE128 over a source file's raw bytes. This is the
/// unit of membership stored in every filter.
class Digest36 {
public:
    static constexpr unsigned bits = 36;
    static constexpr std::uint64_t mask = (std::uint64_t{1} << bits) - 1;

    constexpr Digest36() noexcept = default;

    /// Bits above the low 36 are discarded.
    constexpr explicit Digest36(std::uint64_t value) noexcept : value_(value & mask) {}

    constexpr std::uint64_t value() const noexcept { return value_; }

    friend constexpr auto operator<=>(Digest36, Digest36) noexcept = default;

private:
    std::uint64_t value_ = 0;
};

/// Two 18-bit filter indices sliced out of a digest.
struct IndexPair {
    std::uint32_t hi = 0;
    std::uint32_t lo = 0;

    friend constexpr bool operator==(IndexPair, IndexPair) noexcept = default;
};

Digest36 hash_bytes(std::span<const std::uint8_t> data) noexcept;
Digest36 hash_bytes(std::string_view data) noexcept;

/// Streams the file in fixed-size blocks. Throws Error(Io) naming the path.
Digest36 hash_file(const std::filesystem::path& path);

/// Ten lowercase hex characters: the digest left-aligned in 40 bits, so the
/// final nibble is always zero ("7f9c2ba4e0").
std::string to_hex(Digest36 digest);

/// Inverse of to_hex; case-insensitive. Throws Error(Parse).
Digest36 from_hex(std::string_view text);

constexpr IndexPair indices(Digest36 digest) noexcept {
    constexpr std::uint64_t slice_mask = (std::uint64_t{1} << 18) - 1;
    return {static_cast<std::uint32_t>(digest.value() >> 18),
            static_cast<std::uint32_t>(digest.value() & slice_mask)};
}

}  // namespace abom
