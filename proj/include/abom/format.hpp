#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "abom/filter.hpp"

namespace abom {

/// Byte layout of the serialized header. All integers are little-endian.
///
///   offset  size  field
///   0       4     magic "ABOM"
///   4       1     protocol version (1)
///   5       2     number of filters
///   7       4     arithmetic model, p(1) * (2^32 - 1)
///   11      4     payload byte length
///   15      -     coded payload: every filter's bits concatenated in order
namespace wire {
inline constexpr std::uint8_t magic[4] = {'A', 'B', 'O', 'M'};
inline constexpr std::uint8_t version = 1;
inline constexpr std::size_t version_offset = 4;
inline constexpr std::size_t count_offset = 5;
inline constexpr std::size_t model_offset = 7;
inline constexpr std::size_t length_offset = 11;
inline constexpr std::size_t header_size = 15;
}  // namespace wire

struct AbomDocument {
    std::uint8_t version = wire::version;
    FilterChain chain;

    friend bool operator==(const AbomDocument&, const AbomDocument&) = default;
};

std::vector<std::uint8_t> serialize(const AbomDocument& doc);

/// Strict parse: the declared payload length must match the remaining bytes
/// exactly. Failures raise Error with kind NotAnAbom, UnsupportedVersion,
/// Truncated, Malformed or CorruptPayload.
AbomDocument parse(std::span<const std::uint8_t> data);

/// True if the bytes start with the ABOM magic word.
bool has_abom_magic(std::span<const std::uint8_t> data) noexcept;

}  // namespace abom
