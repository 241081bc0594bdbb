#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace abom {

/// Incremental SHAKE128 extendable-output function (FIPS 202).
///
/// Absorb with update(), then squeeze() any number of output bytes. Once
/// squeezing has started further update() calls are not allowed.
class Shake128 {
public:
    static constexpr std::size_t rate_bytes = 168;

    Shake128() noexcept;

    void update(std::span<const std::uint8_t> data) noexcept;
    void squeeze(std::span<std::uint8_t> out) noexcept;

private:
    void finish() noexcept;

    std::array<std::uint64_t, 25> state_{};
    std::size_t position_ = 0;
    bool squeezing_ = false;
};

}  // namespace abom
