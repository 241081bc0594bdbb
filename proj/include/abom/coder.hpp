#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace abom {

/// Read-only view of a bit sequence packed LSB-first into 64-bit words:
/// bit i is (words[i / 64] >> (i % 64)) & 1.
struct BitView {
    std::span<const std::uint64_t> words;
    std::size_t size = 0;

    bool operator[](std::size_t i) const noexcept { return (words[i / 64] >> (i % 64)) & 1U; }
};

/// Static probability-of-one model. p1_q / (2^32 - 1) approximates P(bit = 1);
/// the quantized integer is what both coder directions use.
class ArithModel {
public:
    static constexpr std::uint32_t scale = 0xFFFFFFFFu;
    static constexpr std::uint32_t min_p1 = 1;
    static constexpr std::uint32_t max_p1 = scale - 1;

    /// Throws Error(InvalidArgument) outside [min_p1, max_p1].
    explicit ArithModel(std::uint32_t p1_q);

    std::uint32_t p1_q() const noexcept { return p1_q_; }
    double probability_of_one() const noexcept {
        return static_cast<double>(p1_q_) / static_cast<double>(scale);
    }

    friend bool operator==(ArithModel, ArithModel) noexcept = default;

private:
    std::uint32_t p1_q_;
};

/// round(ones / size * (2^32 - 1)) clamped so both symbols stay codable.
/// Throws Error(InvalidArgument) on an empty sequence.
ArithModel model_from_bits(BitView bits);

std::vector<std::uint8_t> encode(BitView bits, ArithModel model);

/// Decodes exactly bit_len bits (packed as in BitView). The whole input must
/// be consumed; running short, leftover bytes, or an impossible coder state
/// raise Error(CorruptPayload). bit_len == 0 raises Error(InvalidArgument).
std::vector<std::uint64_t> decode(std::span<const std::uint8_t> data, ArithModel model,
                                  std::size_t bit_len);

}  // namespace abom
