#include "abom/coder.hpp"

#include <algorithm>
#include <bit>

#include "abom/error.hpp"

// Integer range coder: 32-bit range, low kept in a 64-bit register so a carry
// out of the 32-bit window is visible and can be pushed back into bytes that
// were already emitted. Renormalization shifts out one byte whenever the
// range drops below 2^24.

namespace abom {
namespace {

__extension__ using uint128 = unsigned __int128;

constexpr std::uint64_t window = 0xFFFFFFFFu;
constexpr std::uint32_t renorm_below = std::uint32_t{1} << 24;

inline std::uint32_t split_point(std::uint32_t range, std::uint64_t zero_weight) noexcept {
    const std::uint64_t split = (static_cast<std::uint64_t>(range) * zero_weight) / window;
    return static_cast<std::uint32_t>(
        std::clamp<std::uint64_t>(split, 1, static_cast<std::uint64_t>(range) - 1));
}

class Encoder {
public:
    explicit Encoder(ArithModel model) : zero_weight_(window - model.p1_q()) {}

    void put(bool bit) {
        const std::uint32_t split = split_point(range_, zero_weight_);
        if (bit) {
            low_ += split;
            range_ -= split;
        } else {
            range_ = split;
        }
        if (low_ > window) {
            propagate_carry();
            low_ &= window;
        }
        while (range_ < renorm_below) {
            out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
            low_ = (low_ << 8) & window;
            range_ <<= 8;
        }
    }

    std::vector<std::uint8_t> finish() {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(low_ >> shift));
        }
        return std::move(out_);
    }

private:
    void propagate_carry() {
        for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
            if (++*it != 0) {
                return;
            }
        }
    }

    std::uint64_t zero_weight_;
    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::vector<std::uint8_t> out_;
};

[[noreturn]] void corrupt(const char* what) {
    throw Error(ErrorKind::CorruptPayload, std::string("corrupt payload: ") + what);
}

}  // namespace

ArithModel::ArithModel(std::uint32_t p1_q) : p1_q_(p1_q) {
    if (p1_q < min_p1 || p1_q > max_p1) {
        throw Error(ErrorKind::InvalidArgument,
                    "arithmetic model p1 must lie in [1, 2^32-2], got " + std::to_string(p1_q));
    }
}

ArithModel model_from_bits(BitView bits) {
    if (bits.size == 0) {
        throw Error(ErrorKind::InvalidArgument, "cannot model an empty bit sequence");
    }
    std::uint64_t ones = 0;
    const std::size_t full_words = bits.size / 64;
    for (std::size_t i = 0; i < full_words; ++i) {
        ones += static_cast<std::uint64_t>(std::popcount(bits.words[i]));
    }
    for (std::size_t i = full_words * 64; i < bits.size; ++i) {
        ones += bits[i];
    }
    // Exact half-up rounding of ones * scale / size in 128-bit integers.
    const uint128 numerator = static_cast<uint128>(ones) * window * 2 + bits.size;
    const auto rounded = static_cast<std::uint64_t>(numerator / (static_cast<uint128>(bits.size) * 2));
    return ArithModel(static_cast<std::uint32_t>(
        std::clamp<std::uint64_t>(rounded, ArithModel::min_p1, ArithModel::max_p1)));
}

std::vector<std::uint8_t> encode(BitView bits, ArithModel model) {
    Encoder encoder(model);
    const std::size_t full_words = bits.size / 64;
    for (std::size_t w = 0; w < full_words; ++w) {
        std::uint64_t word = bits.words[w];
        for (int b = 0; b < 64; ++b, word >>= 1) {
            encoder.put(word & 1U);
        }
    }
    for (std::size_t i = full_words * 64; i < bits.size; ++i) {
        encoder.put(bits[i]);
    }
    return encoder.finish();
}

std::vector<std::uint64_t> decode(std::span<const std::uint8_t> data, ArithModel model,
                                  std::size_t bit_len) {
    if (bit_len == 0) {
        throw Error(ErrorKind::InvalidArgument, "decode length must be positive");
    }
    if (data.size() < 4) {
        corrupt("shorter than the coder state");
    }

    const std::uint64_t zero_weight = window - model.p1_q();
    std::uint32_t range = 0xFFFFFFFFu;
    std::uint32_t value = 0;
    std::size_t pos = 0;
    for (; pos < 4; ++pos) {
        value = (value << 8) | data[pos];
    }

    std::vector<std::uint64_t> words((bit_len + 63) / 64, 0);
    for (std::size_t i = 0; i < bit_len; ++i) {
        if (value >= range) {
            corrupt("code value outside the coding interval");
        }
        const std::uint32_t split = split_point(range, zero_weight);
        if (value >= split) {
            words[i / 64] |= std::uint64_t{1} << (i % 64);
            value -= split;
            range -= split;
        } else {
            range = split;
        }
        while (range < renorm_below) {
            if (pos == data.size()) {
                corrupt("input exhausted before all bits were decoded");
            }
            value = (value << 8) | data[pos++];
            range <<= 8;
        }
    }
    if (pos != data.size()) {
        corrupt("trailing bytes after the coded bits");
    }
    if (value != 0) {
        corrupt("final coder state does not match the flushed interval");
    }
    return words;
}

}  // namespace abom
