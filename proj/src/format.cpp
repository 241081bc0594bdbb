#include "abom/format.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "abom/coder.hpp"
#include "abom/error.hpp"

namespace abom {
namespace {

void put_le(std::vector<std::uint8_t>& out, std::size_t offset, std::uint64_t value, int width) {
    for (int i = 0; i < width; ++i) {
        out[offset + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value >> (8 * i));
    }
}

std::uint64_t get_le(std::span<const std::uint8_t> data, std::size_t offset, int width) {
    std::uint64_t value = 0;
    for (int i = width - 1; i >= 0; --i) {
        value = (value << 8) | data[offset + static_cast<std::size_t>(i)];
    }
    return value;
}

}  // namespace

bool has_abom_magic(std::span<const std::uint8_t> data) noexcept {
    return data.size() >= 4 && std::equal(std::begin(wire::magic), std::end(wire::magic),
                                           data.begin());
}

std::vector<std::uint8_t> serialize(const AbomDocument& doc) {
    const auto filters = doc.chain.filters();
    if (filters.size() > FilterParams::max_chain_length) {
        throw Error(ErrorKind::Capacity, "document holds more than 65535 filters");
    }

    std::vector<std::uint64_t> concatenated;
    concatenated.reserve(filters.size() * BloomFilter::word_count);
    for (const BloomFilter& f : filters) {
        concatenated.insert(concatenated.end(), f.words().begin(), f.words().end());
    }
    const BitView bits{concatenated, filters.size() * FilterParams::m};
    const ArithModel model = model_from_bits(bits);
    const std::vector<std::uint8_t> payload = encode(bits, model);
    if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::Capacity, "payload exceeds 2^32-1 bytes");
    }

    std::vector<std::uint8_t> out(wire::header_size + payload.size(), 0);
    std::copy(std::begin(wire::magic), std::end(wire::magic), out.begin());
    out[wire::version_offset] = doc.version;
    put_le(out, wire::count_offset, filters.size(), 2);
    put_le(out, wire::model_offset, model.p1_q(), 4);
    put_le(out, wire::length_offset, payload.size(), 4);
    std::copy(payload.begin(), payload.end(), out.begin() + wire::header_size);
    return out;
}

AbomDocument parse(std::span<const std::uint8_t> data) {
    if (!has_abom_magic(data)) {
        throw Error(ErrorKind::NotAnAbom, "not an ABOM: magic word missing");
    }
    if (data.size() < wire::header_size) {
        throw Error(ErrorKind::Truncated, "ABOM header truncated (" +
                                              std::to_string(data.size()) + " bytes)");
    }
    const std::uint8_t version = data[wire::version_offset];
    if (version != wire::version) {
        throw Error(ErrorKind::UnsupportedVersion,
                    "unsupported ABOM protocol version " + std::to_string(version));
    }
    const auto count = static_cast<std::size_t>(get_le(data, wire::count_offset, 2));
    if (count == 0) {
        throw Error(ErrorKind::Malformed, "ABOM declares zero filters");
    }
    const auto p1_q = static_cast<std::uint32_t>(get_le(data, wire::model_offset, 4));
    if (p1_q < ArithModel::min_p1 || p1_q > ArithModel::max_p1) {
        throw Error(ErrorKind::Malformed,
                    "ABOM arithmetic model out of range: " + std::to_string(p1_q));
    }
    const auto declared = get_le(data, wire::length_offset, 4);
    const std::size_t remaining = data.size() - wire::header_size;
    if (declared != remaining) {
        throw Error(ErrorKind::Truncated, "ABOM payload length " + std::to_string(declared) +
                                              " does not match " + std::to_string(remaining) +
                                              " remaining bytes");
    }

    std::vector<std::uint64_t> words =
        decode(data.subspan(wire::header_size), ArithModel(p1_q), count * FilterParams::m);

    std::vector<BloomFilter> filters;
    filters.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto first = words.begin() + static_cast<std::ptrdiff_t>(i * BloomFilter::word_count);
        filters.push_back(BloomFilter::from_words(
            std::vector<std::uint64_t>(first, first + BloomFilter::word_count)));
    }
    return AbomDocument{version, FilterChain::from_filters(std::move(filters))};
}

}  // namespace abom
