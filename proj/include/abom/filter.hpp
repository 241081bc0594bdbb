#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "abom/digest.hpp"

namespace abom {

/// Fixed parameters shared by every filter; they are never serialized.
struct FilterParams {
    static constexpr std::uint32_t m = std::uint32_t{1} << 18;
    static constexpr std::uint32_t k = 2;
    static constexpr double n_max = 1028.0;
    static constexpr double f_max = 1.0 / 16384.0;
    static constexpr std::size_t max_chain_length = 65535;
};

/// Expected insertion count given the number of set bits,
/// -(m/k) * ln(1 - ones/m). Infinite for a full filter.
double estimate_n_from_ones(std::uint32_t ones) noexcept;

/// True when a filter holding `ones` set bits is still within n_max.
inline bool within_capacity(std::uint32_t ones) noexcept {
    return estimate_n_from_ones(ones) <= FilterParams::n_max;
}

class BloomFilter {
public:
    static constexpr std::size_t word_count = FilterParams::m / 64;

    BloomFilter();

    /// Adopts a raw bit array (bit i lives in words[i / 64] at position i % 64).
    /// Throws Error(InvalidArgument) unless exactly word_count words are given.
    static BloomFilter from_words(std::vector<std::uint64_t> words);

    /// Returns how many bits flipped 0 -> 1 (0, 1 or 2).
    unsigned insert(Digest36 digest) noexcept;

    /// Number of bits insert(digest) would flip, without mutating.
    unsigned would_set(Digest36 digest) const noexcept;

    bool contains(Digest36 digest) const noexcept;
    bool test(std::uint32_t bit) const noexcept;
    void set(std::uint32_t bit) noexcept;

    std::uint32_t ones() const noexcept { return ones_; }
    double estimate_n() const noexcept { return estimate_n_from_ones(ones_); }

    /// Population count of (*this | other).
    std::uint32_t union_ones(const BloomFilter& other) const noexcept;

    BloomFilter& operator|=(const BloomFilter& other) noexcept;

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    friend bool operator==(const BloomFilter& a, const BloomFilter& b) noexcept {
        return a.ones_ == b.ones_ && a.words_ == b.words_;
    }

private:
    std::vector<std::uint64_t> words_;
    std::uint32_t ones_ = 0;
};

BloomFilter union_filters(const BloomFilter& a, const BloomFilter& b);

/// Ordered, non-empty sequence of filters in creation order. New filters are
/// opened when the estimated occupancy of the last one would pass n_max.
class FilterChain {
public:
    /// A chain holding one empty filter.
    FilterChain();

    /// Throws Error(InvalidArgument) if empty, Error(Capacity) if longer than
    /// the 16-bit count field allows.
    static FilterChain from_filters(std::vector<BloomFilter> filters);

    /// No-op if any filter already answers true for the digest.
    /// Throws Error(Capacity) when a new filter would exceed the limit.
    void insert(Digest36 digest);

    bool contains(Digest36 digest) const noexcept;

    /// First-fit merge of every filter of `other`, in order, into the first
    /// filter whose OR stays within n_max; appended otherwise.
    void merge(const FilterChain& other);

    std::span<const BloomFilter> filters() const noexcept { return filters_; }
    std::size_t size() const noexcept { return filters_.size(); }

    friend bool operator==(const FilterChain&, const FilterChain&) = default;

private:
    explicit FilterChain(std::vector<BloomFilter> filters) : filters_(std::move(filters)) {}

    void append(BloomFilter filter);

    std::vector<BloomFilter> filters_;
};

FilterChain chain_union(const FilterChain& a, const FilterChain& b);

}  // namespace abom
