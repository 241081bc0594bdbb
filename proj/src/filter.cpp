#include "abom/filter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "abom/error.hpp"

namespace abom {

double estimate_n_from_ones(std::uint32_t ones) noexcept {
    constexpr double m = FilterParams::m;
    constexpr double k = FilterParams::k;
    if (ones >= FilterParams::m) {
        return std::numeric_limits<double>::infinity();
    }
    return -(m / k) * std::log1p(-static_cast<double>(ones) / m);
}

BloomFilter::BloomFilter() : words_(word_count, 0) {}

BloomFilter BloomFilter::from_words(std::vector<std::uint64_t> words) {
    if (words.size() != word_count) {
        throw Error(ErrorKind::InvalidArgument,
                    "filter bit array must hold " + std::to_string(word_count) + " words");
    }
    BloomFilter filter;
    filter.words_ = std::move(words);
    std::uint32_t ones = 0;
    for (std::uint64_t w : filter.words_) {
        ones += static_cast<std::uint32_t>(std::popcount(w));
    }
    filter.ones_ = ones;
    return filter;
}

bool BloomFilter::test(std::uint32_t bit) const noexcept {
    return (words_[bit / 64] >> (bit % 64)) & 1U;
}

void BloomFilter::set(std::uint32_t bit) noexcept {
    std::uint64_t& word = words_[bit / 64];
    const std::uint64_t flag = std::uint64_t{1} << (bit % 64);
    if ((word & flag) == 0) {
        word |= flag;
        ++ones_;
    }
}

unsigned BloomFilter::would_set(Digest36 digest) const noexcept {
    const IndexPair idx = indices(digest);
    unsigned count = test(idx.hi) ? 0 : 1;
    if (idx.lo != idx.hi && !test(idx.lo)) {
        ++count;
    }
    return count;
}

unsigned BloomFilter::insert(Digest36 digest) noexcept {
    const std::uint32_t before = ones_;
    const IndexPair idx = indices(digest);
    set(idx.hi);
    set(idx.lo);
    return ones_ - before;
}

bool BloomFilter::contains(Digest36 digest) const noexcept {
    const IndexPair idx = indices(digest);
    return test(idx.hi) && test(idx.lo);
}

std::uint32_t BloomFilter::union_ones(const BloomFilter& other) const noexcept {
    std::uint32_t ones = 0;
    for (std::size_t i = 0; i < word_count; ++i) {
        ones += static_cast<std::uint32_t>(std::popcount(words_[i] | other.words_[i]));
    }
    return ones;
}

BloomFilter& BloomFilter::operator|=(const BloomFilter& other) noexcept {
    std::uint32_t ones = 0;
    for (std::size_t i = 0; i < word_count; ++i) {
        words_[i] |= other.words_[i];
        ones += static_cast<std::uint32_t>(std::popcount(words_[i]));
    }
    ones_ = ones;
    return *this;
}

BloomFilter union_filters(const BloomFilter& a, const BloomFilter& b) {
    BloomFilter result = a;
    result |= b;
    return result;
}

FilterChain::FilterChain() : filters_(1) {}

FilterChain FilterChain::from_filters(std::vector<BloomFilter> filters) {
    if (filters.empty()) {
        throw Error(ErrorKind::InvalidArgument, "a filter chain needs at least one filter");
    }
    if (filters.size() > FilterParams::max_chain_length) {
        throw Error(ErrorKind::Capacity, "filter chain exceeds 65535 filters");
    }
    return FilterChain(std::move(filters));
}

void FilterChain::append(BloomFilter filter) {
    if (filters_.size() >= FilterParams::max_chain_length) {
        throw Error(ErrorKind::Capacity, "filter chain exceeds 65535 filters");
    }
    filters_.push_back(std::move(filter));
}

void FilterChain::insert(Digest36 digest) {
    if (contains(digest)) {
        return;
    }
    BloomFilter& last = filters_.back();
    if (within_capacity(last.ones() + last.would_set(digest))) {
        last.insert(digest);
        return;
    }
    BloomFilter fresh;
    fresh.insert(digest);
    append(std::move(fresh));
}

bool FilterChain::contains(Digest36 digest) const noexcept {
    return std::any_of(filters_.begin(), filters_.end(),
                       [digest](const BloomFilter& f) { return f.contains(digest); });
}

void FilterChain::merge(const FilterChain& other) {
    if (&other == this) {
        const FilterChain copy = other;
        merge(copy);
        return;
    }
    for (const BloomFilter& incoming : other.filters_) {
        auto target = std::find_if(filters_.begin(), filters_.end(),
                                   [&incoming](const BloomFilter& existing) {
                                       return within_capacity(existing.union_ones(incoming));
                                   });
        if (target != filters_.end()) {
            *target |= incoming;
        } else {
            append(incoming);
        }
    }
}

FilterChain chain_union(const FilterChain& a, const FilterChain& b) {
    FilterChain result = a;
    result.merge(b);
    return result;
}

}  // namespace abom
