#pragma once

#include <cstdint>
#include <string>

#include "nonins/corpus.hpp"
#include "nonins/rng.hpp"

namespace nonins::splitter {

/// A document halved after word `k`. `prefix + suffix_original` reproduces
/// the source text byte for byte; whitespace following word k belongs to the
/// suffix.
struct SplitRecord {
    std::string doc_id;
    std::string prefix;
    std::string suffix_original;
    std::size_t k = 0;
    std::size_t wc = 0;
    std::uint64_t seed = 0;
};

struct MidpointBounds {
    std::size_t lo = 0;  // ceil(wc / 4)
    std::size_t hi = 0;  // floor(3 * wc / 4)
};

inline constexpr std::size_t kMinWords = 4;

/// Inclusive bounds for the split word index. Throws for wc < 4.
MidpointBounds midpoint_bounds(std::size_t wc);

/// Uniform draw from midpoint_bounds(wc).
std::size_t choose_midpoint(std::size_t wc, Rng& rng);

/// Splits after word `k` without drawing. k must lie in [1, wc].
SplitRecord split_at(const corpus::Document& doc, std::size_t k);

/// Draws k from a stream derived from (seed, doc.id), so the result does not
/// depend on the order documents are processed in.
SplitRecord split(const corpus::Document& doc, std::uint64_t seed);

json to_json(const SplitRecord& r);
SplitRecord split_from_json(const json& j);

}  // namespace nonins::splitter
