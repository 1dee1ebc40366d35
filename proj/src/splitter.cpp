#include "nonins/splitter.hpp"

#include "nonins/error.hpp"
#include "nonins/text.hpp"

namespace nonins::splitter {

MidpointBounds midpoint_bounds(std::size_t wc) {
    if (wc < kMinWords) {
        throw Error(ErrorKind::invalid_argument,
                    "document too short to split: " + std::to_string(wc) + " words (minimum 4)");
    }
    return {(wc + 3) / 4, (3 * wc) / 4};
}

std::size_t choose_midpoint(std::size_t wc, Rng& rng) {
    const MidpointBounds b = midpoint_bounds(wc);
    return static_cast<std::size_t>(rng.uniform_between(b.lo, b.hi));
}

SplitRecord split_at(const corpus::Document& doc, std::size_t k) {
    const auto spans = text::word_spans(doc.text);
    if (k == 0 || k > spans.size()) {
        throw Error(ErrorKind::invalid_argument, "split index " + std::to_string(k) + " outside 1.." +
                                                     std::to_string(spans.size()));
    }
    const std::size_t cut = spans[k - 1].end;
    SplitRecord r;
    r.doc_id = doc.id;
    r.prefix = doc.text.substr(0, cut);
    r.suffix_original = doc.text.substr(cut);
    r.k = k;
    r.wc = spans.size();
    return r;
}

SplitRecord split(const corpus::Document& doc, std::uint64_t seed) {
    const std::size_t wc = text::count_words(doc.text);
    Rng rng = Rng::derive(seed, doc.id);
    SplitRecord r = split_at(doc, choose_midpoint(wc, rng));
    r.seed = seed;
    return r;
}

json to_json(const SplitRecord& r) {
    return {{"doc_id", r.doc_id}, {"k", r.k},           {"wc", r.wc},
            {"seed", r.seed},     {"prefix", r.prefix}, {"suffix_original", r.suffix_original}};
}

SplitRecord split_from_json(const json& j) {
    SplitRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.wc = j.at("wc").get<std::size_t>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.prefix = j.at("prefix").get<std::string>();
    r.suffix_original = j.at("suffix_original").get<std::string>();
    return r;
}

}  // namespace nonins::splitter
