#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/jsonl.hpp"

namespace nonins::corpus {

/// One raw corpus text. `id` is a content hash of `text`, so re-ingesting the
/// same text always yields the same id.
struct Document {
    std::string id;
    std::string text;
    std::size_t word_count = 0;
    std::string source;
};

/// Hex SHA-256 prefix (128 bits) of the UTF-8 text.
std::string content_id(std::string_view text);
Document make_document(std::string text, std::string source);

enum class Format { plain_dir, jsonl };
Format parse_format(std::string_view name);
std::string_view to_string(Format format);

struct LoadOptions {
    Format format = Format::jsonl;
    bool strict = false;
    /// Shorter documents cannot be halved with quarter bounds.
    std::size_t min_words = 4;
};

struct LoadStats {
    std::size_t records = 0;
    std::size_t yielded = 0;
    std::size_t skipped_empty = 0;
    std::size_t skipped_short = 0;
    std::size_t skipped_invalid_utf8 = 0;
    std::size_t malformed = 0;
    std::vector<std::string> warnings;
};

/// Single-pass lazy reader over a jsonl file or a directory of text files.
/// Directory entries are visited in lexicographic path order.
class CorpusReader {
public:
    CorpusReader(const fs::path& path, LoadOptions options);

    std::optional<Document> next();
    const LoadStats& stats() const noexcept { return stats_; }

private:
    std::optional<Document> accept(std::string text, std::string source);

    fs::path path_;
    LoadOptions options_;
    LoadStats stats_;
    std::ifstream jsonl_;
    std::size_t line_no_ = 0;
    std::vector<fs::path> files_;
    std::size_t file_index_ = 0;
};

std::vector<Document> load_corpus(const fs::path& path, const LoadOptions& options,
                                  LoadStats* stats = nullptr);

/// Draws `n` distinct documents uniformly without replacement (partial
/// Fisher-Yates over the id-deduplicated corpus). Output order is the draw
/// order and is fully determined by (corpus, n, seed).
std::vector<Document> sample_uniform(std::vector<Document> corpus, std::size_t n, std::uint64_t seed,
                                     std::size_t* duplicates_dropped = nullptr);

json to_json(const Document& doc);
Document document_from_json(const json& j);
/// Sample manifest row: {id, word_count, source}.
json manifest_record(const Document& doc);

}  // namespace nonins::corpus
