#include "nonins/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "nonins/error.hpp"
#include "nonins/hash.hpp"
#include "nonins/rng.hpp"
#include "nonins/text.hpp"

namespace nonins::corpus {

std::string content_id(std::string_view text) {
    return sha256_hex(text).substr(0, 32);
}

Document make_document(std::string text, std::string source) {
    Document doc;
    doc.id = content_id(text);
    doc.word_count = text::count_words(text);
    doc.text = std::move(text);
    doc.source = std::move(source);
    return doc;
}

Format parse_format(std::string_view name) {
    if (name == "jsonl") return Format::jsonl;
    if (name == "plain-dir") return Format::plain_dir;
    throw Error(ErrorKind::invalid_argument, "unknown corpus format: " + std::string(name));
}

std::string_view to_string(Format format) {
    return format == Format::jsonl ? "jsonl" : "plain-dir";
}

CorpusReader::CorpusReader(const fs::path& path, LoadOptions options)
    : path_(path), options_(options) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorKind::io, "corpus path does not exist: " + path.string());
    if (options_.format == Format::jsonl) {
        jsonl_.open(path, std::ios::binary);
        if (!jsonl_) throw Error(ErrorKind::io, "cannot open " + path.string());
        return;
    }
    if (!fs::is_directory(path)) throw Error(ErrorKind::io, "not a directory: " + path.string());
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file()) files_.push_back(entry.path());
    }
    std::sort(files_.begin(), files_.end());
}

std::optional<Document> CorpusReader::accept(std::string text, std::string source) {
    ++stats_.records;
    if (!text::is_valid_utf8(text)) {
        ++stats_.skipped_invalid_utf8;
        stats_.warnings.push_back(source + ": invalid UTF-8, skipped");
        return std::nullopt;
    }
    Document doc = make_document(std::move(text), std::move(source));
    if (doc.word_count == 0) {
        ++stats_.skipped_empty;
        return std::nullopt;
    }
    if (doc.word_count < options_.min_words) {
        ++stats_.skipped_short;
        return std::nullopt;
    }
    ++stats_.yielded;
    return doc;
}

std::optional<Document> CorpusReader::next() {
    if (options_.format == Format::plain_dir) {
        while (file_index_ < files_.size()) {
            const fs::path& file = files_[file_index_++];
            std::string source = fs::relative(file, path_).generic_string();
            if (auto doc = accept(read_file(file), std::move(source))) return doc;
        }
        return std::nullopt;
    }

    std::string line;
    while (std::getline(jsonl_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path_.filename().string() + ":" + std::to_string(line_no_);
        std::string problem;
        json record;
        try {
            record = json::parse(line);
            if (!record.is_object() || !record.contains("text") || !record["text"].is_string()) {
                problem = "record has no string `text` field";
            }
        } catch (const json::parse_error& e) {
            problem = e.what();
        }
        if (!problem.empty()) {
            if (options_.strict) throw Error(ErrorKind::parse, where + ": " + problem);
            ++stats_.malformed;
            stats_.warnings.push_back(where + ": " + problem);
            continue;
        }
        std::string source = where;
        if (auto it = record.find("source"); it != record.end() && it->is_string()) source = *it;
        if (auto doc = accept(record["text"].get<std::string>(), std::move(source))) return doc;
    }
    return std::nullopt;
}

std::vector<Document> load_corpus(const fs::path& path, const LoadOptions& options, LoadStats* stats) {
    CorpusReader reader(path, options);
    std::vector<Document> docs;
    while (auto doc = reader.next()) docs.push_back(std::move(*doc));
    if (stats) *stats = reader.stats();
    return docs;
}

std::vector<Document> sample_uniform(std::vector<Document> corpus, std::size_t n, std::uint64_t seed,
                                     std::size_t* duplicates_dropped) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "sample size must be positive");

    std::unordered_set<std::string> seen;
    std::vector<Document> unique;
    unique.reserve(corpus.size());
    for (auto& doc : corpus) {
        if (seen.insert(doc.id).second) unique.push_back(std::move(doc));
    }
    if (duplicates_dropped) *duplicates_dropped = corpus.size() - unique.size();
    if (unique.size() < n) {
        throw Error(ErrorKind::invalid_argument, "corpus has " + std::to_string(unique.size()) +
                                                     " distinct documents, fewer than requested " +
                                                     std::to_string(n));
    }

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(unique.size() - i));
        std::swap(unique[i], unique[j]);
    }
    unique.resize(n);
    return unique;
}

json to_json(const Document& doc) {
    return {{"id", doc.id}, {"text", doc.text}, {"word_count", doc.word_count}, {"source", doc.source}};
}

Document document_from_json(const json& j) {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.word_count = j.at("word_count").get<std::size_t>();
    doc.source = j.value("source", "");
    return doc;
}

json manifest_record(const Document& doc) {
    return {{"id", doc.id}, {"word_count", doc.word_count}, {"source", doc.source}};
}

}  // namespace nonins::corpus
