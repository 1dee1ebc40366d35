#include "nonins/dataset.hpp"

#include <unordered_map>
#include <unordered_set>

#include "nonins/error.hpp"
#include "nonins/rng.hpp"

namespace nonins::dataset {

Format parse_format(std::string_view name) {
    if (name == "vanilla-sft-jsonl") return Format::vanilla_sft_jsonl;
    if (name == "alpaca-jsonl") return Format::alpaca_jsonl;
    if (name == "raw-text") return Format::raw_text;
    throw Error(ErrorKind::invalid_argument, "unknown export format: " + std::string(name));
}

std::string_view to_string(Format format) {
    switch (format) {
        case Format::vanilla_sft_jsonl: return "vanilla-sft-jsonl";
        case Format::alpaca_jsonl: return "alpaca-jsonl";
        case Format::raw_text: return "raw-text";
    }
    return "vanilla-sft-jsonl";
}

std::vector<DatasetExample> assemble(const std::vector<splitter::SplitRecord>& splits,
                                     const std::vector<teacher::CompletionRecord>& completions) {
    std::unordered_map<std::string, const splitter::SplitRecord*> by_id;
    for (const auto& s : splits) by_id.emplace(s.doc_id, &s);

    std::unordered_set<std::string> seen;
    std::vector<DatasetExample> out;
    out.reserve(completions.size());
    for (const auto& c : completions) {
        auto it = by_id.find(c.doc_id);
        if (it == by_id.end()) throw Error(ErrorKind::missing_input, "completion for unknown doc_id " + c.doc_id);
        if (!seen.insert(c.doc_id).second) throw Error(ErrorKind::invalid_argument, "duplicate doc_id " + c.doc_id);
        out.push_back({c.doc_id, it->second->prefix, c.continuation, c.teacher.model_id});
    }
    return out;
}

fs::path ids_path(const fs::path& export_path) {
    fs::path p = export_path;
    p += ".ids";
    return p;
}

fs::path info_path(const fs::path& export_path) {
    fs::path p = export_path;
    p += ".info.json";
    return p;
}

namespace {

std::string fold_line_breaks(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r' || s[i] == '\n') {
            if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

json format_record(const DatasetExample& e, Format format) {
    if (format == Format::alpaca_jsonl) {
        return {{"instruction", e.prompt}, {"input", ""}, {"output", e.completion}};
    }
    return {{"prompt", e.prompt}, {"completion", e.completion}};
}

}  // namespace

ExportResult export_dataset(const std::vector<DatasetExample>& examples, Format format, const fs::path& path) {
    if (examples.empty()) throw Error(ErrorKind::invalid_argument, "nothing to export");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    std::ofstream ids(ids_path(path), std::ios::binary | std::ios::trunc);
    if (!out || !ids) throw Error(ErrorKind::io, "cannot write " + path.string());

    ExportResult result;
    for (const auto& e : examples) {
        if (e.completion.empty()) {
            ++result.skipped_empty;
            result.warnings.push_back("skipped " + e.doc_id + ": empty completion");
            continue;
        }
        if (format == Format::raw_text) {
            out << fold_line_breaks(e.prompt + e.completion) << '\n';
        } else {
            out << canonical_dump(format_record(e, format)) << '\n';
        }
        ids << e.doc_id << '\n';
        ++result.count;
    }
    out.flush();
    ids.flush();
    if (!out || !ids) throw Error(ErrorKind::io, "write failed: " + path.string());
    return result;
}

std::vector<DatasetExample> read_export(const fs::path& path, Format format) {
    if (format == Format::raw_text) throw Error(ErrorKind::invalid_argument, "raw-text exports are not parseable");
    std::vector<DatasetExample> out;
    read_jsonl(path, true, [&](json&& j) {
        DatasetExample e;
        if (format == Format::alpaca_jsonl) {
            e.prompt = j.at("instruction").get<std::string>();
            e.completion = j.at("output").get<std::string>();
        } else {
            e.prompt = j.at("prompt").get<std::string>();
            e.completion = j.at("completion").get<std::string>();
        }
        out.push_back(std::move(e));
    });
    std::ifstream ids(ids_path(path));
    std::string id;
    for (auto& e : out) {
        if (!std::getline(ids, id)) break;
        e.doc_id = id;
    }
    return out;
}

json to_json(const DatasetInfo& info) {
    json j = {{"name", info.name},
              {"format", to_string(info.format)},
              {"count", info.count},
              {"teacher", info.teacher},
              {"filters_applied", info.filters_applied}};
    j["seed"] = info.seed ? json(*info.seed) : json(nullptr);
    return j;
}

void write_info(const fs::path& export_path, const DatasetInfo& info) {
    write_json_file(info_path(export_path), to_json(info));
}

std::vector<std::vector<DatasetExample>> subset(const std::vector<DatasetExample>& examples,
                                                const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    if (sizes.empty()) throw Error(ErrorKind::invalid_argument, "no subset sizes given");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) throw Error(ErrorKind::invalid_argument, "subset sizes must be positive");
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw Error(ErrorKind::invalid_argument, "subset sizes must be strictly ascending");
        }
    }
    if (sizes.back() > examples.size()) {
        throw Error(ErrorKind::invalid_argument, "subset size " + std::to_string(sizes.back()) +
                                                     " exceeds dataset size " + std::to_string(examples.size()));
    }

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_below(i))]);
    }

    std::vector<std::vector<DatasetExample>> out;
    out.reserve(sizes.size());
    for (std::size_t s : sizes) {
        std::vector<DatasetExample> part;
        part.reserve(s);
        for (std::size_t i = 0; i < s; ++i) part.push_back(examples[order[i]]);
        out.push_back(std::move(part));
    }
    return out;
}

json example_json(const DatasetExample& e) {
    return {{"doc_id", e.doc_id}, {"prompt", e.prompt}, {"completion", e.completion}, {"teacher", e.teacher}};
}

DatasetExample example_from_json(const json& j) {
    return {j.at("doc_id").get<std::string>(), j.at("prompt").get<std::string>(),
            j.at("completion").get<std::string>(), j.value("teacher", "")};
}

}  // namespace nonins::dataset
