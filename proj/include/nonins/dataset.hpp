#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/jsonl.hpp"
#include "nonins/splitter.hpp"
#include "nonins/teacher.hpp"

namespace nonins::dataset {

/// prompt is the split prefix and completion the teacher continuation, both
/// verbatim. No template tokens are added.
struct DatasetExample {
    std::string doc_id;
    std::string prompt;
    std::string completion;
    std::string teacher;
};

enum class Format { vanilla_sft_jsonl, alpaca_jsonl, raw_text };
Format parse_format(std::string_view name);
std::string_view to_string(Format format);

/// Joins completions to their splits by doc_id, in completion order.
std::vector<DatasetExample> assemble(const std::vector<splitter::SplitRecord>& splits,
                                     const std::vector<teacher::CompletionRecord>& completions);

struct ExportResult {
    std::size_t count = 0;
    std::size_t skipped_empty = 0;
    std::vector<std::string> warnings;
};

/// Writes one line per example plus a `<path>.ids` file listing doc_ids in
/// the same order. Examples with an empty completion are skipped.
///   vanilla-sft-jsonl: {"prompt", "completion"}
///   alpaca-jsonl:      {"instruction": prompt, "input": "", "output": completion}
///   raw-text:          prompt + completion, line breaks folded to spaces
ExportResult export_dataset(const std::vector<DatasetExample>& examples, Format format, const fs::path& path);

/// Parses an exported jsonl file back into examples (doc_ids from `.ids`).
std::vector<DatasetExample> read_export(const fs::path& path, Format format);

fs::path ids_path(const fs::path& export_path);
fs::path info_path(const fs::path& export_path);

struct DatasetInfo {
    std::string name;
    Format format = Format::vanilla_sft_jsonl;
    std::size_t count = 0;
    std::string teacher;
    std::vector<std::string> filters_applied;
    std::optional<std::uint64_t> seed;
};

json to_json(const DatasetInfo& info);
void write_info(const fs::path& export_path, const DatasetInfo& info);

/// One seeded shuffle; the subset for size s is the first s shuffled
/// examples, so smaller subsets are contained in larger ones.
std::vector<std::vector<DatasetExample>> subset(const std::vector<DatasetExample>& examples,
                                                const std::vector<std::size_t>& sizes, std::uint64_t seed);

json example_json(const DatasetExample& e);
DatasetExample example_from_json(const json& j);

}  // namespace nonins::dataset
