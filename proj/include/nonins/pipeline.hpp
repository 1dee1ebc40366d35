#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/http.hpp"
#include "nonins/jsonl.hpp"
#include "nonins/teacher.hpp"

namespace nonins::pipeline {

enum class Stage {
    sample,
    split,
    complete,
    filter,
    export_dataset,
    subset,
    merge,
    merge_base,
    emit_train,
    eval_mtbench,
    eval_wr,
    report,
};

Stage parse_stage(std::string_view name);
std::string_view to_string(Stage stage);
const std::vector<std::string_view>& stage_names();

/// Fixed layout of a run directory, one subdirectory per stage.
struct RunLayout {
    fs::path root;

    fs::path config() const { return root / "config.json"; }
    fs::path documents() const { return root / "sample" / "documents.jsonl"; }
    fs::path sample_manifest() const { return root / "sample" / "manifest.jsonl"; }
    fs::path sample_summary() const { return root / "sample" / "summary.json"; }
    fs::path splits() const { return root / "split" / "splits.jsonl"; }
    fs::path completions() const { return root / "complete" / "completions.jsonl"; }
    fs::path run_manifest() const { return root / "complete" / "manifest.json"; }
    fs::path journal() const { return root / "complete" / "journal.jsonl"; }
    fs::path cache() const { return root / "complete" / "cache"; }
    fs::path plan() const { return root / "complete" / "plan.json"; }
    fs::path verdicts() const { return root / "filter" / "verdicts.jsonl"; }
    fs::path judge_cache() const { return root / "filter" / "cache"; }
    fs::path rates() const { return root / "filter" / "rates.json"; }
    fs::path filtered() const { return root / "filter" / "filtered.jsonl"; }
    fs::path removal_report() const { return root / "filter" / "removal_report.json"; }
    fs::path export_dir() const { return root / "export"; }
    fs::path subset_dir() const { return root / "subset"; }
    fs::path merge_dir() const { return root / "merge"; }
    fs::path train_dir() const { return root / "train"; }
    fs::path mtbench() const { return root / "eval" / "mtbench.json"; }
    fs::path mtbench_table() const { return root / "eval" / "mtbench_table.txt"; }
    fs::path win_rate() const { return root / "eval" / "win_rate.json"; }
    fs::path report_json() const { return root / "report.json"; }
    fs::path report_text() const { return root / "report.txt"; }
};

/// Built-in defaults; user config is merged over them.
json default_config();

/// Applies a dotted-path override such as `sample.n=100`. The value is parsed
/// as JSON when possible and kept as a string otherwise.
void apply_override(json& config, std::string_view assignment);

struct RunContext {
    json config;
    fs::path run_dir;
    /// Points every provider at this base URL and tolerates missing keys.
    std::optional<std::string> mock_endpoint;
    bool dry_run = false;
    std::shared_ptr<http::Transport> transport;
    const std::atomic<bool>* stop = nullptr;
    /// Test hook: retry delays are skipped when false.
    bool sleep_between_retries = true;
};

struct StageResult {
    json summary;
    /// Non-zero for partial failures that still produced artifacts.
    int exit_code = 0;
};

/// Runs exactly one stage. Stages read their inputs from the run directory
/// and fail with ErrorKind::missing_input when an upstream artifact is absent.
StageResult run_stage(Stage stage, RunContext& ctx);

/// Exit status for an error category.
int exit_code_for(ErrorKind kind);

inline constexpr int kExitPartialFailure = 4;

}  // namespace nonins::pipeline
