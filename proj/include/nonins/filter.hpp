#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/corpus.hpp"
#include "nonins/teacher.hpp"

namespace nonins::filter {

enum class Kind { instructional, conversational };
enum class Answer { yes, no };

Kind parse_kind(std::string_view name);
std::string_view to_string(Kind kind);
std::string_view to_string(Answer answer);

struct FilterVerdict {
    std::string doc_id;
    Kind kind = Kind::instructional;
    Answer answer = Answer::no;
    std::string rationale;
    std::string raw_reply;
};

json to_json(const FilterVerdict& v);
FilterVerdict verdict_from_json(const json& j);

/// Judge prompt templates. Each holds exactly one `{positive_example}`,
/// `{negative_example}` and `{doc[j]}` slot.
std::string_view instructional_template();
std::string_view conversational_template();
std::string_view prompt_template(Kind kind);

struct Examples {
    std::string positive;
    std::string negative;
};

/// Built-in slot fillers; data/prompts/ carries the same text as editable files.
Examples default_examples(Kind kind);

/// Fills the three slots in a single pass. Slot markers that appear inside
/// the inputs are copied through untouched.
std::string build_prompt(Kind kind, std::string_view doc_text, std::string_view positive_example,
                         std::string_view negative_example);
std::string build_instructional_prompt(std::string_view doc_text, std::string_view positive_example,
                                       std::string_view negative_example);
std::string build_conversational_prompt(std::string_view doc_text, std::string_view positive_example,
                                        std::string_view negative_example);

/// The first alphabetic token decides: "yes" or "no", case-insensitive.
/// Anything else throws UnparseableReply.
FilterVerdict parse_verdict(std::string_view raw_reply, Kind kind, std::string doc_id = {});

struct RateReport {
    std::string dataset_tag;
    std::size_t sample_size = 0;
    std::optional<double> instructional_pct;
    std::optional<double> conversational_pct;
    std::size_t instructional_yes = 0;
    std::size_t conversational_yes = 0;
    std::size_t unparseable = 0;
    std::size_t failed = 0;
};

json to_json(const RateReport& r);

/// Table 5 used 2000 samples per dataset.
inline constexpr std::size_t kDefaultRateSampleSize = 2000;

struct MeasureOptions {
    std::string dataset_tag;
    std::vector<Kind> kinds{Kind::instructional, Kind::conversational};
    std::map<Kind, Examples> examples;
    /// Count unparseable replies instead of failing the measurement.
    bool skip_unparseable = false;
    teacher::BatchOptions batch;
};

/// One judge prompt per (sample, kind), sent through the teacher batch
/// runner; verdicts are parsed and aggregated. Percentages are
/// 100 * yes / sample_size.
RateReport measure_rates(const std::vector<corpus::Document>& samples, teacher::TeacherClient& judge,
                         const MeasureOptions& options, std::vector<FilterVerdict>* verdicts = nullptr);

enum class Decision { keep, remove };
std::string_view to_string(Decision decision);

struct HeuristicResult {
    Decision decision = Decision::keep;
    /// Continuation had no non-whitespace character.
    bool empty_continuation = false;
};

/// Remove iff the continuation opens with an uppercase letter (Lu) while the
/// original suffix does not.
HeuristicResult uppercase_heuristic(std::string_view continuation, std::string_view suffix_original);

struct FilterFlags {
    bool drop_instructional = false;
    bool drop_conversational = false;
    bool uppercase = false;
};

struct Candidate {
    teacher::CompletionRecord record;
    std::string suffix_original;
};

struct RemovalReport {
    std::size_t input = 0;
    std::size_t output = 0;
    std::size_t instructional = 0;
    std::size_t conversational = 0;
    std::size_t uppercase = 0;
    std::size_t unique_removed = 0;
    std::size_t empty_continuations = 0;
};

json to_json(const RemovalReport& r);

struct FilterResult {
    std::vector<Candidate> kept;
    RemovalReport report;
};

/// Drops records with yes-verdicts for the enabled kinds and records the
/// heuristic flags for removal. Output preserves input order.
FilterResult apply_filters(std::vector<Candidate> dataset, const std::vector<FilterVerdict>& verdicts,
                           const FilterFlags& flags);

}  // namespace nonins::filter
