#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/jsonl.hpp"
#include "nonins/teacher.hpp"

namespace nonins::eval {

inline constexpr std::size_t kMtBenchQuestions = 80;
inline constexpr std::size_t kMtBenchTurns = 2;
inline constexpr std::size_t kMtBenchRounds = 3;

/// Judge scores indexed by (question, turn, round), all zero-based. Cells may
/// be missing; aggregation reports them instead of imputing.
class ScoreMatrix {
public:
    ScoreMatrix(std::size_t questions = kMtBenchQuestions, std::size_t turns = kMtBenchTurns,
                std::size_t rounds = kMtBenchRounds);

    std::size_t questions() const noexcept { return questions_; }
    std::size_t turns() const noexcept { return turns_; }
    std::size_t rounds() const noexcept { return rounds_; }

    void set(std::size_t question, std::size_t turn, std::size_t round, double score);
    void clear(std::size_t question, std::size_t turn, std::size_t round);
    std::optional<double> get(std::size_t question, std::size_t turn, std::size_t round) const;

    /// Rows of {question_id, turn, round, score} with 1-based turn/round;
    /// question ids are ordered numerically.
    static ScoreMatrix from_jsonl(const fs::path& path);

private:
    std::size_t index(std::size_t q, std::size_t t, std::size_t r) const;

    std::size_t questions_;
    std::size_t turns_;
    std::size_t rounds_;
    std::vector<std::optional<double>> cells_;
};

struct Cell {
    std::size_t question = 0;
    std::size_t turn = 0;
    std::size_t round = 0;
};

struct MtBenchSummary {
    double overall = 0.0;
    std::vector<std::optional<double>> per_round;
    std::vector<std::optional<double>> per_turn;
    std::size_t cells_used = 0;
    std::vector<Cell> missing;
};

enum class MissingPolicy { reject, exclude_with_report };

struct AggregateOptions {
    MissingPolicy missing = MissingPolicy::reject;
    /// Enforce scores in [1, 10].
    bool validate_range = true;
};

/// Arithmetic means over all present cells and per round / per turn.
MtBenchSummary aggregate_mtbench(const ScoreMatrix& matrix, const AggregateOptions& options = {});

json to_json(const MtBenchSummary& s);

enum class Outcome { win, tie, loss };
std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view name);
Outcome reversed(Outcome o);

/// Candidate-vs-baseline judgement for one question in one judging direction
/// (0: candidate shown as A, 1: candidate shown as B).
struct PairwiseVerdict {
    std::string question_id;
    Outcome outcome = Outcome::tie;
    int direction = 0;
};

std::vector<PairwiseVerdict> read_verdicts(const fs::path& path);

/// 100 * (wins + 0.5 * ties) / total. This is a plain win rate, not the
/// Bradley-Terry estimate of the official Arena-Hard pipeline.
double compute_win_rate(const std::vector<PairwiseVerdict>& verdicts);

enum class JudgeMode { absolute, pairwise };

/// User-supplied judge prompt. Absolute templates use {question} and
/// {answer}; pairwise templates use {question}, {answer_a} and {answer_b}.
struct JudgeTemplate {
    std::string text;
    static JudgeTemplate from_file(const fs::path& path);
};

struct JudgeRequest {
    std::string question_id;
    std::string prompt;
    JudgeMode mode = JudgeMode::absolute;
    bool candidate_is_a = true;
};

JudgeRequest build_judge_request(const JudgeTemplate& tmpl, std::string question_id, std::string_view question,
                                 std::string_view candidate_answer, std::optional<std::string_view> opponent_answer,
                                 JudgeMode mode, bool candidate_is_a = true);

/// Reads "[[8]]" (or "[8]") style ratings. Throws UnparseableReply when no
/// rating is present or it lies outside [1, 10].
double parse_score(std::string_view reply);

/// Reads "[[A]]" / "[[B]]" / "[[C]]" or Arena-style "[[A>B]]" labels and maps
/// them to the candidate's outcome. Conflicting labels are unparseable.
Outcome parse_pairwise(std::string_view reply, bool candidate_is_a);

struct JudgeResult {
    std::optional<double> score;
    std::optional<Outcome> outcome;
    std::string raw_reply;
};

JudgeResult judge(const JudgeRequest& request, teacher::TeacherClient& client);

/// One row in the style of the MT-Bench results table.
struct ReportRow {
    std::string backbone;
    std::string modules;
    std::string data;
    double score = 0.0;
};

std::string render_table(const std::vector<ReportRow>& rows);

/// Published reference values. They require GPU fine-tuning or paid judge
/// APIs and are reported for comparison only.
struct ReferenceTarget {
    std::string metric;
    std::string setting;
    double value = 0.0;
};

const std::vector<ReferenceTarget>& reference_targets();

}  // namespace nonins::eval
