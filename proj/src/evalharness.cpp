#include "nonins/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "nonins/error.hpp"

namespace nonins::eval {

ScoreMatrix::ScoreMatrix(std::size_t questions, std::size_t turns, std::size_t rounds)
    : questions_(questions), turns_(turns), rounds_(rounds), cells_(questions * turns * rounds) {}

std::size_t ScoreMatrix::index(std::size_t q, std::size_t t, std::size_t r) const {
    if (q >= questions_ || t >= turns_ || r >= rounds_) {
        throw Error(ErrorKind::invalid_argument, "score cell index out of range");
    }
    return (q * turns_ + t) * rounds_ + r;
}

void ScoreMatrix::set(std::size_t question, std::size_t turn, std::size_t round, double score) {
    cells_[index(question, turn, round)] = score;
}

void ScoreMatrix::clear(std::size_t question, std::size_t turn, std::size_t round) {
    cells_[index(question, turn, round)].reset();
}

std::optional<double> ScoreMatrix::get(std::size_t question, std::size_t turn, std::size_t round) const {
    return cells_[index(question, turn, round)];
}

ScoreMatrix ScoreMatrix::from_jsonl(const fs::path& path) {
    struct Row {
        long long question;
        std::size_t turn;
        std::size_t round;
        double score;
    };
    std::vector<Row> rows;
    read_jsonl(path, true, [&](json&& j) {
        Row row{j.at("question_id").get<long long>(), j.at("turn").get<std::size_t>(),
                j.at("round").get<std::size_t>(), j.at("score").get<double>()};
        if (row.turn == 0 || row.round == 0) throw Error(ErrorKind::parse, "turn and round are 1-based");
        rows.push_back(row);
    });
    if (rows.empty()) throw Error(ErrorKind::invalid_argument, "score file is empty: " + path.string());

    std::set<long long> ids;
    std::size_t turns = 0;
    std::size_t rounds = 0;
    for (const auto& r : rows) {
        ids.insert(r.question);
        turns = std::max(turns, r.turn);
        rounds = std::max(rounds, r.round);
    }
    std::map<long long, std::size_t> slot;
    for (long long id : ids) slot.emplace(id, slot.size());

    ScoreMatrix m(ids.size(), turns, rounds);
    for (const auto& r : rows) {
        if (m.get(slot[r.question], r.turn - 1, r.round - 1)) {
            throw Error(ErrorKind::parse, "duplicate score for question " + std::to_string(r.question));
        }
        m.set(slot[r.question], r.turn - 1, r.round - 1, r.score);
    }
    return m;
}

MtBenchSummary aggregate_mtbench(const ScoreMatrix& m, const AggregateOptions& options) {
    MtBenchSummary s;
    std::vector<double> round_sum(m.rounds(), 0.0);
    std::vector<std::size_t> round_n(m.rounds(), 0);
    std::vector<double> turn_sum(m.turns(), 0.0);
    std::vector<std::size_t> turn_n(m.turns(), 0);
    double total = 0.0;

    for (std::size_t q = 0; q < m.questions(); ++q) {
        for (std::size_t t = 0; t < m.turns(); ++t) {
            for (std::size_t r = 0; r < m.rounds(); ++r) {
                const auto v = m.get(q, t, r);
                if (!v) {
                    s.missing.push_back({q, t, r});
                    continue;
                }
                if (options.validate_range && !(*v >= 1.0 && *v <= 10.0)) {
                    throw Error(ErrorKind::invalid_argument, "score outside [1, 10] at question " +
                                                                 std::to_string(q + 1));
                }
                total += *v;
                round_sum[r] += *v;
                ++round_n[r];
                turn_sum[t] += *v;
                ++turn_n[t];
                ++s.cells_used;
            }
        }
    }
    if (s.cells_used == 0) throw Error(ErrorKind::invalid_argument, "score matrix has no scores");
    if (!s.missing.empty() && options.missing == MissingPolicy::reject) {
        throw Error(ErrorKind::invalid_argument,
                    "score matrix has " + std::to_string(s.missing.size()) + " missing cells");
    }
    s.overall = total / static_cast<double>(s.cells_used);
    for (std::size_t r = 0; r < m.rounds(); ++r) {
        s.per_round.push_back(round_n[r] ? std::optional(round_sum[r] / static_cast<double>(round_n[r])) : std::nullopt);
    }
    for (std::size_t t = 0; t < m.turns(); ++t) {
        s.per_turn.push_back(turn_n[t] ? std::optional(turn_sum[t] / static_cast<double>(turn_n[t])) : std::nullopt);
    }
    return s;
}

json to_json(const MtBenchSummary& s) {
    auto opt = [](const std::vector<std::optional<double>>& v) {
        json a = json::array();
        for (const auto& x : v) a.push_back(x ? json(*x) : json(nullptr));
        return a;
    };
    json missing = json::array();
    for (const auto& c : s.missing) missing.push_back({c.question + 1, c.turn + 1, c.round + 1});
    return {{"overall", s.overall},
            {"per_round", opt(s.per_round)},
            {"per_turn", opt(s.per_turn)},
            {"cells_used", s.cells_used},
            {"missing_cells", missing}};
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::win: return "win";
        case Outcome::tie: return "tie";
        case Outcome::loss: return "loss";
    }
    return "tie";
}

Outcome parse_outcome(std::string_view name) {
    if (name == "win") return Outcome::win;
    if (name == "tie") return Outcome::tie;
    if (name == "loss") return Outcome::loss;
    throw Error(ErrorKind::parse, "unknown outcome: " + std::string(name));
}

Outcome reversed(Outcome o) {
    if (o == Outcome::win) return Outcome::loss;
    if (o == Outcome::loss) return Outcome::win;
    return Outcome::tie;
}

std::vector<PairwiseVerdict> read_verdicts(const fs::path& path) {
    std::vector<PairwiseVerdict> out;
    read_jsonl(path, true, [&](json&& j) {
        PairwiseVerdict v;
        const json& q = j.at("question_id");
        v.question_id = q.is_string() ? q.get<std::string>() : q.dump();
        v.outcome = parse_outcome(j.at("outcome").get<std::string>());
        v.direction = j.value("direction", 0);
        out.push_back(std::move(v));
    });
    return out;
}

double compute_win_rate(const std::vector<PairwiseVerdict>& verdicts) {
    if (verdicts.empty()) throw Error(ErrorKind::invalid_argument, "no pairwise verdicts");
    std::set<std::pair<std::string, int>> seen;
    double wins = 0.0;
    double ties = 0.0;
    for (const auto& v : verdicts) {
        if (!seen.emplace(v.question_id, v.direction).second) {
            throw Error(ErrorKind::invalid_argument, "duplicate verdict for question " + v.question_id);
        }
        if (v.outcome == Outcome::win) wins += 1.0;
        if (v.outcome == Outcome::tie) ties += 1.0;
    }
    return 100.0 * (wins + 0.5 * ties) / static_cast<double>(verdicts.size());
}

JudgeTemplate JudgeTemplate::from_file(const fs::path& path) {
    return {read_file(path)};
}

namespace {

std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string_view, std::string_view>>& slots) {
    for (const auto& [name, value] : slots) {
        const std::string marker = "{" + std::string(name) + "}";
        if (tmpl.find(marker) == std::string_view::npos) {
            throw Error(ErrorKind::config, "judge template lacks the " + marker + " slot");
        }
    }
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        bool matched = false;
        if (tmpl[pos] == '{') {
            for (const auto& [name, value] : slots) {
                if (tmpl.compare(pos + 1, name.size(), name) == 0 && pos + 1 + name.size() < tmpl.size() &&
                    tmpl[pos + 1 + name.size()] == '}') {
                    out.append(value);
                    pos += name.size() + 2;
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) out.push_back(tmpl[pos++]);
    }
    return out;
}

}  // namespace

JudgeRequest build_judge_request(const JudgeTemplate& tmpl, std::string question_id, std::string_view question,
                                 std::string_view candidate_answer, std::optional<std::string_view> opponent_answer,
                                 JudgeMode mode, bool candidate_is_a) {
    if (question.empty() || candidate_answer.empty()) {
        throw Error(ErrorKind::invalid_argument, "judge request needs a question and an answer");
    }
    JudgeRequest req;
    req.question_id = std::move(question_id);
    req.mode = mode;
    req.candidate_is_a = candidate_is_a;
    if (mode == JudgeMode::absolute) {
        req.prompt = fill_template(tmpl.text, {{"question", question}, {"answer", candidate_answer}});
        return req;
    }
    if (!opponent_answer || opponent_answer->empty()) {
        throw Error(ErrorKind::invalid_argument, "pairwise judging needs an opponent answer");
    }
    const std::string_view a = candidate_is_a ? candidate_answer : *opponent_answer;
    const std::string_view b = candidate_is_a ? *opponent_answer : candidate_answer;
    req.prompt = fill_template(tmpl.text, {{"question", question}, {"answer_a", a}, {"answer_b", b}});
    return req;
}

double parse_score(std::string_view reply) {
    static const std::regex kDouble(R"(\[\[(\d+\.?\d*)\]\])");
    static const std::regex kSingle(R"(\[(\d+\.?\d*)\])");
    const std::string s(reply);
    std::smatch m;
    if (!std::regex_search(s, m, kDouble) && !std::regex_search(s, m, kSingle)) {
        throw UnparseableReply("judge reply has no [[rating]]", s);
    }
    const double score = std::stod(m[1].str());
    if (!(score >= 1.0 && score <= 10.0)) throw UnparseableReply("judge rating outside [1, 10]", s);
    return score;
}

Outcome parse_pairwise(std::string_view reply, bool candidate_is_a) {
    static const std::regex kLabel(R"(\[\[(A>>B|A>B|A=B|B>A|B>>A|A|B|C)\]\])");
    const std::string s(reply);
    std::set<int> favoured;  // +1 A, -1 B, 0 tie
    for (auto it = std::sregex_iterator(s.begin(), s.end(), kLabel); it != std::sregex_iterator(); ++it) {
        const std::string label = (*it)[1].str();
        if (label == "A" || label == "A>B" || label == "A>>B") {
            favoured.insert(1);
        } else if (label == "B" || label == "B>A" || label == "B>>A") {
            favoured.insert(-1);
        } else {
            favoured.insert(0);
        }
    }
    if (favoured.size() != 1) throw UnparseableReply("judge reply has no single verdict label", s);
    const int f = *favoured.begin();
    if (f == 0) return Outcome::tie;
    const bool candidate_favoured = (f == 1) == candidate_is_a;
    return candidate_favoured ? Outcome::win : Outcome::loss;
}

JudgeResult judge(const JudgeRequest& request, teacher::TeacherClient& client) {
    const teacher::CompletionRecord rec = client.complete(request.question_id, request.prompt);
    JudgeResult result;
    result.raw_reply = rec.continuation;
    if (request.mode == JudgeMode::absolute) {
        result.score = parse_score(rec.continuation);
    } else {
        result.outcome = parse_pairwise(rec.continuation, request.candidate_is_a);
    }
    return result;
}

std::string render_table(const std::vector<ReportRow>& rows) {
    const std::vector<std::string> headers = {"Backbone", "Fine-tuned Modules", "Data", "Score"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        std::ostringstream score;
        score << std::fixed << std::setprecision(2) << r.score;
        cells.push_back({r.backbone, r.modules.empty() ? "-" : r.modules, r.data.empty() ? "-" : r.data, score.str()});
    }
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& row) {
        std::string out;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += " | ";
            out += row[c];
            if (c + 1 < row.size()) out.append(width[c] - row[c].size(), ' ');
        }
        return out + "\n";
    };
    std::string out = line(headers);
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    out += std::string(total + 3 * (width.size() - 1), '-') + "\n";
    for (const auto& row : cells) out += line(row);
    return out;
}

const std::vector<ReferenceTarget>& reference_targets() {
    static const std::vector<ReferenceTarget> kTargets = {
        {"MT-Bench", "Mistral-7B-v0.1, lora, gpt4-turbo 80k", 7.29},
        {"MT-Bench", "Mistral-7B-v0.1, lora, gpt4-turbo 73k after uppercase filtering", 7.31},
        {"MT-Bench", "Meta-Llama-3-70b-Instruct, lora, gpt4-turbo 80k", 9.03},
        {"Arena-Hard WR", "Meta-Llama-3-70b-Instruct, lora, gpt4-turbo 80k", 57.0},
        {"Instructional %", "GPT-4 continuous, 2000 samples", 0.7},
        {"Conversational %", "GPT-4 continuous, 2000 samples", 8.3},
        {"Uppercase-heuristic removals", "GPT-4 continuous 80k", 7000.0},
    };
    return kTargets;
}

}  // namespace nonins::eval
