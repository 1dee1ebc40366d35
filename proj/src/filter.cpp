#include "nonins/filter.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "nonins/text.hpp"

namespace nonins::filter {
namespace {

constexpr std::string_view kInstructionalTemplate = R"tmpl(Is the following text potentially synthesized for the purpose of instruction fine-tuning for Large Language Models (LLMs) (retaining content but not structure, e.g., removing dialogue speakers, etc., typically starting with a verb in command form followed by a series of responses to the command)? Or is it merely an article?

If it can be considered as data for instruction fine-tuning, please present it in the format of User: {{prompt}} Assistant: {{answer}}, where both the prompt and the answer must be extracted directly from the text, without any external generation.

-------------------
Example of a match:
{positive_example}
-------------------
Example of a non-match:
{negative_example}
-------------------
Document:
{doc[j]}

Please directly answer with "Yes" or "No" before providing the reasoning.)tmpl";

constexpr std::string_view kConversationalTemplate = R"tmpl(Does the following text contain any form of dialogue?

-------------------
Example of a match:
{positive_example}
-------------------
Example of a non-match:
{negative_example}
-------------------
Document:
{doc[j]}

Please directly answer with "Yes" or "No" before providing the reasoning.)tmpl";

constexpr std::string_view kPositiveSlot = "{positive_example}";
constexpr std::string_view kNegativeSlot = "{negative_example}";
constexpr std::string_view kDocSlot = "{doc[j]}";

}  // namespace

std::string_view instructional_template() { return kInstructionalTemplate; }
std::string_view conversational_template() { return kConversationalTemplate; }

std::string_view prompt_template(Kind kind) {
    return kind == Kind::instructional ? kInstructionalTemplate : kConversationalTemplate;
}

Examples default_examples(Kind kind) {
    if (kind == Kind::instructional) {
        return {R"ex(Explain how to make a cup of green tea. Heat water to about 80 degrees Celsius, place one teaspoon of leaves in a cup, pour the water over them and let them steep for two minutes before straining.)ex",
                R"ex(The city council met on Tuesday evening to discuss the proposed bike lanes on Main Street. Several residents spoke in favor of the plan, while local shop owners raised concerns about the loss of parking spaces.)ex"};
    }
    return {R"ex("Are you coming to the game tonight?" Sarah asked.
"I wish I could," Tom replied, "but I have to finish this report first.")ex",
            R"ex(The museum's new wing houses more than two hundred paintings from the nineteenth century. Visitors can follow a guided route that traces the development of landscape painting across Europe.)ex"};
}

Kind parse_kind(std::string_view name) {
    if (name == "instructional") return Kind::instructional;
    if (name == "conversational") return Kind::conversational;
    throw Error(ErrorKind::invalid_argument, "unknown filter kind: " + std::string(name));
}

std::string_view to_string(Kind kind) {
    return kind == Kind::instructional ? "instructional" : "conversational";
}

std::string_view to_string(Answer answer) {
    return answer == Answer::yes ? "yes" : "no";
}

std::string_view to_string(Decision decision) {
    return decision == Decision::keep ? "keep" : "remove";
}

json to_json(const FilterVerdict& v) {
    return {{"doc_id", v.doc_id},
            {"kind", to_string(v.kind)},
            {"answer", to_string(v.answer)},
            {"rationale", v.rationale},
            {"raw_reply", v.raw_reply}};
}

FilterVerdict verdict_from_json(const json& j) {
    FilterVerdict v;
    v.doc_id = j.at("doc_id").get<std::string>();
    v.kind = parse_kind(j.at("kind").get<std::string>());
    const std::string answer = j.at("answer").get<std::string>();
    if (answer != "yes" && answer != "no") throw Error(ErrorKind::parse, "verdict answer must be yes or no");
    v.answer = answer == "yes" ? Answer::yes : Answer::no;
    v.rationale = j.value("rationale", "");
    v.raw_reply = j.value("raw_reply", "");
    return v;
}

std::string build_prompt(Kind kind, std::string_view doc_text, std::string_view positive_example,
                         std::string_view negative_example) {
    if (doc_text.empty()) throw Error(ErrorKind::invalid_argument, "document text must be non-empty");
    if (positive_example.empty() || negative_example.empty()) {
        throw Error(ErrorKind::invalid_argument, "prompt examples must be non-empty");
    }
    const std::string_view tmpl = prompt_template(kind);
    const std::size_t pos_at = tmpl.find(kPositiveSlot);
    const std::size_t neg_at = tmpl.find(kNegativeSlot);
    const std::size_t doc_at = tmpl.find(kDocSlot);

    std::string out;
    out.reserve(tmpl.size() + doc_text.size() + positive_example.size() + negative_example.size());
    out.append(tmpl.substr(0, pos_at));
    out.append(positive_example);
    out.append(tmpl.substr(pos_at + kPositiveSlot.size(), neg_at - pos_at - kPositiveSlot.size()));
    out.append(negative_example);
    out.append(tmpl.substr(neg_at + kNegativeSlot.size(), doc_at - neg_at - kNegativeSlot.size()));
    out.append(doc_text);
    out.append(tmpl.substr(doc_at + kDocSlot.size()));
    return out;
}

std::string build_instructional_prompt(std::string_view doc_text, std::string_view positive_example,
                                       std::string_view negative_example) {
    return build_prompt(Kind::instructional, doc_text, positive_example, negative_example);
}

std::string build_conversational_prompt(std::string_view doc_text, std::string_view positive_example,
                                        std::string_view negative_example) {
    return build_prompt(Kind::conversational, doc_text, positive_example, negative_example);
}

FilterVerdict parse_verdict(std::string_view raw_reply, Kind kind, std::string doc_id) {
    auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    const auto begin = std::find_if(raw_reply.begin(), raw_reply.end(), is_alpha);
    const auto end = std::find_if_not(begin, raw_reply.end(), is_alpha);
    std::string token(begin, end);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    FilterVerdict v;
    if (token == "yes") {
        v.answer = Answer::yes;
    } else if (token == "no") {
        v.answer = Answer::no;
    } else {
        throw UnparseableReply("judge reply does not start with Yes or No", std::string(raw_reply));
    }
    v.doc_id = std::move(doc_id);
    v.kind = kind;
    v.raw_reply = std::string(raw_reply);
    const std::string_view rest = raw_reply.substr(static_cast<std::size_t>(end - raw_reply.begin()));
    const auto first = rest.find_first_not_of(" \t\r\n.,;:!-*\"'");
    v.rationale = first == std::string_view::npos ? std::string() : std::string(rest.substr(first));
    return v;
}

json to_json(const RateReport& r) {
    json j = {{"dataset", r.dataset_tag},
              {"sample_size", r.sample_size},
              {"instructional_yes", r.instructional_yes},
              {"conversational_yes", r.conversational_yes},
              {"unparseable", r.unparseable},
              {"failed", r.failed}};
    j["instructional_pct"] = r.instructional_pct ? json(*r.instructional_pct) : json(nullptr);
    j["conversational_pct"] = r.conversational_pct ? json(*r.conversational_pct) : json(nullptr);
    return j;
}

RateReport measure_rates(const std::vector<corpus::Document>& samples, teacher::TeacherClient& judge,
                         const MeasureOptions& options, std::vector<FilterVerdict>* verdicts) {
    if (samples.empty()) throw Error(ErrorKind::invalid_argument, "no samples to measure");
    if (options.kinds.empty()) throw Error(ErrorKind::invalid_argument, "no filter kinds selected");

    struct Slot {
        std::size_t sample;
        Kind kind;
    };
    std::vector<teacher::BatchItem> items;
    std::vector<Slot> slots;
    for (Kind kind : options.kinds) {
        auto ex = options.examples.find(kind);
        const Examples examples = ex != options.examples.end() ? ex->second : default_examples(kind);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            items.push_back({samples[i].id + "#" + std::string(to_string(kind)),
                             build_prompt(kind, samples[i].text, examples.positive, examples.negative)});
            slots.push_back({i, kind});
        }
    }

    const teacher::RunManifest manifest = teacher::run_batch(items, judge, options.batch);
    if (manifest.aborted) throw Error(ErrorKind::provider, "judge batch aborted: " + manifest.abort_reason);

    RateReport report;
    report.dataset_tag = options.dataset_tag;
    report.sample_size = samples.size();
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& entry = manifest.entries[i];
        const Slot& slot = slots[i];
        if (entry.status != teacher::Status::done) {
            ++report.failed;
            continue;
        }
        try {
            FilterVerdict v = parse_verdict(entry.record->continuation, slot.kind, samples[slot.sample].id);
            if (v.answer == Answer::yes) {
                ++(slot.kind == Kind::instructional ? report.instructional_yes : report.conversational_yes);
            }
            if (verdicts) verdicts->push_back(std::move(v));
        } catch (const UnparseableReply&) {
            if (!options.skip_unparseable) throw;
            ++report.unparseable;
        }
    }
    if (report.failed > 0 && !options.skip_unparseable) {
        throw Error(ErrorKind::provider, std::to_string(report.failed) + " judge requests failed");
    }
    const double n = static_cast<double>(report.sample_size);
    for (Kind kind : options.kinds) {
        if (kind == Kind::instructional) {
            report.instructional_pct = 100.0 * static_cast<double>(report.instructional_yes) / n;
        } else {
            report.conversational_pct = 100.0 * static_cast<double>(report.conversational_yes) / n;
        }
    }
    return report;
}

HeuristicResult uppercase_heuristic(std::string_view continuation, std::string_view suffix_original) {
    HeuristicResult result;
    const auto c0 = text::first_non_whitespace(continuation);
    if (!c0) {
        result.empty_continuation = true;
        return result;
    }
    if (!text::is_uppercase_letter(*c0)) return result;
    const auto s0 = text::first_non_whitespace(suffix_original);
    if (s0 && text::is_uppercase_letter(*s0)) return result;
    result.decision = Decision::remove;
    return result;
}

json to_json(const RemovalReport& r) {
    return {{"input", r.input},
            {"output", r.output},
            {"instructional", r.instructional},
            {"conversational", r.conversational},
            {"uppercase", r.uppercase},
            {"unique_removed", r.unique_removed},
            {"empty_continuations", r.empty_continuations}};
}

FilterResult apply_filters(std::vector<Candidate> dataset, const std::vector<FilterVerdict>& verdicts,
                           const FilterFlags& flags) {
    std::unordered_set<std::string> ids;
    for (const auto& c : dataset) ids.insert(c.record.doc_id);

    std::unordered_set<std::string> yes_instructional;
    std::unordered_set<std::string> yes_conversational;
    for (const auto& v : verdicts) {
        if (!ids.count(v.doc_id)) throw Error(ErrorKind::invalid_argument, "verdict for unknown doc_id " + v.doc_id);
        if (v.answer != Answer::yes) continue;
        (v.kind == Kind::instructional ? yes_instructional : yes_conversational).insert(v.doc_id);
    }

    FilterResult result;
    result.report.input = dataset.size();
    for (auto& c : dataset) {
        bool remove = false;
        if (flags.drop_instructional && yes_instructional.count(c.record.doc_id)) {
            ++result.report.instructional;
            remove = true;
        }
        if (flags.drop_conversational && yes_conversational.count(c.record.doc_id)) {
            ++result.report.conversational;
            remove = true;
        }
        if (flags.uppercase) {
            const HeuristicResult h = uppercase_heuristic(c.record.continuation, c.suffix_original);
            if (h.empty_continuation) ++result.report.empty_continuations;
            if (h.decision == Decision::remove) {
                ++result.report.uppercase;
                remove = true;
            }
        }
        if (remove) {
            ++result.report.unique_removed;
        } else {
            result.kept.push_back(std::move(c));
        }
    }
    result.report.output = result.kept.size();
    return result;
}

}  // namespace nonins::filter
