// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "nonins/corpus.hpp"
#include "nonins/dataset.hpp"
#include "nonins/error.hpp"
#include "nonins/evalharness.hpp"
#include "nonins/filter.hpp"
#include "nonins/merge.hpp"
#include "nonins/pipeline.hpp"
#include "nonins/splitter.hpp"
#include "nonins/teacher.hpp"
#include "nonins/trainconfig.hpp"
#include "support/eval_fixture.hpp"
#include "support/merge_oracle.hpp"
#include "support/mock_llm_server.hpp"
#include "support/pipeline_fixture.hpp"
#include "support/temp_dir.hpp"

using namespace nonins;
using nonins::testing::MockLlmServer;
using nonins::testing::MockReply;
using nonins::testing::MockRequest;
using nonins::testing::TempDir;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSource = NONINS_SOURCE_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first failed expectation; later ones only add to the detail.
struct Checker {
    Outcome out;
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            if (out.pass) out.detail = what;
            out.pass = false;
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string golden(const std::string& name) {
    std::string s = read_file(kSource / "tests/golden" / name);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

// 1 ------------------------------------------------------------------------

Outcome split_correctness() {
    const auto t0 = Clock::now();
    static const std::vector<std::string> gaps = {" ",       "  ",        "\t",       "\n",           "\r\n",
                                                  "\n\n",    "\xC2\xA0",  "\xE3\x80\x80", "\xE2\x80\x89", "\xE2\x80\xA8",
                                                  "\x0B",    "\x0C",      "\xC2\x85", " \t\n "};
    static const std::vector<std::string> tokens = {"w", "word", "caf\xC3\xA9", "\xE4\xB8\xAD\xE6\x96\x87", "x.y",
                                                    "\xF0\x9F\x98\x80", "\xE2\x80\x8B", "--", "A"};
    Rng rng(20240101);
    std::size_t reconstructed = 0;
    std::size_t in_bounds = 0;
    constexpr std::size_t kDocs = 10000;
    for (std::size_t i = 0; i < kDocs; ++i) {
        std::string t;
        const auto words = 4 + rng.uniform_below(200);
        if (rng.uniform_below(2)) t += gaps[rng.uniform_below(gaps.size())];
        for (std::uint64_t w = 0; w < words; ++w) {
            if (w) {
                const auto n = 1 + rng.uniform_below(3);
                for (std::uint64_t g = 0; g < n; ++g) t += gaps[rng.uniform_below(gaps.size())];
            }
            t += tokens[rng.uniform_below(tokens.size())];
        }
        if (rng.uniform_below(2)) t += gaps[rng.uniform_below(gaps.size())];

        const auto doc = corpus::make_document(t, "synthetic");
        const auto r = splitter::split(doc, i);
        if (r.prefix + r.suffix_original == t) ++reconstructed;
        // Quarter bounds in exact integer form: wc <= 4k <= 3wc.
        if (r.wc == words && r.wc <= 4 * r.k && 4 * r.k <= 3 * r.wc) ++in_bounds;
    }
    const double secs = seconds_since(t0);
    Checker c;
    c.expect(reconstructed == kDocs, "reconstruction " + std::to_string(reconstructed) + "/10000");
    c.expect(in_bounds == kDocs, "in bounds " + std::to_string(in_bounds) + "/10000");
    c.expect(secs < 10.0, "took " + std::to_string(secs) + " s");
    if (c.out.pass) {
        std::ostringstream d;
        d << "10000/10000 reconstructed, 10000/10000 within quarter bounds, " << secs << " s";
        c.out.detail = d.str();
    }
    return c.out;
}

// 2 ------------------------------------------------------------------------

Outcome midpoint_uniformity() {
    Rng rng(777);
    std::map<std::size_t, long> counts;
    constexpr long kDraws = 100000;
    for (long i = 0; i < kDraws; ++i) ++counts[splitter::choose_midpoint(100, rng)];
    Checker c;
    for (std::size_t k = 25; k <= 75; ++k) c.expect(counts.count(k) == 1, "k=" + std::to_string(k) + " never drawn");
    c.expect(counts.size() == 51, "values outside [25, 75] drawn");
    long lo = kDraws;
    long hi = 0;
    double chi2 = 0.0;
    const double expected = static_cast<double>(kDraws) / 51.0;
    for (const auto& [k, n] : counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
        chi2 += (n - expected) * (n - expected) / expected;
    }
    const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
    // Upper 1% point of chi-square with 50 degrees of freedom.
    constexpr double kChi2Critical = 76.154;
    c.expect(ratio < 1.25, "max/min ratio " + std::to_string(ratio));
    c.expect(chi2 < kChi2Critical, "chi-square " + std::to_string(chi2));
    if (c.out.pass) {
        std::ostringstream d;
        d << "51/51 values seen, max/min " << ratio << ", chi2 " << chi2 << " < " << kChi2Critical << " (p > 0.01)";
        c.out.detail = d.str();
    }
    return c.out;
}

// 3 ------------------------------------------------------------------------

void strip_timestamps(json& j) {
    if (j.is_object()) {
        j.erase("timestamp");
        for (auto& [k, v] : j.items()) strip_timestamps(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_timestamps(v);
    }
}

std::string normalized(const fs::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".json") {
        json j = read_json_file(p);
        strip_timestamps(j);
        return j.dump();
    }
    if (ext == ".jsonl") {
        std::string out;
        read_jsonl(p, true, [&](json&& j) {
            strip_timestamps(j);
            out += j.dump() + "\n";
        });
        return out;
    }
    return read_file(p);
}

void full_run(const fs::path& corpus, const fs::path& run_dir, const std::string& endpoint) {
    pipeline::RunContext ctx;
    ctx.config = pipeline::default_config();
    ctx.config.merge_patch({{"corpus", {{"path", corpus.string()}}},
                            {"sample", {{"n", 40}, {"seed", 11}}},
                            {"split", {{"seed", 12}}},
                            {"batch", {{"max_in_flight", 4}}},
                            {"filter",
                             {{"kinds", {"instructional", "conversational"}},
                              {"drop_instructional", true},
                              {"drop_conversational", true},
                              {"uppercase", true}}},
                            {"subset", {{"sizes", {5, 10}}, {"seed", 13}}}});
    ctx.run_dir = run_dir;
    ctx.mock_endpoint = endpoint;
    ctx.sleep_between_retries = false;
    for (auto s : {pipeline::Stage::sample, pipeline::Stage::split, pipeline::Stage::complete, pipeline::Stage::filter,
                   pipeline::Stage::export_dataset, pipeline::Stage::subset, pipeline::Stage::emit_train,
                   pipeline::Stage::report}) {
        const auto r = pipeline::run_stage(s, ctx);
        if (r.exit_code != 0) throw Error(ErrorKind::provider, "stage " + std::string(pipeline::to_string(s)) + " failed");
    }
}

Outcome determinism() {
    TempDir dir("accept3");
    MockLlmServer server;
    server.set_responder(nonins::testing::pipeline_responder);
    nonins::testing::write_corpus(dir / "corpus.jsonl", 50, 99);
    full_run(dir / "corpus.jsonl", dir / "a", server.endpoint());
    full_run(dir / "corpus.jsonl", dir / "b", server.endpoint());

    // The journal records completion order across worker threads and is a
    // log, not an artifact; everything else must match.
    const std::vector<std::string> artifacts = {
        "config.json",
        "sample/documents.jsonl",
        "sample/manifest.jsonl",
        "sample/summary.json",
        "split/splits.jsonl",
        "complete/completions.jsonl",
        "complete/manifest.json",
        "filter/verdicts.jsonl",
        "filter/rates.json",
        "filter/filtered.jsonl",
        "filter/removal_report.json",
        "export/dataset.jsonl",
        "export/dataset.jsonl.ids",
        "export/dataset.jsonl.info.json",
        "subset/dataset_5.jsonl",
        "subset/dataset_10.jsonl",
        "train/train.sh",
        "train/train_config.json",
        "report.json",
    };
    Checker c;
    std::size_t identical = 0;
    for (const auto& a : artifacts) {
        const bool exists = fs::exists(dir / "a" / a) && fs::exists(dir / "b" / a);
        c.expect(exists, a + " missing");
        if (!exists) continue;
        const bool same = a == "export/dataset.jsonl" || a == "export/dataset.jsonl.ids"
                              ? read_file(dir / "a" / a) == read_file(dir / "b" / a)  // raw bytes
                              : normalized(dir / "a" / a) == normalized(dir / "b" / a);
        c.expect(same, a + " differs between runs");
        identical += same;
    }
    if (c.out.pass) {
        c.out.detail = std::to_string(identical) + "/" + std::to_string(artifacts.size()) +
                       " artifacts identical (exported dataset byte-identical; timestamps excluded from manifests)";
    }
    return c.out;
}

// 4 ------------------------------------------------------------------------

Outcome prompt_fidelity() {
    Checker c;
    for (auto kind : {filter::Kind::instructional, filter::Kind::conversational}) {
        const std::string name = std::string(filter::to_string(kind)) + "_prompt.txt";
        std::string expected = golden(name);
        c.expect(filter::prompt_template(kind) == expected, name + " template differs");
        const std::pair<std::string, std::string> slots[] = {
            {"{positive_example}", "POSITIVE\nexample"}, {"{negative_example}", "NEGATIVE"}, {"{doc[j]}", "Doc text."}};
        for (const auto& [slot, value] : slots) {
            const auto pos = expected.find(slot);
            c.expect(pos != std::string::npos && expected.find(slot, pos + 1) == std::string::npos, name + " slot count");
            if (pos != std::string::npos) expected.replace(pos, slot.size(), value);
        }
        c.expect(filter::build_prompt(kind, "Doc text.", "POSITIVE\nexample", "NEGATIVE") == expected,
                 name + " filled prompt differs");
    }

    MockLlmServer server;
    teacher::TeacherSpec spec = teacher::TeacherSpec::anthropic("claude-3-opus-20240229");
    spec.endpoint_url = server.endpoint();
    teacher::TeacherClient client(spec, {"k"}, http::default_transport());
    client.complete("d", "The committee met on Tuesday and");
    const auto reqs = server.requests();
    c.expect(reqs.size() == 1, "expected one wire request");
    if (!reqs.empty()) {
        c.expect(reqs[0].system == golden("anthropic_system_prompt.txt"), "system prompt differs on the wire");
        c.expect(reqs[0].user == "The committee met on Tuesday and", "user message differs");
    }
    if (c.out.pass) c.out.detail = "2/2 judge prompts byte-identical; Anthropic system prompt byte-identical on the wire";
    return c.out;
}

// 5 ------------------------------------------------------------------------

Outcome merge_oracle() {
    const auto t0 = Clock::now();
    TempDir dir("accept5");
    Rng rng(5150);
    double worst_merge = 0.0;
    double worst_delta = 0.0;
    std::size_t roundtrips = 0;
    Checker c;
    for (int trial = 0; trial < 100; ++trial) {
        const auto mc = nonins::testing::random_case(rng, 64);
        const auto merged = merge::merge_lora(mc.backbone, mc.adapters);
        for (const auto& p : mc.adapters) {
            const auto want = nonins::testing::naive_merge(mc.backbone.at(p.target).to_floats(), p);
            worst_merge = std::max(worst_merge, nonins::testing::max_rel_error(merged.at(p.target).to_floats(), want));
        }

        merge::TensorArchive other;
        for (const auto& [name, t] : mc.backbone.tensors()) {
            other.insert(name, merge::Tensor::from_floats(merge::DType::f32, t.shape,
                                                          nonins::testing::random_floats(rng, t.numel())));
        }
        const auto dx = merge::delta(merged, mc.backbone);
        const auto dy = merge::delta(merge::merge_lora_base(other, mc.adapters), other);
        for (const auto& [name, t] : dx.tensors()) {
            const auto a = t.to_floats();
            const auto b = dy.at(name).to_floats();
            for (std::size_t i = 0; i < a.size(); ++i) {
                worst_delta = std::max(worst_delta, static_cast<double>(std::abs(a[i] - b[i])));
            }
        }

        const fs::path path = dir / ("m" + std::to_string(trial) + ".safetensors");
        merge::write_archive(path, merged);
        const auto back = merge::read_archive(path);
        roundtrips += back == merged && merge::serialize(back) == read_file(path);
    }
    const double secs = seconds_since(t0);
    c.expect(worst_merge <= 1e-6, "merge error " + std::to_string(worst_merge));
    c.expect(worst_delta <= 1e-6, "delta mismatch " + std::to_string(worst_delta));
    c.expect(roundtrips == 100, "bit-exact round trips " + std::to_string(roundtrips) + "/100");
    c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
    if (c.out.pass) {
        std::ostringstream d;
        d << "100 cases: max rel err " << worst_merge << ", max delta diff " << worst_delta
          << ", 100/100 bit-identical round trips, " << secs << " s";
        c.out.detail = d.str();
    }
    return c.out;
}

// 6 ------------------------------------------------------------------------

Outcome resume_semantics() {
    TempDir dir("accept6");
    MockLlmServer server;
    teacher::TeacherSpec spec = teacher::TeacherSpec::openai("gpt-4-0125-preview");
    spec.endpoint_url = server.endpoint();
    std::vector<teacher::BatchItem> items;
    for (int i = 0; i < 100; ++i) items.push_back({"doc" + std::to_string(i), "Prefix text number " + std::to_string(i)});

    std::size_t first_requests = 0;
    std::size_t committed = 0;
    {
        teacher::TeacherClient client(spec, {"k"}, http::default_transport(), dir / "cache");
        std::atomic<bool> killed{false};
        teacher::BatchOptions opt;
        opt.max_in_flight = 4;
        opt.journal_path = dir / "journal.jsonl";
        opt.on_commit = [&](const teacher::ItemResult&) {
            if (++committed == 40) killed = true;
        };
        opt.stop_requested = [&] { return killed.load(); };
        const auto m = teacher::run_batch(items, client, opt);
        first_requests = server.request_count();
        if (m.totals.done != 40) return {false, "first run committed " + std::to_string(m.totals.done)};
    }

    server.reset();
    teacher::TeacherClient client(spec, {"k"}, http::default_transport(), dir / "cache");
    teacher::BatchOptions opt;
    opt.max_in_flight = 4;
    opt.journal_path = dir / "journal.jsonl";
    const auto m = teacher::run_batch(items, client, opt);
    std::size_t journal_lines = 0;
    read_jsonl(dir / "journal.jsonl", true, [&](json&&) { ++journal_lines; });  // 40 + 100 appended

    Checker c;
    c.expect(server.request_count() == 60, "rerun sent " + std::to_string(server.request_count()) + " requests");
    c.expect(m.totals.done == 100 && m.totals.pending == 0 && m.totals.failed == 0, "manifest incomplete");
    c.expect(m.totals.cache_hits == 40, "cache hits " + std::to_string(m.totals.cache_hits));
    c.expect(!m.interrupted, "rerun marked interrupted");
    c.expect(journal_lines == 140, "journal has " + std::to_string(journal_lines) + " lines");
    if (c.out.pass) {
        c.out.detail = "killed after 40 commits (" + std::to_string(first_requests) +
                       " requests sent), rerun sent exactly 60, manifest 100/100 done";
    }
    return c.out;
}

// 7 ------------------------------------------------------------------------

Outcome trainer_command() {
    const auto em = trainconfig::emit_command(trainconfig::TrainPlan::placeholders());
    const std::string want = read_file(kSource / "tests/golden/train_command.txt");
    if (em.command != want) return {false, "emitted command differs from tests/golden/train_command.txt"};
    return {true, "default plan byte-identical to golden command (" + std::to_string(want.size()) + " bytes)"};
}

// 8 ------------------------------------------------------------------------

Outcome evaluation_aggregation() {
    Checker c;
    const auto rows = nonins::testing::mtbench_fixture();
    long long tenths = 0;
    for (const auto& r : rows) tenths += r.tenths;
    c.expect(rows.size() == 480 && tenths == 34992, "fixture is not 480 cells summing to 3499.2");

    TempDir dir("accept8");
    nonins::testing::write_mtbench_fixture(dir / "scores.jsonl", rows);
    const auto s = eval::aggregate_mtbench(eval::ScoreMatrix::from_jsonl(dir / "scores.jsonl"));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", s.overall);
    c.expect(std::abs(s.overall - 7.29) < 1e-9 && std::string(buf) == "7.29", std::string("overall ") + buf);

    auto make = [](int w, int t, int l) {
        std::vector<eval::PairwiseVerdict> v;
        int q = 0;
        for (int i = 0; i < w; ++i) v.push_back({std::to_string(q++), eval::Outcome::win, 0});
        for (int i = 0; i < t; ++i) v.push_back({std::to_string(q++), eval::Outcome::tie, 0});
        for (int i = 0; i < l; ++i) v.push_back({std::to_string(q++), eval::Outcome::loss, 0});
        return v;
    };
    const double wr1 = eval::compute_win_rate(make(10, 4, 6));
    const double wr2 = eval::compute_win_rate(make(250, 0, 250));
    c.expect(wr1 == 60.0, "10/4/6 gave " + std::to_string(wr1));
    c.expect(wr2 == 50.0, "250/0/250 gave " + std::to_string(wr2));
    bool identity = true;
    for (auto [w, t, l] : {std::tuple{10, 4, 6}, {3, 0, 17}, {123, 45, 332}, {0, 5, 0}}) {
        auto v = make(w, t, l);
        const double wr = eval::compute_win_rate(v);
        for (auto& x : v) x.outcome = eval::reversed(x.outcome);
        identity &= std::abs(eval::compute_win_rate(v) - (100.0 - wr)) < 1e-12;
    }
    c.expect(identity, "reversal identity violated");
    if (c.out.pass) c.out.detail = std::string("MT-Bench overall ") + buf + "; WR 60.0 and 50.0; WR(flipped) = 100 - WR";
    return c.out;
}

// 9 ------------------------------------------------------------------------

Outcome filter_pipeline() {
    Checker c;
    MockLlmServer server;
    teacher::TeacherSpec spec = teacher::TeacherSpec::openai("gpt-4o");
    spec.endpoint_url = server.endpoint();

    // Rates: 3 instructional yes out of 200.
    std::vector<corpus::Document> docs;
    for (int i = 0; i < 200; ++i) docs.push_back(corpus::make_document("rate sample " + std::to_string(i) + " body text", "f"));
    server.set_responder([](const MockRequest& r) {
        const bool instructional = r.user.rfind("Is the following text", 0) == 0;
        for (const char* id : {"sample 11 body", "sample 50 body", "sample 151 body"}) {
            if (instructional && r.user.find(id) != std::string::npos) return MockReply{200, "Yes, commands present."};
        }
        return MockReply{200, "No. Narrative prose."};
    });
    {
        teacher::TeacherClient judge(spec, {"k"}, http::default_transport());
        filter::MeasureOptions opt;
        opt.batch.max_in_flight = 8;
        const auto rates = filter::measure_rates(docs, judge, opt);
        c.expect(rates.instructional_yes == 3 && rates.instructional_pct && *rates.instructional_pct == 1.5,
                 "instructional rate not 1.5%");
        c.expect(rates.conversational_pct && *rates.conversational_pct == 0.0, "conversational rate not 0%");
    }

    // Removal report: 10 records, judge says yes (instructional) to r2 and r4,
    // r4 also opens with a fresh uppercase sentence.
    std::vector<corpus::Document> ten;
    std::vector<filter::Candidate> candidates;
    for (int i = 0; i < 10; ++i) {
        const std::string id = "r" + std::to_string(i);
        teacher::CompletionRecord rec;
        rec.doc_id = id;
        rec.continuation = i == 4 ? " Here is the gist of it." : " and the rest followed";
        candidates.push_back({rec, " and so on"});
        corpus::Document d;
        d.id = id;
        d.text = "record " + id + " text" + rec.continuation;
        ten.push_back(d);
    }
    server.set_responder([](const MockRequest& r) {
        const bool instructional = r.user.rfind("Is the following text", 0) == 0;
        const bool hit = r.user.find("record r2 text") != std::string::npos || r.user.find("record r4 text") != std::string::npos;
        return MockReply{200, instructional && hit ? "Yes" : "No"};
    });
    teacher::TeacherClient judge(spec, {"k"}, http::default_transport());
    filter::MeasureOptions opt;
    std::vector<filter::FilterVerdict> verdicts;
    filter::measure_rates(ten, judge, opt, &verdicts);
    filter::FilterFlags flags;
    flags.drop_instructional = true;
    flags.uppercase = true;
    const auto result = filter::apply_filters(candidates, verdicts, flags);
    const json report = filter::to_json(result.report);
    c.expect(result.kept.size() == 8, "kept " + std::to_string(result.kept.size()));
    c.expect(report["instructional"] == 2 && report["uppercase"] == 1 && report["unique_removed"] == 2 &&
                 report["conversational"] == 0,
             "removal report " + report.dump());

    // Uppercase heuristic truth table.
    struct Row {
        const char* continuation;
        const char* suffix;
        bool remove;
    };
    const Row table[] = {
        {"Here is a summary.", " and then the team", true},   {" Sure, the author", " the author", true},
        {"\n\nThis article", "\nwhich", true},                {"\xC3\x89tude", " \xC3\xA9t\xC3\xA9", true},
        {"Summary:", "", true},                               {" The", "   ", true},
        {"However, the", "However the", false},               {" The next", "\tThe next", false},
        {" the next day", " The", false},                     {"1999 was", " in 1999", false},
        {"\"Quoted", " said", false},                         {"   \n", " and so", false},
    };
    std::size_t agree = 0;
    for (const auto& row : table) {
        const auto h = filter::uppercase_heuristic(row.continuation, row.suffix);
        agree += (h.decision == filter::Decision::remove) == row.remove;
    }
    c.expect(agree == 12, "truth table " + std::to_string(agree) + "/12");
    if (c.out.pass) {
        c.out.detail = "rate 3/200 = 1.5%; 10 records -> 8 kept, {instructional:2, uppercase:1, unique_removed:2}; "
                       "truth table 12/12";
    }
    return c.out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"split correctness", split_correctness},
        {"midpoint uniformity", midpoint_uniformity},
        {"determinism", determinism},
        {"prompt fidelity", prompt_fidelity},
        {"merge oracle", merge_oracle},
        {"resume semantics", resume_semantics},
        {"trainer command golden", trainer_command},
        {"evaluation aggregation", evaluation_aggregation},
        {"filter pipeline", filter_pipeline},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
