#include <doctest.h>

#include "nonins/dataset.hpp"
#include "nonins/error.hpp"
#include "nonins/pipeline.hpp"
#include "support/pipeline_fixture.hpp"
#include "support/temp_dir.hpp"

using namespace nonins;
using namespace nonins::pipeline;
using nonins::testing::MockLlmServer;
using nonins::testing::TempDir;

namespace {

RunContext context(const TempDir& dir, const MockLlmServer& server, std::size_t n_docs = 50) {
    nonins::testing::write_corpus(dir / "corpus.jsonl", n_docs);
    RunContext ctx;
    ctx.config = default_config();
    apply_override(ctx.config, "corpus.path=" + (dir / "corpus.jsonl").string());
    apply_override(ctx.config, "sample.n=40");
    apply_override(ctx.config, "sample.seed=3");
    apply_override(ctx.config, "split.seed=4");
    apply_override(ctx.config, "batch.max_in_flight=4");
    apply_override(ctx.config, R"(filter.kinds=["instructional","conversational"])");
    apply_override(ctx.config, "filter.drop_instructional=true");
    apply_override(ctx.config, "filter.drop_conversational=true");
    apply_override(ctx.config, "filter.uppercase=true");
    apply_override(ctx.config, "subset.sizes=[5,10,20]");
    ctx.run_dir = dir / "run";
    ctx.mock_endpoint = server.endpoint();
    ctx.sleep_between_retries = false;
    return ctx;
}

std::size_t lines(const fs::path& p) {
    std::size_t n = 0;
    read_jsonl(p, true, [&](json&&) { ++n; });
    return n;
}

ErrorKind error_kind(Stage s, RunContext& ctx) {
    try {
        run_stage(s, ctx);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("stage succeeded unexpectedly");
    return ErrorKind::io;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("stage names round trip") {
    for (auto name : stage_names()) CHECK(to_string(parse_stage(name)) == name);
    CHECK(stage_names().size() == 12);
    CHECK_THROWS_AS(parse_stage("train"), Error);
}

TEST_CASE("overrides parse json values and fall back to strings") {
    json c = default_config();
    apply_override(c, "sample.n=12");
    apply_override(c, "teacher.model_id=gpt-4o");
    apply_override(c, "new.nested.flag=true");
    CHECK(c["sample"]["n"] == 12);
    CHECK(c["teacher"]["model_id"] == "gpt-4o");
    CHECK(c["new"]["nested"]["flag"] == true);
    CHECK_THROWS_AS(apply_override(c, "novalue"), Error);
    CHECK_THROWS_AS(apply_override(c, "sample.n.deeper=1"), Error);
}

TEST_CASE("full pipeline on a 50 document fixture") {
    TempDir dir("pipe");
    MockLlmServer server;
    server.set_responder(nonins::testing::pipeline_responder);
    RunContext ctx = context(dir, server);
    const RunLayout L{ctx.run_dir};

    const auto sample = run_stage(Stage::sample, ctx);
    CHECK(sample.summary["sampled"] == 40);
    CHECK(sample.summary["loaded"] == 50);
    CHECK(lines(L.sample_manifest()) == 40);
    CHECK(read_json_file(L.config())["sample"]["n"] == 40);

    run_stage(Stage::split, ctx);
    CHECK(lines(L.splits()) == 40);

    const auto complete = run_stage(Stage::complete, ctx);
    CHECK(complete.exit_code == 0);
    CHECK(complete.summary["done"] == 40);
    CHECK(server.request_count() == 40);
    CHECK(lines(L.completions()) == 40);
    CHECK(lines(L.journal()) == 40);

    const auto filtered = run_stage(Stage::filter, ctx);
    CHECK(server.request_count() == 120);
    const json report = read_json_file(L.removal_report());
    CHECK(report["input"] == 40);
    CHECK(report["output"].get<int>() + report["unique_removed"].get<int>() == 40);
    CHECK(report["instructional"].get<int>() > 0);
    CHECK(report["conversational"].get<int>() > 0);
    CHECK(report["uppercase"].get<int>() > 0);
    CHECK(lines(L.filtered()) == report["output"].get<std::size_t>());
    CHECK(lines(L.verdicts()) == 80);
    CHECK(filtered.summary["rates"]["sample_size"] == 40);

    const auto exported = run_stage(Stage::export_dataset, ctx);
    const fs::path data = L.export_dir() / "dataset.jsonl";
    CHECK(exported.summary["count"] == report["output"]);
    const json info = read_json_file(dataset::info_path(data));
    CHECK(info["filters_applied"].size() == 3);
    CHECK(info["seed"] == 3);
    const auto examples = dataset::read_export(data, dataset::Format::vanilla_sft_jsonl);
    REQUIRE_FALSE(examples.empty());
    CHECK(examples[0].prompt.rfind("Document ", 0) == 0);

    run_stage(Stage::subset, ctx);
    CHECK(lines(L.subset_dir() / "dataset_5.jsonl") == 5);
    CHECK(lines(L.subset_dir() / "dataset_20.jsonl") == 20);

    run_stage(Stage::emit_train, ctx);
    CHECK(fs::exists(L.train_dir() / "train.sh"));

    const auto rep = run_stage(Stage::report, ctx);
    CHECK(rep.summary["counts"]["completions"] == 40);
    CHECK(rep.summary["seeds"]["sample"] == 3);
    CHECK(rep.summary["seeds"]["split"] == 4);
    CHECK(rep.summary["teacher_snapshot"]["model_id"] == "gpt-4-0125-preview");
    CHECK(rep.summary["reference_targets"].size() == 7);
    CHECK(fs::exists(L.report_text()));

    // A finished run costs nothing to re-run.
    server.reset();
    const auto again = run_stage(Stage::complete, ctx);
    CHECK(again.exit_code == 0);
    CHECK(server.request_count() == 0);
    CHECK(again.summary["network_requests"] == 0);
    CHECK(again.summary["cache_hits"] == 40);
}

TEST_CASE("split on an empty sample reports no documents") {
    TempDir dir("pipe");
    MockLlmServer server;
    RunContext ctx = context(dir, server);
    fs::create_directories(ctx.run_dir / "sample");
    write_file_atomic(RunLayout{ctx.run_dir}.documents(), "");
    try {
        run_stage(Stage::split, ctx);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("no documents") != std::string::npos);
        CHECK(exit_code_for(e.kind()) != 0);
    }
}

TEST_CASE("downstream stages fail fast on missing upstream artifacts") {
    TempDir dir("pipe");
    MockLlmServer server;
    RunContext ctx = context(dir, server);
    for (Stage s : {Stage::split, Stage::complete, Stage::filter, Stage::export_dataset, Stage::subset}) {
        CHECK(error_kind(s, ctx) == ErrorKind::missing_input);
    }
    CHECK(server.request_count() == 0);
    CHECK(exit_code_for(ErrorKind::missing_input) == 3);
}

TEST_CASE("missing config values are config errors") {
    TempDir dir("pipe");
    MockLlmServer server;
    RunContext ctx = context(dir, server);
    ctx.config["corpus"]["path"] = nullptr;
    CHECK(error_kind(Stage::sample, ctx) == ErrorKind::config);
    CHECK(error_kind(Stage::merge, ctx) == ErrorKind::config);
    CHECK(error_kind(Stage::eval_mtbench, ctx) == ErrorKind::config);
    CHECK(exit_code_for(ErrorKind::config) == 2);
}

TEST_CASE("dry run plans without calling the teacher") {
    TempDir dir("pipe");
    MockLlmServer server;
    RunContext ctx = context(dir, server);
    ctx.config["prices"] = {{"gpt-4-0125-preview", {{"input_per_million", 10.0}, {"output_per_million", 30.0}}}};
    run_stage(Stage::sample, ctx);
    run_stage(Stage::split, ctx);
    ctx.dry_run = true;
    const auto plan = run_stage(Stage::complete, ctx);
    CHECK(server.request_count() == 0);
    CHECK(plan.summary["requests"] == 40);
    CHECK(plan.summary["estimate"]["amount"].get<double>() > 0.0);
    CHECK(plan.summary["estimate"]["approximate"] == true);
    CHECK(fs::exists(RunLayout{ctx.run_dir}.plan()));
    CHECK_FALSE(fs::exists(RunLayout{ctx.run_dir}.completions()));
}

TEST_CASE("teacher failures give a partial-failure exit with artifacts") {
    TempDir dir("pipe");
    MockLlmServer server;
    server.set_responder([](const nonins::testing::MockRequest& r) {
        if (r.user.rfind("Document 1 ", 0) == 0) return nonins::testing::MockReply{400, ""};
        return nonins::testing::MockReply{200, " fine"};
    });
    RunContext ctx = context(dir, server, 10);
    ctx.config["sample"]["n"] = 10;
    run_stage(Stage::sample, ctx);
    run_stage(Stage::split, ctx);
    const auto r = run_stage(Stage::complete, ctx);
    CHECK(r.exit_code == kExitPartialFailure);
    CHECK(r.summary["failed"] == 1);
    CHECK(lines(RunLayout{ctx.run_dir}.completions()) == 9);
}

TEST_CASE("authentication failures abort the batch with the auth exit code") {
    TempDir dir("pipe");
    MockLlmServer server;
    server.set_responder([](const nonins::testing::MockRequest&) { return nonins::testing::MockReply{401, ""}; });
    RunContext ctx = context(dir, server, 10);
    ctx.config["sample"]["n"] = 10;
    run_stage(Stage::sample, ctx);
    run_stage(Stage::split, ctx);
    CHECK(error_kind(Stage::complete, ctx) == ErrorKind::auth);
    CHECK(exit_code_for(ErrorKind::auth) == 5);
    CHECK(fs::exists(RunLayout{ctx.run_dir}.run_manifest()));
}

TEST_CASE("rates only: a seeded sample is judged and nothing is dropped") {
    TempDir dir("pipe");
    MockLlmServer server;
    server.set_responder(nonins::testing::pipeline_responder);
    RunContext ctx = context(dir, server);
    ctx.config["filter"]["drop_instructional"] = false;
    ctx.config["filter"]["drop_conversational"] = false;
    ctx.config["filter"]["uppercase"] = false;
    ctx.config["filter"]["rate_sample_size"] = 20;
    run_stage(Stage::sample, ctx);
    run_stage(Stage::split, ctx);
    run_stage(Stage::complete, ctx);
    server.reset();
    const auto r = run_stage(Stage::filter, ctx);
    CHECK(server.request_count() == 40);
    CHECK(r.summary["rates"]["sample_size"] == 20);
    CHECK(r.summary["removal"]["unique_removed"] == 0);
    CHECK(lines(RunLayout{ctx.run_dir}.filtered()) == 40);
}

TEST_CASE("drop flag without the matching kind is a config error") {
    TempDir dir("pipe");
    MockLlmServer server;
    RunContext ctx = context(dir, server);
    ctx.config["filter"]["kinds"] = json::array({"conversational"});
    run_stage(Stage::sample, ctx);
    run_stage(Stage::split, ctx);
    run_stage(Stage::complete, ctx);
    CHECK(error_kind(Stage::filter, ctx) == ErrorKind::config);
}

}  // TEST_SUITE
