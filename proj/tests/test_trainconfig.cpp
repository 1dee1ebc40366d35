#include <doctest.h>

#include <sstream>

#include "nonins/error.hpp"
#include "nonins/trainconfig.hpp"
#include "support/temp_dir.hpp"

using namespace nonins;
using namespace nonins::trainconfig;
using nonins::testing::TempDir;

namespace {

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

}  // namespace

TEST_SUITE("trainconfig") {

TEST_CASE("default plan reproduces the reference command byte for byte") {
    const Emission em = emit_command(TrainPlan::placeholders());
    CHECK(em.command == read_file(fs::path(NONINS_SOURCE_DIR) / "tests/golden/train_command.txt"));
}

TEST_CASE("changing the learning rate changes exactly one token") {
    TrainPlan plan = TrainPlan::placeholders();
    const auto before = tokens(emit_command(plan).command);
    plan.learning_rate = 1e-4;
    const auto after = tokens(emit_command(plan).command);
    REQUIRE(before.size() == after.size());
    std::vector<std::pair<std::string, std::string>> diffs;
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (before[i] != after[i]) diffs.emplace_back(before[i], after[i]);
    }
    REQUIRE(diffs.size() == 1);
    CHECK(diffs[0].first == "5e-5");
    CHECK(diffs[0].second == "1e-4");
}

TEST_CASE("number formatting follows the trainer's spelling") {
    CHECK(format_number(5e-5) == "5e-5");
    CHECK(format_number(1e-4) == "1e-4");
    CHECK(format_number(2.5e-5) == "2.5e-5");
    CHECK(format_number(0.001) == "0.001");
    CHECK(format_number(3.0, true) == "3.0");
    CHECK(format_number(1.5, true) == "1.5");
    CHECK(format_number(16.0) == "16");
}

TEST_CASE("script guards placeholders and defaults the save interval") {
    const Emission em = emit_command(TrainPlan::placeholders());
    CHECK(em.script.rfind("#!/usr/bin/env bash\nset -euo pipefail\n", 0) == 0);
    CHECK(em.script.find("${BACKBONE_MODEL:?") != std::string::npos);
    CHECK(em.script.find("${DATASET:?") != std::string::npos);
    CHECK(em.script.find("${SAVE_PATH:?") != std::string::npos);
    CHECK(em.script.find(": \"${SAVE_STEP:=500}\"") != std::string::npos);
    CHECK(em.script.find(em.command) != std::string::npos);
    CHECK(em.warnings.size() == 2);
    CHECK(em.config["assumptions"]["lora_rank"] == 8);
    CHECK(em.config["assumptions"]["lora_hyperparameters_assumed"] == true);
    CHECK(em.config["learning_rate"] == 5e-5);
}

TEST_CASE("explicit values replace placeholders and lora flags are appended") {
    TempDir dir("train");
    write_file_atomic(dir / "data.json", "[]");
    TrainPlan plan = TrainPlan::placeholders();
    plan.backbone_model = "mistralai/Mistral-7B-v0.1";
    plan.dataset = (dir / "data.json").string();
    plan.output_dir = "out";
    plan.save_steps = 1000;
    plan.lora_rank = 16;
    plan.lora_alpha = 32;
    const Emission em = emit_command(plan);
    CHECK(em.command.find("--save_steps 1000 \\") != std::string::npos);
    CHECK(em.command.find("--model_name_or_path mistralai/Mistral-7B-v0.1 \\") != std::string::npos);
    CHECK(em.command.find("    --fp16 \\\n    --lora_rank 16 \\\n    --lora_alpha 32 \\\n") != std::string::npos);
    CHECK(em.script.find(":?") == std::string::npos);
    CHECK(em.warnings.empty());

    write_emission(dir / "train", em);
    CHECK(read_file(dir / "train/train.sh") == em.script);
    const auto perms = fs::status(dir / "train/train.sh").permissions();
    CHECK((perms & fs::perms::owner_exec) != fs::perms::none);
    CHECK(read_json_file(dir / "train/train_config.json") == em.config);
}

TEST_CASE("validation") {
    TrainPlan plan = TrainPlan::placeholders();
    plan.dataset = "/definitely/not/here.json";
    try {
        emit_command(plan);
        FAIL("expected missing dataset");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::missing_input);
    }
    plan = TrainPlan::placeholders();
    plan.learning_rate = 0;
    CHECK_THROWS_AS(emit_command(plan), Error);
    plan = TrainPlan::placeholders();
    plan.per_device_batch = 0;
    CHECK_THROWS_AS(emit_command(plan), Error);
}

TEST_CASE("plans load from json with placeholder defaults") {
    const TrainPlan p = plan_from_json({{"learning_rate", 1e-4}, {"save_steps", 200}});
    CHECK(p.learning_rate == 1e-4);
    CHECK(p.save_steps == 200);
    CHECK(p.backbone_model == "$BACKBONE_MODEL");
    CHECK(p.epochs == 3.0);
    CHECK(plan_from_json(json::object()).dataset == "$DATASET");
}

}  // TEST_SUITE
