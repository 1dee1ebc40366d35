#include "nonins/trainconfig.hpp"

#include <charconv>
#include <cmath>

#include "nonins/error.hpp"

namespace nonins::trainconfig {

TrainPlan TrainPlan::placeholders() {
    TrainPlan plan;
    plan.backbone_model = "$BACKBONE_MODEL";
    plan.dataset = "$DATASET";
    plan.output_dir = "$SAVE_PATH";
    return plan;
}

namespace {

bool is_placeholder(const std::string& s) {
    return !s.empty() && s.front() == '$';
}

}  // namespace

void TrainPlan::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
    if (backbone_model.empty()) fail("backbone_model is required");
    if (dataset.empty()) fail("dataset is required");
    if (output_dir.empty()) fail("output_dir is required");
    if (!(epochs > 0.0) || !std::isfinite(epochs)) fail("epochs must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
    if (per_device_batch <= 0) fail("per_device_batch must be positive");
    if (grad_accum <= 0) fail("grad_accum must be positive");
    if (gpus <= 0) fail("gpus must be positive");
    if (save_steps && *save_steps <= 0) fail("save_steps must be positive");
    if (logging_steps <= 0) fail("logging_steps must be positive");
    if (precision != "fp16") fail("only fp16 precision is supported");
    if (lora_rank && *lora_rank <= 0) fail("lora_rank must be positive");
    if (lora_alpha && !(*lora_alpha > 0.0)) fail("lora_alpha must be positive");
    if (!is_placeholder(dataset)) {
        std::error_code ec;
        if (!fs::exists(dataset, ec)) throw Error(ErrorKind::missing_input, "dataset not found: " + dataset);
    }
}

std::string format_number(double value, bool force_decimal) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    std::string s(buf, res.ptr);
    if (const auto e = s.find('e'); e != std::string::npos) {
        // 5e-05 -> 5e-5
        std::string mantissa = s.substr(0, e);
        std::string exponent = s.substr(e + 1);
        std::string sign;
        if (!exponent.empty() && (exponent[0] == '-' || exponent[0] == '+')) {
            if (exponent[0] == '-') sign = "-";
            exponent.erase(0, 1);
        }
        exponent.erase(0, std::min(exponent.find_first_not_of('0'), exponent.size() - 1));
        return mantissa + "e" + sign + exponent;
    }
    if (force_decimal && s.find('.') == std::string::npos) s += ".0";
    return s;
}

Emission emit_command(const TrainPlan& plan) {
    plan.validate();
    Emission em;

    const std::string save_steps = plan.save_steps ? std::to_string(*plan.save_steps) : "$SAVE_STEP";
    std::vector<std::string> flags = {
        "--deepspeed " + plan.deepspeed_config,
        "--stage sft",
        "--model_name_or_path " + plan.backbone_model,
        "--do_train",
        "--dataset " + plan.dataset,
        "--template " + plan.template_name,
        "--finetuning_type lora",
        "--lora_target " + plan.lora_target,
        "--output_dir " + plan.output_dir,
        "--per_device_train_batch_size " + std::to_string(plan.per_device_batch),
        "--gradient_accumulation_steps " + std::to_string(plan.grad_accum),
        "--lr_scheduler_type " + plan.scheduler,
        "--logging_steps " + std::to_string(plan.logging_steps),
        "--save_steps " + save_steps,
        "--learning_rate " + format_number(plan.learning_rate),
        "--num_train_epochs " + format_number(plan.epochs, true),
        "--plot_loss",
        "--" + plan.precision,
    };
    json extensions = json::object();
    if (plan.lora_rank) {
        flags.push_back("--lora_rank " + std::to_string(*plan.lora_rank));
        extensions["lora_rank"] = *plan.lora_rank;
    }
    if (plan.lora_alpha) {
        flags.push_back("--lora_alpha " + format_number(*plan.lora_alpha));
        extensions["lora_alpha"] = *plan.lora_alpha;
    }

    em.command = "deepspeed --num_gpus " + std::to_string(plan.gpus) + " --master_port " +
                 std::to_string(plan.master_port) + "  " + plan.entry_point + " \\\n";
    for (const auto& f : flags) em.command += "    " + f + " \\\n";

    std::string preamble = "#!/usr/bin/env bash\nset -euo pipefail\n";
    for (const auto& [value, var] : {std::pair{plan.backbone_model, "BACKBONE_MODEL"},
                                     std::pair{plan.dataset, "DATASET"},
                                     std::pair{plan.output_dir, "SAVE_PATH"}}) {
        if (is_placeholder(value)) preamble += ": \"${" + std::string(var) + ":?must be exported}\"\n";
    }
    if (!plan.save_steps) {
        preamble += ": \"${SAVE_STEP:=" + std::to_string(kDefaultSaveSteps) + "}\"\n";
        em.warnings.push_back("save_steps not set; the script falls back to SAVE_STEP=" +
                              std::to_string(kDefaultSaveSteps) + " unless it is exported");
    }
    if (!plan.lora_rank || !plan.lora_alpha) {
        em.warnings.push_back("LoRA rank/alpha not set; the trainer's defaults apply (assumed r=" +
                              std::to_string(kAssumedLoraRank) + ", alpha=" + format_number(kAssumedLoraAlpha) + ")");
    }
    em.script = preamble + "\n" + em.command + "\n";

    em.config = {
        {"trainer", "LLaMA-Factory"},
        {"trainer_version", "0.5.2"},
        {"launcher", {{"program", "deepspeed"}, {"num_gpus", plan.gpus}, {"master_port", plan.master_port},
                      {"entry_point", plan.entry_point}}},
        {"deepspeed_config", plan.deepspeed_config},
        {"stage", "sft"},
        {"model_name_or_path", plan.backbone_model},
        {"dataset", plan.dataset},
        {"template", plan.template_name},
        {"finetuning_type", "lora"},
        {"lora_target", plan.lora_target},
        {"output_dir", plan.output_dir},
        {"per_device_train_batch_size", plan.per_device_batch},
        {"gradient_accumulation_steps", plan.grad_accum},
        {"lr_scheduler_type", plan.scheduler},
        {"logging_steps", plan.logging_steps},
        {"learning_rate", plan.learning_rate},
        {"num_train_epochs", plan.epochs},
        {"plot_loss", true},
        {"precision", plan.precision},
        {"extensions", extensions},
        {"assumptions", {{"lora_rank", plan.lora_rank.value_or(kAssumedLoraRank)},
                         {"lora_alpha", plan.lora_alpha.value_or(kAssumedLoraAlpha)},
                         {"lora_hyperparameters_assumed", !plan.lora_rank || !plan.lora_alpha}}},
        {"warnings", em.warnings},
    };
    em.config["save_steps"] = plan.save_steps ? json(*plan.save_steps) : json("$SAVE_STEP");
    return em;
}

void write_emission(const fs::path& dir, const Emission& emission) {
    fs::create_directories(dir);
    const fs::path script = dir / "train.sh";
    write_file_atomic(script, emission.script);
    fs::permissions(script, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
    write_json_file(dir / "train_config.json", emission.config);
}

TrainPlan plan_from_json(const json& j) {
    TrainPlan plan = TrainPlan::placeholders();
    plan.backbone_model = j.value("backbone_model", plan.backbone_model);
    plan.dataset = j.value("dataset", plan.dataset);
    plan.output_dir = j.value("output_dir", plan.output_dir);
    plan.learning_rate = j.value("learning_rate", plan.learning_rate);
    plan.epochs = j.value("epochs", plan.epochs);
    plan.per_device_batch = j.value("per_device_batch", plan.per_device_batch);
    plan.grad_accum = j.value("grad_accum", plan.grad_accum);
    plan.scheduler = j.value("scheduler", plan.scheduler);
    plan.template_name = j.value("template", plan.template_name);
    plan.lora_target = j.value("lora_target", plan.lora_target);
    plan.gpus = j.value("gpus", plan.gpus);
    plan.precision = j.value("precision", plan.precision);
    if (j.contains("save_steps") && !j["save_steps"].is_null()) plan.save_steps = j["save_steps"].get<int>();
    if (j.contains("lora_rank") && !j["lora_rank"].is_null()) plan.lora_rank = j["lora_rank"].get<int>();
    if (j.contains("lora_alpha") && !j["lora_alpha"].is_null()) plan.lora_alpha = j["lora_alpha"].get<double>();
    return plan;
}

}  // namespace nonins::trainconfig
