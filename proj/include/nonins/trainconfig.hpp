#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nonins/jsonl.hpp"

namespace nonins::trainconfig {

/// Parameters of the external LoRA SFT run. Defaults reproduce the reference
/// LLaMA-Factory 0.5.2 command.
struct TrainPlan {
    std::string backbone_model;
    std::string dataset;
    std::string output_dir;
    double learning_rate = 5e-5;
    double epochs = 3.0;
    int per_device_batch = 8;
    int grad_accum = 4;
    std::string scheduler = "cosine";
    std::string template_name = "vanilla";
    std::string lora_target = "all";
    /// Unset renders `$SAVE_STEP`; the emitted script then defaults it to 500.
    std::optional<int> save_steps;
    int gpus = 8;
    std::string precision = "fp16";

    int master_port = 9901;
    int logging_steps = 10;
    std::string deepspeed_config = "scripts/ds_config_min_scale.json";
    std::string entry_point = "src/train_bash.py";

    /// Extension flags, appended after the reference flags only when set.
    std::optional<int> lora_rank;
    std::optional<double> lora_alpha;

    /// Plan whose variable slots are the shell placeholders $BACKBONE_MODEL,
    /// $DATASET, $SAVE_PATH and $SAVE_STEP.
    static TrainPlan placeholders();

    void validate() const;
};

inline constexpr int kDefaultSaveSteps = 500;
/// Trainer-side LoRA defaults assumed when the plan leaves rank/alpha unset.
inline constexpr int kAssumedLoraRank = 8;
inline constexpr double kAssumedLoraAlpha = 16.0;

struct Emission {
    std::string command;  // the deepspeed invocation, one flag per line
    std::string script;   // runnable bash script wrapping `command`
    json config;          // structured mirror of every setting
    std::vector<std::string> warnings;
};

/// Renders a number the way the reference command spells it: 5e-5, 1e-4, 3.0.
std::string format_number(double value, bool force_decimal = false);

Emission emit_command(const TrainPlan& plan);

/// Writes `train.sh` (executable) and `train_config.json` into `dir`.
void write_emission(const fs::path& dir, const Emission& emission);

TrainPlan plan_from_json(const json& j);

}  // namespace nonins::trainconfig
