// nonins: command-line driver for the distillation pipeline.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "nonins/error.hpp"
#include "nonins/pipeline.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
    using namespace nonins;

    CLI::App app{"Build non-instructional fine-tuning data from plain text and evaluate the result."};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string run_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string mock_endpoint;
    bool dry_run = false;

    app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("-r,--run-dir", run_dir, "Run directory (overrides run_dir in config)");
    app.add_option("-s,--set", overrides, "Override a config value, e.g. --set sample.n=500");
    app.add_option("--seed", seed, "Seed for sampling, splitting and subsetting");
    app.add_option("--mock-endpoint", mock_endpoint, "Send every provider request to this base URL");
    app.add_flag("--dry-run", dry_run, "Plan and estimate cost without calling any API");

    for (auto name : pipeline::stage_names()) {
        app.add_subcommand(std::string(name), "Run the " + std::string(name) + " stage");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const pipeline::Stage stage = pipeline::parse_stage(app.get_subcommands().front()->get_name());

        pipeline::RunContext ctx;
        ctx.config = pipeline::default_config();
        if (!config_path.empty()) ctx.config.merge_patch(read_json_file(config_path));
        for (const auto& o : overrides) pipeline::apply_override(ctx.config, o);
        if (seed) {
            for (const char* s : {"sample", "split", "subset"}) ctx.config[s]["seed"] = *seed;
            ctx.config["filter"]["sample_seed"] = *seed;
        }
        if (!run_dir.empty()) ctx.config["run_dir"] = run_dir;
        if (!ctx.config.contains("run_dir") || !ctx.config["run_dir"].is_string()) {
            throw Error(ErrorKind::config, "no run directory: pass --run-dir or set run_dir in the config");
        }
        ctx.run_dir = ctx.config["run_dir"].get<std::string>();
        if (!mock_endpoint.empty()) ctx.mock_endpoint = mock_endpoint;
        ctx.dry_run = dry_run;
        ctx.stop = &g_stop;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);

        const pipeline::StageResult result = pipeline::run_stage(stage, ctx);
        std::cout << result.summary.dump(2) << "\n";
        if (result.exit_code != 0) {
            std::cerr << "nonins: " << pipeline::to_string(stage) << " finished with failures or was interrupted\n";
        }
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << "nonins: " << to_string(e.kind()) << " error: " << e.what() << "\n";
        return pipeline::exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "nonins: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "nonins: " << e.what() << "\n";
        return 1;
    }
}
