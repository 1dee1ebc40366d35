#include "nonins/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "nonins/corpus.hpp"
#include "nonins/dataset.hpp"
#include "nonins/error.hpp"
#include "nonins/evalharness.hpp"
#include "nonins/filter.hpp"
#include "nonins/merge.hpp"
#include "nonins/splitter.hpp"
#include "nonins/trainconfig.hpp"

namespace nonins::pipeline {

namespace {

struct StageName {
    Stage stage;
    std::string_view name;
};

constexpr StageName kStages[] = {
    {Stage::sample, "sample"},         {Stage::split, "split"},
    {Stage::complete, "complete"},     {Stage::filter, "filter"},
    {Stage::export_dataset, "export"}, {Stage::subset, "subset"},
    {Stage::merge, "merge"},           {Stage::merge_base, "merge-base"},
    {Stage::emit_train, "emit-train"}, {Stage::eval_mtbench, "eval-mtbench"},
    {Stage::eval_wr, "eval-wr"},       {Stage::report, "report"},
};

}  // namespace

Stage parse_stage(std::string_view name) {
    for (const auto& s : kStages) {
        if (s.name == name) return s.stage;
    }
    throw Error(ErrorKind::invalid_argument, "unknown subcommand: " + std::string(name));
}

std::string_view to_string(Stage stage) {
    for (const auto& s : kStages) {
        if (s.stage == stage) return s.name;
    }
    return "unknown";
}

const std::vector<std::string_view>& stage_names() {
    static const std::vector<std::string_view> names = [] {
        std::vector<std::string_view> v;
        for (const auto& s : kStages) v.push_back(s.name);
        return v;
    }();
    return names;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
        case ErrorKind::config:
        case ErrorKind::parse:
            return 2;
        case ErrorKind::missing_input:
        case ErrorKind::io:
            return 3;
        case ErrorKind::auth:
            return 5;
        case ErrorKind::transport:
        case ErrorKind::rate_limited:
        case ErrorKind::provider:
        case ErrorKind::refusal:
        case ErrorKind::unparseable_reply:
            return 6;
        case ErrorKind::shape_mismatch:
        case ErrorKind::non_finite:
            return 7;
    }
    return 1;
}

json default_config() {
    return json::parse(R"({
  "corpus": {"path": null, "format": "jsonl", "strict": false, "min_words": 4},
  "sample": {"n": 80000, "seed": 0},
  "split": {"seed": 0},
  "teacher": {"provider": "openai-compatible", "model_id": "gpt-4-0125-preview",
              "temperature": 0.0, "max_output_tokens": 2048},
  "batch": {"max_in_flight": 8, "max_failures": null, "cache_dir": null},
  "retry": {"max_attempts": 5, "base_delay_s": 1.0, "jitter": 0.25},
  "prices": null,
  "filter": {"judge": {"provider": "openai-compatible", "model_id": "gpt-4o",
                       "temperature": 0.0, "max_output_tokens": 512},
             "kinds": [], "drop_instructional": false, "drop_conversational": false,
             "uppercase": false, "rate_sample_size": 2000, "sample_seed": 0,
             "skip_unparseable": false, "examples": {}},
  "export": {"format": "vanilla-sft-jsonl", "name": "nonins", "use_filtered": true},
  "subset": {"sizes": [1000, 10000, 20000, 40000, 80000], "seed": 0},
  "merge": {"backbone": null, "adapters": null, "descriptor": null, "output": null},
  "merge_base": {"instruct": null, "adapters": null, "descriptor": null, "output": null},
  "train": {},
  "eval": {"mtbench_scores": null, "missing": "reject", "verdicts": null, "table": null}
})");
}

void apply_override(json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(ErrorKind::config, "override must look like key.path=value: " + std::string(assignment));
    }
    const std::string path(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &config;
    std::stringstream ss(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.')) keys.push_back(key);
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        json& child = (*node)[keys[i]];
        if (child.is_null()) child = json::object();
        if (!child.is_object()) throw Error(ErrorKind::config, "override path crosses a non-object: " + path);
        node = &child;
    }
    (*node)[keys.back()] = std::move(value);
}

namespace {

void require(const fs::path& path, std::string_view producer) {
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        throw Error(ErrorKind::missing_input, "missing upstream artifact " + path.string() + " (run `" +
                                                  std::string(producer) + "` first)");
    }
}

template <typename T, typename F>
std::vector<T> read_records(const fs::path& path, F&& from_json) {
    std::vector<T> out;
    read_jsonl(path, true, [&](json&& j) { out.push_back(from_json(j)); });
    return out;
}

std::size_t count_lines(const fs::path& path) {
    std::size_t n = 0;
    read_jsonl(path, false, [&](json&&) { ++n; });
    return n;
}

const json& section(const RunContext& ctx, const char* name) {
    static const json kEmpty = json::object();
    auto it = ctx.config.find(name);
    return it != ctx.config.end() && it->is_object() ? *it : kEmpty;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

std::string required_string(const json& j, const char* section_name, const char* key) {
    auto v = opt_string(j, key);
    if (!v || v->empty()) {
        throw Error(ErrorKind::config, std::string("config needs ") + section_name + "." + key);
    }
    return *v;
}

teacher::TeacherSpec spec_for(const RunContext& ctx, const json& spec_json) {
    teacher::TeacherSpec spec = teacher::spec_from_json(spec_json);
    if (ctx.mock_endpoint) spec.endpoint_url = *ctx.mock_endpoint;
    spec.validate();
    return spec;
}

teacher::Credentials credentials_for(const RunContext& ctx, teacher::Provider provider) {
    if (!ctx.mock_endpoint) return teacher::credentials_from_env(provider);
    const std::string var(teacher::credential_variable(provider));
    const char* value = std::getenv(var.c_str());
    return {value && *value ? value : "mock-key"};
}

teacher::RetryPolicy retry_policy(const RunContext& ctx) {
    const json& r = section(ctx, "retry");
    teacher::RetryPolicy policy;
    policy.max_attempts = r.value("max_attempts", policy.max_attempts);
    policy.base_delay = std::chrono::duration<double>(r.value("base_delay_s", 1.0));
    policy.jitter = r.value("jitter", policy.jitter);
    return policy;
}

std::unique_ptr<teacher::TeacherClient> make_client(const RunContext& ctx, const teacher::TeacherSpec& spec,
                                                    const fs::path& cache_dir) {
    auto transport = ctx.transport ? ctx.transport : http::default_transport();
    auto client = std::make_unique<teacher::TeacherClient>(spec, credentials_for(ctx, spec.provider), transport,
                                                           cache_dir, retry_policy(ctx));
    if (!ctx.sleep_between_retries) client->set_sleeper([](std::chrono::duration<double>) {});
    return client;
}

teacher::BatchOptions batch_options(const RunContext& ctx) {
    const json& b = section(ctx, "batch");
    teacher::BatchOptions options;
    options.max_in_flight = b.value("max_in_flight", std::size_t{8});
    if (auto it = b.find("max_failures"); it != b.end() && !it->is_null()) {
        options.max_failures = it->get<std::size_t>();
    }
    if (ctx.stop) {
        const std::atomic<bool>* stop = ctx.stop;
        options.stop_requested = [stop] { return stop->load(); };
    }
    return options;
}

std::optional<teacher::PriceTable> price_table(const RunContext& ctx) {
    auto it = ctx.config.find("prices");
    if (it == ctx.config.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return teacher::PriceTable::from_json(read_json_file(it->get<std::string>()));
    return teacher::PriceTable::from_json(*it);
}

json seeds(const RunContext& ctx) {
    return {{"sample", section(ctx, "sample").value("seed", std::uint64_t{0})},
            {"split", section(ctx, "split").value("seed", std::uint64_t{0})},
            {"subset", section(ctx, "subset").value("seed", std::uint64_t{0})},
            {"filter_sample", section(ctx, "filter").value("sample_seed", std::uint64_t{0})}};
}

// ---------------------------------------------------------------------------

StageResult run_sample(RunContext& ctx, const RunLayout& layout) {
    const json& c = section(ctx, "corpus");
    const std::string path = required_string(c, "corpus", "path");
    corpus::LoadOptions options;
    options.format = corpus::parse_format(c.value("format", "jsonl"));
    options.strict = c.value("strict", false);
    options.min_words = c.value("min_words", splitter::kMinWords);
    if (options.min_words < splitter::kMinWords) {
        throw Error(ErrorKind::config, "corpus.min_words cannot be below 4");
    }

    corpus::LoadStats stats;
    std::vector<corpus::Document> docs = corpus::load_corpus(path, options, &stats);
    const json& s = section(ctx, "sample");
    const auto n = s.value("n", std::size_t{0});
    const auto seed = s.value("seed", std::uint64_t{0});
    std::size_t duplicates = 0;
    const std::vector<corpus::Document> picked = corpus::sample_uniform(std::move(docs), n, seed, &duplicates);

    JsonlWriter out(layout.documents());
    JsonlWriter manifest(layout.sample_manifest());
    for (const auto& d : picked) {
        out.write(corpus::to_json(d));
        manifest.write(corpus::manifest_record(d));
    }
    json summary = {{"loaded", stats.yielded},
                    {"records", stats.records},
                    {"skipped_empty", stats.skipped_empty},
                    {"skipped_short", stats.skipped_short},
                    {"skipped_invalid_utf8", stats.skipped_invalid_utf8},
                    {"malformed", stats.malformed},
                    {"duplicates_dropped", duplicates},
                    {"sampled", picked.size()},
                    {"seed", seed},
                    {"word_definition", "maximal run of non-whitespace Unicode code points"},
                    {"warnings", stats.warnings}};
    write_json_file(layout.sample_summary(), summary);
    return {summary};
}

StageResult run_split(RunContext& ctx, const RunLayout& layout) {
    require(layout.documents(), "sample");
    const auto docs = read_records<corpus::Document>(layout.documents(), corpus::document_from_json);
    if (docs.empty()) throw Error(ErrorKind::invalid_argument, "no documents to split");
    const auto seed = section(ctx, "split").value("seed", std::uint64_t{0});

    JsonlWriter out(layout.splits());
    for (const auto& d : docs) out.write(splitter::to_json(splitter::split(d, seed)));
    return {{{"splits", out.count()}, {"seed", seed}}};
}

StageResult run_complete(RunContext& ctx, const RunLayout& layout) {
    require(layout.splits(), "split");
    const auto splits = read_records<splitter::SplitRecord>(layout.splits(), splitter::split_from_json);
    const teacher::TeacherSpec spec = spec_for(ctx, section(ctx, "teacher"));
    const auto prices = price_table(ctx);

    if (ctx.dry_run) {
        json plan = {{"requests", splits.size()}, {"teacher", teacher::to_json(spec)}};
        if (prices && prices->contains(spec.model_id)) {
            const auto est = teacher::estimate_plan_cost(splits, spec, *prices);
            plan["estimate"] = {{"input_tokens", est.input_tokens},
                                {"output_tokens", est.output_tokens},
                                {"amount", est.amount},
                                {"approximate", true},
                                {"tokens_per_word", teacher::kTokensPerWord}};
        } else {
            plan["estimate"] = nullptr;
        }
        write_json_file(layout.plan(), plan);
        return {plan};
    }

    const auto cache_dir = opt_string(section(ctx, "batch"), "cache_dir");
    auto client = make_client(ctx, spec, cache_dir ? fs::path(*cache_dir) : layout.cache());
    teacher::BatchOptions options = batch_options(ctx);
    options.journal_path = layout.journal();
    teacher::RunManifest manifest = teacher::run_batch(teacher::items_from_splits(splits), *client, options);
    if (prices && prices->contains(spec.model_id)) {
        manifest.totals.estimated_cost = teacher::estimate_cost(manifest, *prices).amount;
    }

    JsonlWriter out(layout.completions());
    for (const auto& e : manifest.entries) {
        if (e.record) out.write(teacher::to_json(*e.record));
    }
    write_json_file(layout.run_manifest(), teacher::to_json(manifest));

    json summary = teacher::to_json(manifest)["totals"];
    summary["network_requests"] = client->network_requests();
    summary["interrupted"] = manifest.interrupted;
    if (manifest.aborted) {
        throw Error(manifest.abort_reason.rfind("authentication", 0) == 0 ? ErrorKind::auth : ErrorKind::provider,
                    "batch aborted: " + manifest.abort_reason);
    }
    const bool partial = manifest.interrupted || manifest.totals.failed > 0;
    return {summary, partial ? kExitPartialFailure : 0};
}

std::map<filter::Kind, filter::Examples> configured_examples(const json& f) {
    std::map<filter::Kind, filter::Examples> out;
    auto it = f.find("examples");
    if (it == f.end() || !it->is_object()) return out;
    for (const auto& [name, files] : it->items()) {
        const filter::Kind kind = filter::parse_kind(name);
        filter::Examples ex = filter::default_examples(kind);
        if (auto p = opt_string(files, "positive_file")) ex.positive = read_file(*p);
        if (auto n = opt_string(files, "negative_file")) ex.negative = read_file(*n);
        out[kind] = std::move(ex);
    }
    return out;
}

StageResult run_filter(RunContext& ctx, const RunLayout& layout) {
    require(layout.completions(), "complete");
    require(layout.splits(), "split");
    const json& f = section(ctx, "filter");
    const auto completions = read_records<teacher::CompletionRecord>(layout.completions(), teacher::completion_from_json);
    const auto splits = read_records<splitter::SplitRecord>(layout.splits(), splitter::split_from_json);
    std::unordered_map<std::string, const splitter::SplitRecord*> split_of;
    for (const auto& s : splits) split_of.emplace(s.doc_id, &s);

    filter::FilterFlags flags;
    flags.drop_instructional = f.value("drop_instructional", false);
    flags.drop_conversational = f.value("drop_conversational", false);
    flags.uppercase = f.value("uppercase", false);

    std::vector<filter::Kind> kinds;
    for (const auto& k : f.value("kinds", json::array())) kinds.push_back(filter::parse_kind(k.get<std::string>()));
    auto has_kind = [&](filter::Kind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
    if (flags.drop_instructional && !has_kind(filter::Kind::instructional)) {
        throw Error(ErrorKind::config, "filter.drop_instructional needs \"instructional\" in filter.kinds");
    }
    if (flags.drop_conversational && !has_kind(filter::Kind::conversational)) {
        throw Error(ErrorKind::config, "filter.drop_conversational needs \"conversational\" in filter.kinds");
    }

    std::vector<filter::Candidate> candidates;
    std::vector<corpus::Document> judged;
    for (const auto& c : completions) {
        auto it = split_of.find(c.doc_id);
        if (it == split_of.end()) throw Error(ErrorKind::missing_input, "no split for completion " + c.doc_id);
        candidates.push_back({c, it->second->suffix_original});
        corpus::Document d;
        d.id = c.doc_id;
        d.text = it->second->prefix + c.continuation;
        d.word_count = it->second->k;
        judged.push_back(std::move(d));
    }

    json summary = json::object();
    std::vector<filter::FilterVerdict> verdicts;
    if (!kinds.empty() && !judged.empty()) {
        const bool removing = flags.drop_instructional || flags.drop_conversational;
        const auto sample_size = f.value("rate_sample_size", filter::kDefaultRateSampleSize);
        if (!removing && sample_size > 0 && sample_size < judged.size()) {
            judged = corpus::sample_uniform(std::move(judged), sample_size, f.value("sample_seed", std::uint64_t{0}));
        }
        if (ctx.dry_run) {
            summary["judge_requests"] = judged.size() * kinds.size();
            summary["dry_run"] = true;
            return {summary};
        }
        const teacher::TeacherSpec judge_spec = spec_for(ctx, f.value("judge", json::object()));
        auto client = make_client(ctx, judge_spec, layout.judge_cache());
        filter::MeasureOptions options;
        options.dataset_tag = f.value("dataset_tag", section(ctx, "teacher").value("model_id", ""));
        options.kinds = kinds;
        options.examples = configured_examples(f);
        options.skip_unparseable = f.value("skip_unparseable", false);
        options.batch = batch_options(ctx);
        const filter::RateReport rates = filter::measure_rates(judged, *client, options, &verdicts);
        json rates_json = filter::to_json(rates);
        rates_json["judge"] = teacher::to_json(judge_spec);
        write_json_file(layout.rates(), rates_json);
        summary["rates"] = rates_json;
    }

    JsonlWriter verdict_out(layout.verdicts());
    for (const auto& v : verdicts) verdict_out.write(filter::to_json(v));

    filter::FilterResult result = filter::apply_filters(std::move(candidates), verdicts, flags);
    JsonlWriter kept(layout.filtered());
    for (const auto& c : result.kept) kept.write(teacher::to_json(c.record));

    json report = filter::to_json(result.report);
    report["flags"] = {{"drop_instructional", flags.drop_instructional},
                       {"drop_conversational", flags.drop_conversational},
                       {"uppercase", flags.uppercase}};
    write_json_file(layout.removal_report(), report);
    summary["removal"] = report;
    return {summary};
}

fs::path export_path(const RunContext& ctx, const RunLayout& layout) {
    const auto format = dataset::parse_format(section(ctx, "export").value("format", "vanilla-sft-jsonl"));
    return layout.export_dir() / (format == dataset::Format::raw_text ? "dataset.txt" : "dataset.jsonl");
}

StageResult run_export(RunContext& ctx, const RunLayout& layout) {
    const json& e = section(ctx, "export");
    const bool use_filtered = e.value("use_filtered", true);
    const fs::path source = use_filtered ? layout.filtered() : layout.completions();
    require(source, use_filtered ? "filter" : "complete");
    require(layout.splits(), "split");
    const auto completions = read_records<teacher::CompletionRecord>(source, teacher::completion_from_json);
    const auto splits = read_records<splitter::SplitRecord>(layout.splits(), splitter::split_from_json);
    const auto examples = dataset::assemble(splits, completions);
    if (examples.empty()) throw Error(ErrorKind::invalid_argument, "no examples to export");

    const auto format = dataset::parse_format(e.value("format", "vanilla-sft-jsonl"));
    const fs::path path = export_path(ctx, layout);
    const dataset::ExportResult result = dataset::export_dataset(examples, format, path);

    dataset::DatasetInfo info;
    info.name = e.value("name", "nonins");
    info.format = format;
    info.count = result.count;
    info.teacher = section(ctx, "teacher").value("model_id", "");
    if (use_filtered) {
        const json report = read_json_file(layout.removal_report());
        for (const char* flag : {"drop_instructional", "drop_conversational", "uppercase"}) {
            if (report.at("flags").value(flag, false)) info.filters_applied.emplace_back(flag);
        }
    }
    info.seed = section(ctx, "sample").value("seed", std::uint64_t{0});
    dataset::write_info(path, info);
    return {{{"path", path.string()}, {"count", result.count}, {"skipped_empty", result.skipped_empty},
             {"warnings", result.warnings}}};
}

StageResult run_subset(RunContext& ctx, const RunLayout& layout) {
    const fs::path source = export_path(ctx, layout);
    require(source, "export");
    const auto format = dataset::parse_format(section(ctx, "export").value("format", "vanilla-sft-jsonl"));
    const auto examples = dataset::read_export(source, format);
    const json& s = section(ctx, "subset");
    const auto sizes = s.value("sizes", std::vector<std::size_t>{});
    const auto seed = s.value("seed", std::uint64_t{0});
    const auto parts = dataset::subset(examples, sizes, seed);

    json files = json::array();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const fs::path path = layout.subset_dir() / ("dataset_" + std::to_string(sizes[i]) + ".jsonl");
        const auto result = dataset::export_dataset(parts[i], format, path);
        dataset::DatasetInfo info;
        info.name = section(ctx, "export").value("name", "nonins") + "-" + std::to_string(sizes[i]);
        info.format = format;
        info.count = result.count;
        info.teacher = section(ctx, "teacher").value("model_id", "");
        info.seed = seed;
        dataset::write_info(path, info);
        files.push_back({{"size", sizes[i]}, {"path", path.string()}, {"count", result.count}});
    }
    return {{{"subsets", files}, {"seed", seed}}};
}

StageResult run_merge(RunContext& ctx, const RunLayout& layout, bool base) {
    const char* name = base ? "merge_base" : "merge";
    const json& m = section(ctx, name);
    const std::string backbone_path = required_string(m, name, base ? "instruct" : "backbone");
    const std::string adapters_path = required_string(m, name, "adapters");
    const std::string descriptor_path = required_string(m, name, "descriptor");
    require(backbone_path, name);
    require(adapters_path, name);
    require(descriptor_path, name);

    const merge::TensorArchive backbone = merge::read_archive(backbone_path);
    const auto adapters = merge::read_adapters(adapters_path, descriptor_path);
    const merge::TensorArchive merged =
        base ? merge::merge_lora_base(backbone, adapters) : merge::merge_lora(backbone, adapters);
    const auto out = opt_string(m, "output");
    const fs::path output = out ? fs::path(*out) : layout.merge_dir() / (base ? "merged_base.safetensors" : "merged.safetensors");
    merge::write_archive(output, merged);

    json targets = json::array();
    for (const auto& a : adapters) targets.push_back(a.target);
    return {{{"output", output.string()}, {"tensors", merged.size()}, {"adapted", targets},
             {"mode", base ? "lora-base" : "lora"}}};
}

StageResult run_emit_train(RunContext& ctx, const RunLayout& layout) {
    const trainconfig::TrainPlan plan = trainconfig::plan_from_json(section(ctx, "train"));
    const trainconfig::Emission em = trainconfig::emit_command(plan);
    trainconfig::write_emission(layout.train_dir(), em);
    return {{{"script", (layout.train_dir() / "train.sh").string()}, {"warnings", em.warnings}}};
}

StageResult run_eval_mtbench(RunContext& ctx, const RunLayout& layout) {
    const json& e = section(ctx, "eval");
    const std::string path = required_string(e, "eval", "mtbench_scores");
    require(path, "eval-mtbench");
    const eval::ScoreMatrix matrix = eval::ScoreMatrix::from_jsonl(path);
    eval::AggregateOptions options;
    const std::string missing = e.value("missing", "reject");
    if (missing == "exclude") {
        options.missing = eval::MissingPolicy::exclude_with_report;
    } else if (missing != "reject") {
        throw Error(ErrorKind::config, "eval.missing must be \"reject\" or \"exclude\"");
    }
    const eval::MtBenchSummary s = eval::aggregate_mtbench(matrix, options);
    json out = eval::to_json(s);
    out["questions"] = matrix.questions();
    out["rounds"] = matrix.rounds();
    write_json_file(layout.mtbench(), out);

    if (auto t = e.find("table"); t != e.end() && t->is_object()) {
        eval::ReportRow row{t->value("backbone", ""), t->value("modules", ""), t->value("data", ""), s.overall};
        write_file_atomic(layout.mtbench_table(), eval::render_table({row}));
    }
    return {out};
}

StageResult run_eval_wr(RunContext& ctx, const RunLayout& layout) {
    const std::string path = required_string(section(ctx, "eval"), "eval", "verdicts");
    require(path, "eval-wr");
    const auto verdicts = eval::read_verdicts(path);
    std::size_t wins = 0;
    std::size_t ties = 0;
    for (const auto& v : verdicts) {
        wins += v.outcome == eval::Outcome::win;
        ties += v.outcome == eval::Outcome::tie;
    }
    json out = {{"win_rate", eval::compute_win_rate(verdicts)},
                {"total", verdicts.size()},
                {"wins", wins},
                {"ties", ties},
                {"losses", verdicts.size() - wins - ties},
                {"definition", "100 * (wins + 0.5 * ties) / total"}};
    write_json_file(layout.win_rate(), out);
    return {out};
}

std::optional<json> read_if_exists(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    return read_json_file(path);
}

StageResult run_report(RunContext& ctx, const RunLayout& layout) {
    std::error_code ec;
    if (!fs::exists(layout.config(), ec)) {
        throw Error(ErrorKind::missing_input, "not a run directory: " + layout.root.string());
    }
    json counts = json::object();
    auto count_if = [&](const char* key, const fs::path& p) {
        if (fs::exists(p, ec)) counts[key] = count_lines(p);
    };
    count_if("sampled", layout.documents());
    count_if("splits", layout.splits());
    count_if("completions", layout.completions());
    count_if("verdicts", layout.verdicts());
    count_if("filtered", layout.filtered());
    if (auto info = read_if_exists(dataset::info_path(export_path(ctx, layout)))) counts["exported"] = (*info)["count"];

    const json stored = read_json_file(layout.config());
    json report = {{"counts", counts}, {"seeds", seeds(ctx)}, {"teacher", stored.value("teacher", json::object())}};
    if (auto m = read_if_exists(layout.run_manifest())) {
        report["run_id"] = (*m)["run_id"];
        report["totals"] = (*m)["totals"];
        report["teacher_snapshot"] = (*m)["teacher"];
    }
    if (auto r = read_if_exists(layout.rates())) report["filter_rates"] = *r;
    if (auto r = read_if_exists(layout.removal_report())) report["removal"] = *r;
    if (auto r = read_if_exists(layout.mtbench())) report["mtbench"] = *r;
    if (auto r = read_if_exists(layout.win_rate())) report["win_rate"] = *r;

    json refs = json::array();
    for (const auto& t : eval::reference_targets()) {
        refs.push_back({{"metric", t.metric}, {"setting", t.setting}, {"value", t.value}});
    }
    report["reference_targets"] = refs;
    write_json_file(layout.report_json(), report);

    std::ostringstream txt;
    txt << "run directory: " << layout.root.string() << "\n\ncounts\n";
    for (const auto& [k, v] : counts.items()) txt << "  " << k << ": " << v.dump() << "\n";
    txt << "\nseeds\n";
    for (const auto& [k, v] : report["seeds"].items()) txt << "  " << k << ": " << v.dump() << "\n";
    if (report.contains("totals")) {
        txt << "\nteacher batch\n";
        for (const auto& [k, v] : report["totals"].items()) txt << "  " << k << ": " << v.dump() << "\n";
    }
    if (report.contains("filter_rates")) {
        const json& r = report["filter_rates"];
        txt << "\nfilter rates (" << r.value("sample_size", 0) << " samples)\n"
            << "  instructional %: " << r["instructional_pct"].dump() << "\n"
            << "  conversational %: " << r["conversational_pct"].dump() << "\n";
    }
    if (report.contains("removal")) {
        txt << "\nremovals\n";
        for (const auto& [k, v] : report["removal"].items()) {
            if (k != "flags") txt << "  " << k << ": " << v.dump() << "\n";
        }
    }
    if (report.contains("mtbench")) txt << "\nMT-Bench overall: " << report["mtbench"]["overall"].dump() << "\n";
    if (report.contains("win_rate")) txt << "pairwise win rate: " << report["win_rate"]["win_rate"].dump() << "\n";
    txt << "\nreference targets (published; not reproducible without GPU training and paid judges)\n";
    for (const auto& t : eval::reference_targets()) txt << "  " << t.metric << " | " << t.setting << " | " << t.value << "\n";
    write_file_atomic(layout.report_text(), txt.str());
    return {report};
}

}  // namespace

StageResult run_stage(Stage stage, RunContext& ctx) {
    if (ctx.run_dir.empty()) throw Error(ErrorKind::config, "run directory is required");
    RunLayout layout{ctx.run_dir};
    fs::create_directories(layout.root);
    if (stage != Stage::report) write_json_file(layout.config(), ctx.config);

    switch (stage) {
        case Stage::sample: return run_sample(ctx, layout);
        case Stage::split: return run_split(ctx, layout);
        case Stage::complete: return run_complete(ctx, layout);
        case Stage::filter: return run_filter(ctx, layout);
        case Stage::export_dataset: return run_export(ctx, layout);
        case Stage::subset: return run_subset(ctx, layout);
        case Stage::merge: return run_merge(ctx, layout, false);
        case Stage::merge_base: return run_merge(ctx, layout, true);
        case Stage::emit_train: return run_emit_train(ctx, layout);
        case Stage::eval_mtbench: return run_eval_mtbench(ctx, layout);
        case Stage::eval_wr: return run_eval_wr(ctx, layout);
        case Stage::report: return run_report(ctx, layout);
    }
    throw Error(ErrorKind::invalid_argument, "unknown stage");
}

}  // namespace nonins::pipeline
