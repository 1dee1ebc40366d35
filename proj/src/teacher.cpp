#include "nonins/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "nonins/hash.hpp"
#include "nonins/rng.hpp"
#include "nonins/text.hpp"

namespace nonins::teacher {

Provider parse_provider(std::string_view name) {
    if (name == "openai-compatible" || name == "openai") return Provider::openai_compatible;
    if (name == "anthropic-compatible" || name == "anthropic") return Provider::anthropic_compatible;
    throw Error(ErrorKind::config, "unknown provider: " + std::string(name));
}

std::string_view to_string(Provider provider) {
    return provider == Provider::openai_compatible ? "openai-compatible" : "anthropic-compatible";
}

TeacherSpec TeacherSpec::openai(std::string model_id) {
    TeacherSpec spec;
    spec.provider = Provider::openai_compatible;
    spec.model_id = std::move(model_id);
    spec.endpoint_url = std::string(kOpenAiEndpoint);
    return spec;
}

TeacherSpec TeacherSpec::anthropic(std::string model_id) {
    TeacherSpec spec;
    spec.provider = Provider::anthropic_compatible;
    spec.model_id = std::move(model_id);
    spec.system_prompt = std::string(kContinuationSystemPrompt);
    spec.endpoint_url = std::string(kAnthropicEndpoint);
    return spec;
}

void TeacherSpec::validate() const {
    if (model_id.empty()) throw Error(ErrorKind::config, "teacher model_id is empty");
    if (!std::isfinite(temperature) || temperature < 0.0) {
        throw Error(ErrorKind::config, "teacher temperature must be finite and >= 0");
    }
    if (max_output_tokens <= 0) throw Error(ErrorKind::config, "max_output_tokens must be positive");
    if (endpoint_url.empty()) throw Error(ErrorKind::config, "teacher endpoint_url is empty");
}

json to_json(const TeacherSpec& spec) {
    json j = {{"provider", to_string(spec.provider)},
              {"model_id", spec.model_id},
              {"temperature", spec.temperature},
              {"max_output_tokens", spec.max_output_tokens},
              {"endpoint_url", spec.endpoint_url}};
    j["system_prompt"] = spec.system_prompt ? json(*spec.system_prompt) : json(nullptr);
    return j;
}

TeacherSpec spec_from_json(const json& j) {
    const Provider provider = parse_provider(j.at("provider").get<std::string>());
    TeacherSpec spec = provider == Provider::openai_compatible
                           ? TeacherSpec::openai(j.at("model_id").get<std::string>())
                           : TeacherSpec::anthropic(j.at("model_id").get<std::string>());
    spec.temperature = j.value("temperature", 0.0);
    spec.max_output_tokens = j.value("max_output_tokens", 2048);
    if (auto it = j.find("endpoint_url"); it != j.end() && it->is_string()) spec.endpoint_url = *it;
    if (auto it = j.find("system_prompt"); it != j.end()) {
        if (it->is_null()) {
            spec.system_prompt.reset();
        } else {
            spec.system_prompt = it->get<std::string>();
        }
    }
    return spec;
}

std::string_view credential_variable(Provider provider) {
    return provider == Provider::openai_compatible ? "OPENAI_API_KEY" : "ANTHROPIC_API_KEY";
}

Credentials credentials_from_env(Provider provider) {
    const std::string var(credential_variable(provider));
    const char* value = std::getenv(var.c_str());
    if (value == nullptr || *value == '\0') throw Error(ErrorKind::auth, var + " is not set");
    return {value};
}

std::string request_hash(std::string_view prefix, const TeacherSpec& spec) {
    json key = {{"provider", to_string(spec.provider)},
                {"model", spec.model_id},
                {"temperature", spec.temperature},
                {"max_tokens", spec.max_output_tokens},
                {"prefix_sha256", sha256_hex(prefix)}};
    key["system"] = spec.system_prompt ? json(*spec.system_prompt) : json(nullptr);
    return sha256_hex(canonical_dump(key));
}

std::string request_url(const TeacherSpec& spec) {
    std::string base = spec.endpoint_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    return base + (spec.provider == Provider::openai_compatible ? "/chat/completions" : "/v1/messages");
}

json build_request_body(std::string_view prefix, const TeacherSpec& spec) {
    json messages = json::array();
    if (spec.provider == Provider::openai_compatible && spec.system_prompt) {
        messages.push_back({{"role", "system"}, {"content", *spec.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", std::string(prefix)}});

    json body = {{"model", spec.model_id},
                 {"temperature", spec.temperature},
                 {"max_tokens", spec.max_output_tokens},
                 {"messages", std::move(messages)}};
    if (spec.provider == Provider::anthropic_compatible && spec.system_prompt) {
        body["system"] = *spec.system_prompt;
    }
    return body;
}

http::Headers build_headers(const TeacherSpec& spec, const Credentials& creds) {
    if (spec.provider == Provider::openai_compatible) {
        return {{"Authorization", "Bearer " + creds.api_key}};
    }
    return {{"x-api-key", creds.api_key}, {"anthropic-version", std::string(kAnthropicVersion)}};
}

namespace {

std::uint64_t usage_field(const json& usage, const char* name) {
    if (auto it = usage.find(name); it != usage.end() && it->is_number_unsigned()) return it->get<std::uint64_t>();
    return 0;
}

}  // namespace

ParsedReply parse_response(Provider provider, std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::provider, std::string("response is not JSON: ") + e.what());
    }
    ParsedReply out;
    const json usage = j.value("usage", json::object());
    try {
        if (provider == Provider::openai_compatible) {
            const json& choice = j.at("choices").at(0);
            const json& message = choice.at("message");
            const json content = message.value("content", json(nullptr));
            if (content.is_string()) out.text = content.get<std::string>();
            const bool filtered = choice.value("finish_reason", json(nullptr)) == "content_filter";
            const bool refusal = message.contains("refusal") && message["refusal"].is_string();
            out.refused = filtered || refusal;
            if (!content.is_string() && !out.refused) throw Error(ErrorKind::provider, "reply has no message content");
            out.prompt_tokens = usage_field(usage, "prompt_tokens");
            out.completion_tokens = usage_field(usage, "completion_tokens");
        } else {
            out.refused = j.value("stop_reason", json(nullptr)) == "refusal";
            const json& content = j.at("content");
            if (!content.empty()) {
                out.text = content.at(0).at("text").get<std::string>();
            } else if (!out.refused) {
                throw Error(ErrorKind::provider, "reply has an empty content list");
            }
            out.prompt_tokens = usage_field(usage, "input_tokens");
            out.completion_tokens = usage_field(usage, "output_tokens");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::provider, std::string("unexpected response shape: ") + e.what());
    }
    return out;
}

json to_json(const CompletionRecord& r) {
    return {{"doc_id", r.doc_id},
            {"continuation", r.continuation},
            {"teacher", to_json(r.teacher)},
            {"prompt_tokens", r.prompt_tokens},
            {"completion_tokens", r.completion_tokens},
            {"request_hash", r.request_hash},
            {"timestamp", r.timestamp},
            {"attempts", r.attempts},
            {"from_cache", r.from_cache}};
}

CompletionRecord completion_from_json(const json& j) {
    CompletionRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.continuation = j.at("continuation").get<std::string>();
    r.teacher = spec_from_json(j.at("teacher"));
    r.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
    r.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
    r.request_hash = j.value("request_hash", "");
    r.timestamp = j.value("timestamp", "");
    r.attempts = j.value("attempts", 0);
    r.from_cache = j.value("from_cache", false);
    return r;
}

std::chrono::duration<double> RetryPolicy::delay(int retry, std::uint64_t stream) const {
    const double base = base_delay.count() * std::ldexp(1.0, std::max(retry, 1) - 1);
    Rng rng = Rng::derive(jitter_seed, std::to_string(stream) + ":" + std::to_string(retry));
    const double factor = 1.0 + jitter * (2.0 * rng.uniform_unit() - 1.0);
    return std::chrono::duration<double>(base * factor);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// TeacherClient

TeacherClient::TeacherClient(TeacherSpec spec, Credentials creds, std::shared_ptr<http::Transport> transport,
                             std::optional<fs::path> cache_dir, RetryPolicy retry)
    : spec_(std::move(spec)),
      creds_(std::move(creds)),
      transport_(std::move(transport)),
      cache_dir_(std::move(cache_dir)),
      retry_(retry),
      sleeper_([](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); }) {
    spec_.validate();
    if (!transport_) throw Error(ErrorKind::config, "teacher client needs a transport");
    if (retry_.max_attempts < 1) throw Error(ErrorKind::config, "retry policy needs at least one attempt");
    if (cache_dir_) fs::create_directories(*cache_dir_);
}

fs::path TeacherClient::cache_path(const std::string& hash) const {
    return *cache_dir_ / (hash + ".json");
}

CompletionRecord TeacherClient::make_record(const std::string& doc_id, const std::string& prefix,
                                            const ParsedReply& reply, int attempts, bool from_cache) const {
    CompletionRecord r;
    r.doc_id = doc_id;
    r.continuation = reply.text;
    r.teacher = spec_;
    r.prompt_tokens = reply.prompt_tokens;
    r.completion_tokens = reply.completion_tokens;
    r.request_hash = request_hash(prefix, spec_);
    r.timestamp = utc_timestamp();
    r.attempts = attempts;
    r.from_cache = from_cache;
    return r;
}

std::optional<CompletionRecord> TeacherClient::lookup(const std::string& doc_id, const std::string& prefix) const {
    if (!cache_dir_) return std::nullopt;
    const fs::path path = cache_path(request_hash(prefix, spec_));
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    try {
        const ParsedReply reply = parse_response(spec_.provider, read_file(path));
        if (reply.refused) return std::nullopt;
        return make_record(doc_id, prefix, reply, 0, true);
    } catch (const Error&) {
        // Unreadable entries are refetched and overwritten.
        return std::nullopt;
    }
}

void TeacherClient::commit(const std::string& hash, const std::string& raw_body) const {
    if (cache_dir_) write_file_atomic(cache_path(hash), raw_body);
}

Attempt TeacherClient::fetch(const std::string& prefix) {
    Attempt out;
    const std::string url = request_url(spec_);
    const std::string body = build_request_body(prefix, spec_).dump();
    const http::Headers headers = build_headers(spec_, creds_);
    const std::uint64_t stream = request_counter_.fetch_add(1);

    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        out.attempts = attempt;
        ++network_requests_;
        bool retryable = false;
        try {
            const http::Response res = transport_->post(url, headers, body);
            if (res.status == 200) {
                ParsedReply reply = parse_response(spec_.provider, res.body);
                if (reply.refused) {
                    out.error = ErrorKind::refusal;
                    out.error_message = "provider refused the request";
                    return out;
                }
                out.reply = std::move(reply);
                out.raw_body = res.body;
                out.error.reset();
                out.error_message.clear();
                return out;
            }
            const std::string detail = "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200);
            if (res.status == 401 || res.status == 403) {
                out.error = ErrorKind::auth;
                out.error_message = detail;
                return out;
            }
            if (res.status == 429) {
                out.error = ErrorKind::rate_limited;
                retryable = true;
            } else if (res.status >= 500) {
                out.error = ErrorKind::provider;
                retryable = true;
            } else {
                out.error = ErrorKind::provider;
            }
            out.error_message = detail;
        } catch (const Error& e) {
            out.error = e.kind();
            out.error_message = e.what();
            retryable = e.kind() == ErrorKind::transport;
        } catch (const std::exception& e) {
            out.error = ErrorKind::transport;
            out.error_message = e.what();
            retryable = true;
        }
        if (!retryable) return out;
        if (attempt < retry_.max_attempts) sleeper_(retry_.delay(attempt, stream));
    }
    return out;
}

CompletionRecord TeacherClient::complete(const std::string& doc_id, const std::string& prefix) {
    if (prefix.empty()) throw Error(ErrorKind::invalid_argument, "prefix must be non-empty");
    if (auto cached = lookup(doc_id, prefix)) return *cached;
    Attempt a = fetch(prefix);
    if (a.error || !a.reply) {
        throw Error(a.error.value_or(ErrorKind::provider),
                    a.error_message + " (after " + std::to_string(a.attempts) + " attempts)");
    }
    commit(request_hash(prefix, spec_), a.raw_body);
    return make_record(doc_id, prefix, *a.reply, a.attempts, false);
}

// ---------------------------------------------------------------------------
// Batch runner

std::string_view to_string(Status status) {
    switch (status) {
        case Status::pending: return "pending";
        case Status::done: return "done";
        case Status::failed: return "failed";
    }
    return "pending";
}

Status parse_status(std::string_view name) {
    if (name == "done") return Status::done;
    if (name == "failed") return Status::failed;
    if (name == "pending") return Status::pending;
    throw Error(ErrorKind::parse, "unknown status: " + std::string(name));
}

std::vector<BatchItem> items_from_splits(const std::vector<splitter::SplitRecord>& splits) {
    std::vector<BatchItem> items;
    items.reserve(splits.size());
    for (const auto& s : splits) items.push_back({s.doc_id, s.prefix});
    return items;
}

Totals summarize(const std::vector<ItemResult>& entries) {
    Totals t;
    t.records = entries.size();
    for (const auto& e : entries) {
        switch (e.status) {
            case Status::done: ++t.done; break;
            case Status::failed: ++t.failed; break;
            case Status::pending: ++t.pending; break;
        }
        if (e.from_cache && e.status == Status::done) ++t.cache_hits;
        if (!e.from_cache) {
            t.requests += static_cast<std::uint64_t>(e.attempts);
            if (e.attempts > 1) t.retries += static_cast<std::uint64_t>(e.attempts - 1);
        }
        if (e.record) {
            t.prompt_tokens += e.record->prompt_tokens;
            t.completion_tokens += e.record->completion_tokens;
        }
    }
    return t;
}

namespace {

json totals_json(const Totals& t) {
    json j = {{"records", t.records},         {"done", t.done},
              {"failed", t.failed},           {"pending", t.pending},
              {"requests", t.requests},       {"cache_hits", t.cache_hits},
              {"retries", t.retries},         {"prompt_tokens", t.prompt_tokens},
              {"completion_tokens", t.completion_tokens}};
    j["estimated_cost"] = t.estimated_cost ? json(*t.estimated_cost) : json(nullptr);
    return j;
}

json entry_json(const ItemResult& e) {
    json j = {{"doc_id", e.id},
              {"request_hash", e.request_hash},
              {"status", to_string(e.status)},
              {"attempts", e.attempts},
              {"from_cache", e.from_cache}};
    if (!e.error.empty()) j["error"] = e.error;
    if (e.record) {
        j["prompt_tokens"] = e.record->prompt_tokens;
        j["completion_tokens"] = e.record->completion_tokens;
    }
    return j;
}

}  // namespace

json to_json(const RunManifest& m) {
    json records = json::array();
    for (const auto& e : m.entries) records.push_back(entry_json(e));
    return {{"run_id", m.run_id},
            {"teacher", to_json(m.teacher)},
            {"totals", totals_json(m.totals)},
            {"interrupted", m.interrupted},
            {"aborted", m.aborted},
            {"abort_reason", m.abort_reason},
            {"records", std::move(records)}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.teacher = spec_from_json(j.at("teacher"));
    m.interrupted = j.value("interrupted", false);
    m.aborted = j.value("aborted", false);
    m.abort_reason = j.value("abort_reason", "");
    for (const auto& r : j.at("records")) {
        ItemResult e;
        e.id = r.at("doc_id").get<std::string>();
        e.request_hash = r.value("request_hash", "");
        e.status = parse_status(r.at("status").get<std::string>());
        e.attempts = r.value("attempts", 0);
        e.from_cache = r.value("from_cache", false);
        e.error = r.value("error", "");
        if (r.contains("prompt_tokens")) {
            CompletionRecord rec;
            rec.doc_id = e.id;
            rec.teacher = m.teacher;
            rec.prompt_tokens = r.value("prompt_tokens", std::uint64_t{0});
            rec.completion_tokens = r.value("completion_tokens", std::uint64_t{0});
            rec.request_hash = e.request_hash;
            e.record = std::move(rec);
        }
        m.entries.push_back(std::move(e));
    }
    m.totals = summarize(m.entries);
    const json& totals = j.at("totals");
    if (auto it = totals.find("estimated_cost"); it != totals.end() && it->is_number()) {
        m.totals.estimated_cost = it->get<double>();
    }
    return m;
}

std::string derive_run_id(const TeacherSpec& spec, const std::vector<BatchItem>& items) {
    std::string material = canonical_dump(to_json(spec));
    for (const auto& item : items) {
        material += '\n';
        material += item.id;
        material += '\t';
        material += sha256_hex(item.prompt);
    }
    return sha256_hex(material).substr(0, 16);
}

RunManifest run_batch(const std::vector<BatchItem>& items, TeacherClient& client, const BatchOptions& options) {
    if (options.max_in_flight == 0) throw Error(ErrorKind::invalid_argument, "max_in_flight must be positive");

    RunManifest manifest;
    manifest.run_id = derive_run_id(client.spec(), items);
    manifest.teacher = client.spec();
    manifest.entries.resize(items.size());

    // Identical prompts share one request; units are unique hashes in
    // first-occurrence order.
    std::vector<std::vector<std::size_t>> units;
    {
        std::unordered_map<std::string, std::size_t> unit_of;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].prompt.empty()) {
                throw Error(ErrorKind::invalid_argument, "empty prompt for item " + items[i].id);
            }
            auto& e = manifest.entries[i];
            e.id = items[i].id;
            e.request_hash = request_hash(items[i].prompt, client.spec());
            auto [it, inserted] = unit_of.emplace(e.request_hash, units.size());
            if (inserted) units.emplace_back();
            units[it->second].push_back(i);
        }
    }

    std::optional<JsonlWriter> journal;
    if (options.journal_path) journal.emplace(*options.journal_path, /*append=*/true);

    std::mutex writer_mu;
    std::atomic<std::size_t> next_unit{0};
    std::atomic<bool> halt{false};
    std::atomic<bool> stop_seen{false};
    std::size_t failures = 0;

    auto stopping = [&] {
        if (halt.load()) return true;
        if (options.stop_requested && options.stop_requested()) {
            stop_seen = true;
            return true;
        }
        return false;
    };

    auto commit_unit = [&](const std::vector<std::size_t>& members, const Attempt* attempt,
                           const std::optional<ParsedReply>& cached) {
        std::lock_guard lock(writer_mu);
        if (stopping()) return;
        const BatchItem& lead = items[members.front()];
        const bool ok = cached.has_value() || (attempt && attempt->reply && !attempt->error);
        if (ok && attempt) client.commit(manifest.entries[members.front()].request_hash, attempt->raw_body);
        for (std::size_t m = 0; m < members.size(); ++m) {
            ItemResult& e = manifest.entries[members[m]];
            const bool first = m == 0;
            e.from_cache = cached.has_value() || !first;
            e.attempts = first && attempt ? attempt->attempts : 0;
            if (ok) {
                const ParsedReply& reply = cached ? *cached : *attempt->reply;
                e.status = Status::done;
                e.record = client.make_record(e.id, lead.prompt, reply, e.attempts, e.from_cache);
            } else {
                e.status = Status::failed;
                e.from_cache = false;
                e.error = std::string(to_string(attempt->error.value_or(ErrorKind::provider))) + ": " +
                          attempt->error_message;
                ++failures;
            }
            if (journal) {
                json line = entry_json(e);
                line["timestamp"] = utc_timestamp();
                journal->write(line);
            }
            if (options.on_commit) options.on_commit(e);
        }
        if (!ok && attempt->error == ErrorKind::auth) {
            halt = true;
            manifest.aborted = true;
            manifest.abort_reason = "authentication failed: " + attempt->error_message;
        } else if (options.max_failures && failures > *options.max_failures) {
            halt = true;
            manifest.aborted = true;
            manifest.abort_reason = "failure threshold exceeded (" + std::to_string(failures) + " failed)";
        }
    };

    auto worker = [&] {
        while (!stopping()) {
            const std::size_t u = next_unit.fetch_add(1);
            if (u >= units.size()) return;
            const auto& members = units[u];
            const BatchItem& lead = items[members.front()];
            if (auto hit = client.lookup(lead.id, lead.prompt)) {
                ParsedReply reply;
                reply.text = hit->continuation;
                reply.prompt_tokens = hit->prompt_tokens;
                reply.completion_tokens = hit->completion_tokens;
                commit_unit(members, nullptr, reply);
                continue;
            }
            const Attempt attempt = client.fetch(lead.prompt);
            commit_unit(members, &attempt, std::nullopt);
        }
    };

    const std::size_t n_threads = std::min(options.max_in_flight, units.size());
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    manifest.totals = summarize(manifest.entries);
    manifest.interrupted = stop_seen.load() && manifest.totals.pending > 0;
    return manifest;
}

RunManifest run_batch(const std::vector<splitter::SplitRecord>& splits, TeacherClient& client,
                      std::size_t max_in_flight) {
    BatchOptions options;
    options.max_in_flight = max_in_flight;
    return run_batch(items_from_splits(splits), client, options);
}

// ---------------------------------------------------------------------------
// Cost accounting

PriceTable PriceTable::from_json(const json& j) {
    std::map<std::string, Price> prices;
    for (const auto& [model, p] : j.items()) {
        Price price{p.at("input_per_million").get<double>(), p.at("output_per_million").get<double>()};
        if (!(price.input_per_million >= 0.0) || !(price.output_per_million >= 0.0)) {
            throw Error(ErrorKind::config, "negative price for " + model);
        }
        prices.emplace(model, price);
    }
    return PriceTable(std::move(prices));
}

const Price& PriceTable::at(const std::string& model) const {
    auto it = prices_.find(model);
    if (it == prices_.end()) throw Error(ErrorKind::config, "no price entry for model " + model);
    return it->second;
}

CostEstimate estimate_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, const std::string& model,
                           const PriceTable& prices) {
    const Price& p = prices.at(model);
    CostEstimate c;
    c.input_tokens = input_tokens;
    c.output_tokens = output_tokens;
    c.amount = (static_cast<double>(input_tokens) * p.input_per_million +
                static_cast<double>(output_tokens) * p.output_per_million) /
               1e6;
    return c;
}

CostEstimate estimate_cost(const RunManifest& manifest, const PriceTable& prices) {
    const Totals t = summarize(manifest.entries);
    return estimate_cost(t.prompt_tokens, t.completion_tokens, manifest.teacher.model_id, prices);
}

CostEstimate estimate_plan_cost(const std::vector<splitter::SplitRecord>& splits, const TeacherSpec& spec,
                                const PriceTable& prices) {
    const std::size_t system_words = spec.system_prompt ? text::count_words(*spec.system_prompt) : 0;
    double input = 0.0;
    double output = 0.0;
    for (const auto& s : splits) {
        input += static_cast<double>(s.k + system_words) * kTokensPerWord;
        output += static_cast<double>(s.wc - s.k) * kTokensPerWord;
    }
    CostEstimate c = estimate_cost(static_cast<std::uint64_t>(std::ceil(input)),
                                   static_cast<std::uint64_t>(std::ceil(output)), spec.model_id, prices);
    c.approximate = true;
    return c;
}

}  // namespace nonins::teacher
