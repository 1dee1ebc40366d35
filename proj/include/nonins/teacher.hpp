#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/error.hpp"
#include "nonins/http.hpp"
#include "nonins/jsonl.hpp"
#include "nonins/splitter.hpp"

namespace nonins::teacher {

enum class Provider { openai_compatible, anthropic_compatible };

Provider parse_provider(std::string_view name);
std::string_view to_string(Provider provider);

/// System prompt attached to Anthropic-compatible continuation requests.
inline constexpr std::string_view kContinuationSystemPrompt =
    "Please continue directly from the end of the given sentence without repeating it";

inline constexpr std::string_view kOpenAiEndpoint = "https://api.openai.com/v1";
inline constexpr std::string_view kAnthropicEndpoint = "https://api.anthropic.com";
inline constexpr std::string_view kAnthropicVersion = "2023-06-01";

struct TeacherSpec {
    Provider provider = Provider::openai_compatible;
    std::string model_id;
    double temperature = 0.0;
    std::optional<std::string> system_prompt;
    int max_output_tokens = 2048;
    std::string endpoint_url;

    /// No system prompt, OpenAI endpoint.
    static TeacherSpec openai(std::string model_id);
    /// Carries kContinuationSystemPrompt, Anthropic endpoint.
    static TeacherSpec anthropic(std::string model_id);

    void validate() const;
};

json to_json(const TeacherSpec& spec);
TeacherSpec spec_from_json(const json& j);

/// Environment variable holding the API key for a provider.
std::string_view credential_variable(Provider provider);

struct Credentials {
    std::string api_key;
};

/// Reads the provider's key from the environment. Throws ErrorKind::auth if unset.
Credentials credentials_from_env(Provider provider);

/// Cache key: hash over provider, model, temperature, system prompt, output
/// cap and the prefix hash. Changing any of them invalidates cached replies.
std::string request_hash(std::string_view prefix, const TeacherSpec& spec);

/// Full request URL for the provider's completion endpoint.
std::string request_url(const TeacherSpec& spec);
json build_request_body(std::string_view prefix, const TeacherSpec& spec);
http::Headers build_headers(const TeacherSpec& spec, const Credentials& creds);

struct ParsedReply {
    std::string text;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    bool refused = false;
};

/// Reads assistant text and usage from a raw 200 response body.
ParsedReply parse_response(Provider provider, std::string_view body);

struct CompletionRecord {
    std::string doc_id;
    std::string continuation;
    TeacherSpec teacher;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::string request_hash;
    std::string timestamp;
    int attempts = 0;
    bool from_cache = false;
};

json to_json(const CompletionRecord& r);
CompletionRecord completion_from_json(const json& j);

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::duration<double> base_delay = std::chrono::seconds(1);
    double jitter = 0.25;
    std::uint64_t jitter_seed = 0x5eed;

    /// Delay before retry number `retry` (1 for the first retry): base * 2^(retry-1),
    /// scaled by a uniform factor in [1 - jitter, 1 + jitter].
    std::chrono::duration<double> delay(int retry, std::uint64_t stream) const;
};

/// Outcome of one logical request, including failed ones.
struct Attempt {
    std::optional<ParsedReply> reply;
    std::string raw_body;
    int attempts = 0;
    std::optional<ErrorKind> error;
    std::string error_message;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// Client for one teacher configuration. Thread-safe: counters are atomic and
/// the transport opens a connection per call.
class TeacherClient {
public:
    TeacherClient(TeacherSpec spec, Credentials creds, std::shared_ptr<http::Transport> transport,
                  std::optional<fs::path> cache_dir = std::nullopt, RetryPolicy retry = {});

    const TeacherSpec& spec() const noexcept { return spec_; }
    const std::optional<fs::path>& cache_dir() const noexcept { return cache_dir_; }

    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    /// Sends `prefix` as the sole user message and returns the reply verbatim.
    /// Served from the cache when possible. Throws on failure.
    CompletionRecord complete(const std::string& doc_id, const std::string& prefix);

    /// Cache probe; nullopt when caching is off or the entry is absent.
    std::optional<CompletionRecord> lookup(const std::string& doc_id, const std::string& prefix) const;

    /// Network round trip with retries. Never throws for per-request failures;
    /// auth failures are reported with ErrorKind::auth.
    Attempt fetch(const std::string& prefix);

    /// Persists a successful raw response under its request hash.
    void commit(const std::string& hash, const std::string& raw_body) const;

    CompletionRecord make_record(const std::string& doc_id, const std::string& prefix,
                                 const ParsedReply& reply, int attempts, bool from_cache) const;

    std::uint64_t network_requests() const noexcept { return network_requests_.load(); }

private:
    fs::path cache_path(const std::string& hash) const;

    TeacherSpec spec_;
    Credentials creds_;
    std::shared_ptr<http::Transport> transport_;
    std::optional<fs::path> cache_dir_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::atomic<std::uint64_t> network_requests_{0};
    std::atomic<std::uint64_t> request_counter_{0};
};

// ---------------------------------------------------------------------------
// Batch runner

enum class Status { pending, done, failed };
std::string_view to_string(Status status);
Status parse_status(std::string_view name);

struct BatchItem {
    std::string id;
    std::string prompt;
};

std::vector<BatchItem> items_from_splits(const std::vector<splitter::SplitRecord>& splits);

struct ItemResult {
    std::string id;
    std::string request_hash;
    Status status = Status::pending;
    int attempts = 0;
    bool from_cache = false;
    std::optional<CompletionRecord> record;
    std::string error;
};

struct Totals {
    std::uint64_t records = 0;
    std::uint64_t done = 0;
    std::uint64_t failed = 0;
    std::uint64_t pending = 0;
    std::uint64_t requests = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t retries = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::optional<double> estimated_cost;
};

struct RunManifest {
    std::string run_id;
    TeacherSpec teacher;
    Totals totals;
    std::vector<ItemResult> entries;  // input order
    bool interrupted = false;
    bool aborted = false;
    std::string abort_reason;
};

/// Recomputes totals from the per-entry statuses.
Totals summarize(const std::vector<ItemResult>& entries);

json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const json& j);

struct BatchOptions {
    std::size_t max_in_flight = 4;
    /// Abort once more than this many items have failed.
    std::optional<std::size_t> max_failures;
    /// Append-only progress journal; one line per committed item.
    std::optional<fs::path> journal_path;
    /// Polled before each dispatch and each commit. Once true, no new requests
    /// start and results that have not been committed yet are discarded.
    std::function<bool()> stop_requested;
    /// Called from the serialized writer after each commit.
    std::function<void(const ItemResult&)> on_commit;
};

/// Run identifier derived from the teacher snapshot and the item list.
std::string derive_run_id(const TeacherSpec& spec, const std::vector<BatchItem>& items);

/// Drives every item to a terminal status with at most `max_in_flight`
/// outstanding requests. Cached items cost no network traffic, so re-running
/// over the same cache only requests what is missing.
RunManifest run_batch(const std::vector<BatchItem>& items, TeacherClient& client,
                      const BatchOptions& options = {});

RunManifest run_batch(const std::vector<splitter::SplitRecord>& splits, TeacherClient& client,
                      std::size_t max_in_flight);

// ---------------------------------------------------------------------------
// Cost accounting

struct Price {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
};

class PriceTable {
public:
    PriceTable() = default;
    explicit PriceTable(std::map<std::string, Price> prices) : prices_(std::move(prices)) {}

    /// {"model": {"input_per_million": x, "output_per_million": y}, ...}
    static PriceTable from_json(const json& j);

    const Price& at(const std::string& model) const;
    bool contains(const std::string& model) const { return prices_.count(model) != 0; }

private:
    std::map<std::string, Price> prices_;
};

struct CostEstimate {
    double amount = 0.0;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    /// True when token counts were approximated from word counts.
    bool approximate = false;
};

CostEstimate estimate_cost(std::uint64_t input_tokens, std::uint64_t output_tokens,
                           const std::string& model, const PriceTable& prices);
CostEstimate estimate_cost(const RunManifest& manifest, const PriceTable& prices);

/// Tokens assumed per whitespace-delimited word when planning.
inline constexpr double kTokensPerWord = 4.0 / 3.0;

/// Pre-run estimate: prompt = prefix (+ system prompt) words, output = the
/// original suffix words, both converted with kTokensPerWord.
CostEstimate estimate_plan_cost(const std::vector<splitter::SplitRecord>& splits, const TeacherSpec& spec,
                                const PriceTable& prices);

std::string utc_timestamp();

}  // namespace nonins::teacher
