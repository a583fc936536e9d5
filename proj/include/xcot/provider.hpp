#pragma once

#include <atomic>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xcot/net.hpp"
#include "xcot/prompting.hpp"

namespace xcot {

std::string sha256_hex(std::string_view data);

enum class ProviderMode { live, scripted, cache_only };

ProviderMode parse_provider_mode(std::string_view name);
std::string provider_mode_name(ProviderMode mode);

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_base_ms = 200;
};

// Delay before retrying after the 1-based `attempt`: base, 2x, 4x, ...
int backoff_delay_ms(const RetryPolicy& policy, int attempt);

struct ProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    RetryPolicy retry;
    int timeout_s = 60;
    ProviderMode mode = ProviderMode::live;
    std::string scripted_path;  // fixture JSONL, scripted mode only
};

struct CompletionRequest {
    std::string model;
    std::vector<std::vector<Message>> steps;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 1024;
    int run_index = 0;
};

void validate_request(const CompletionRequest& req);

// SHA-256 of the canonical JSON of (model, steps, temperature, top_p,
// run_index). max_tokens is a delivery knob, not part of sample identity.
std::string request_digest(const CompletionRequest& req);

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool operator==(const TokenUsage&) const = default;
};

struct CompletionRecord {
    std::string request_digest;
    std::string text;                     // final step's completion
    std::vector<std::string> step_texts;  // one completion per step
    double latency_ms = 0.0;
    std::optional<TokenUsage> token_usage;
    bool operator==(const CompletionRecord&) const = default;
};

std::string record_to_json(const CompletionRecord& record);
CompletionRecord record_from_json(const std::string& text);

enum class ProviderErrorKind {
    auth,          // 401/403, never retried
    rate_limit,    // 429
    server,        // 5xx
    transport,     // connect/read failure, timeout
    bad_response,  // unexpected status or malformed body
    unscripted,    // scripted fixture has no matching entry
    not_cached,    // cache-only mode miss
};

class ProviderError : public std::runtime_error {
  public:
    ProviderError(ProviderErrorKind kind, const std::string& message);
    ProviderErrorKind kind() const { return kind_; }
    bool retryable() const;

  private:
    ProviderErrorKind kind_;
};

class CompletionProvider {
  public:
    virtual ~CompletionProvider() = default;
    virtual CompletionRecord complete(const CompletionRequest& req) = 0;
};

// Chat-completions client with exponential-backoff retries. Multi-step
// prompts send each earlier step's completion back as an assistant turn.
class LiveProvider final : public CompletionProvider {
  public:
    // Reads the API key from config.api_key_env; throws if unset.
    LiveProvider(ProviderConfig config, Transport& transport);

    CompletionRecord complete(const CompletionRequest& req) override;

    // Test seam: replaces the real sleep between retry attempts.
    std::function<void(int)> sleep_ms;

  private:
    std::string post_step(const std::string& body, double& latency_ms,
                          std::optional<TokenUsage>& usage);

    ProviderConfig config_;
    std::string api_key_;
    Transport* transport_;
};

// Replays completions from a fixture file; never touches the network.
// Fixture rows: {"request_digest": d, "text": t[, "step": i]} match a
// request digest (step defaults to 0), or {"prompt_text": p, "text": t}
// match a step's last user message verbatim.
class ScriptedProvider final : public CompletionProvider {
  public:
    explicit ScriptedProvider(const std::string& fixture_path);

    CompletionRecord complete(const CompletionRequest& req) override;

    // Simulated endpoint calls served so far (one per completed step).
    long call_count() const { return calls_.load(); }

  private:
    std::map<std::pair<std::string, int>, std::string> by_digest_;
    std::map<std::string, std::string> by_prompt_;
    std::atomic<long> calls_{0};
};

std::string cache_path_for(const std::string& cache_dir, const std::string& digest);

// Persistent completion cache: cache/<d0d1>/<digest>.json, atomic
// write-then-rename, per-digest in-flight deduplication. `inner` may be null
// only in cache-only mode.
class CachingProvider final : public CompletionProvider {
  public:
    CachingProvider(CompletionProvider* inner, std::string cache_dir, bool cache_only = false);

    CompletionRecord complete(const CompletionRequest& req) override;

  private:
    CompletionProvider* inner_;
    std::string cache_dir_;
    bool cache_only_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<CompletionRecord>> inflight_;
};

}  // namespace xcot
