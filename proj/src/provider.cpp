#include "xcot/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <openssl/evp.h>

#include "json.hpp"

namespace xcot {

namespace {

using nlohmann::json;

json messages_to_json(const std::vector<Message>& messages) {
    json arr = json::array();
    for (const Message& m : messages) {
        arr.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    return arr;
}

const std::string& last_user_content(const std::vector<Message>& step) {
    for (auto it = step.rbegin(); it != step.rend(); ++it) {
        if (it->role == Role::user) return it->content;
    }
    return step.back().content;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 digest failed");
    }
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

ProviderMode parse_provider_mode(std::string_view name) {
    if (name == "live") return ProviderMode::live;
    if (name == "scripted") return ProviderMode::scripted;
    if (name == "cache_only") return ProviderMode::cache_only;
    throw std::invalid_argument("provider mode must be live, scripted or cache_only, got '" +
                                std::string(name) + "'");
}

std::string provider_mode_name(ProviderMode mode) {
    switch (mode) {
        case ProviderMode::live: return "live";
        case ProviderMode::scripted: return "scripted";
        case ProviderMode::cache_only: return "cache_only";
    }
    throw std::logic_error("bad provider mode enum");
}

int backoff_delay_ms(const RetryPolicy& policy, int attempt) {
    if (attempt < 1) throw std::invalid_argument("retry attempt is 1-based");
    int shift = attempt - 1;
    if (shift > 20) shift = 20;
    return policy.backoff_base_ms << shift;
}

void validate_request(const CompletionRequest& req) {
    if (req.model.empty()) throw std::invalid_argument("request model is empty");
    if (req.temperature < 0.0 || req.temperature > 1.0) {
        throw std::invalid_argument("temperature must lie in [0, 1]");
    }
    if (req.top_p <= 0.0 || req.top_p > 1.0) {
        throw std::invalid_argument("top_p must lie in (0, 1]");
    }
    if (req.max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
    if (req.run_index < 0) throw std::invalid_argument("run_index must be >= 0");
    if (req.steps.empty()) throw std::invalid_argument("request has no steps");
    for (const auto& step : req.steps) {
        if (step.empty()) throw std::invalid_argument("request step has no messages");
    }
}

std::string request_digest(const CompletionRequest& req) {
    json steps = json::array();
    for (const auto& step : req.steps) steps.push_back(messages_to_json(step));
    json doc = {
        {"model", req.model},         {"run_index", req.run_index}, {"steps", steps},
        {"temperature", req.temperature}, {"top_p", req.top_p},
    };
    return sha256_hex(doc.dump());
}

std::string record_to_json(const CompletionRecord& record) {
    json doc = {
        {"request_digest", record.request_digest},
        {"text", record.text},
        {"step_texts", record.step_texts},
        {"latency_ms", record.latency_ms},
    };
    if (record.token_usage) {
        doc["token_usage"] = {{"prompt_tokens", record.token_usage->prompt_tokens},
                              {"completion_tokens", record.token_usage->completion_tokens}};
    }
    return doc.dump();
}

CompletionRecord record_from_json(const std::string& text) {
    json doc = json::parse(text);
    CompletionRecord record;
    record.request_digest = doc.at("request_digest").get<std::string>();
    record.text = doc.at("text").get<std::string>();
    record.step_texts = doc.at("step_texts").get<std::vector<std::string>>();
    record.latency_ms = doc.at("latency_ms").get<double>();
    if (doc.contains("token_usage")) {
        TokenUsage usage;
        usage.prompt_tokens = doc["token_usage"].at("prompt_tokens").get<long>();
        usage.completion_tokens = doc["token_usage"].at("completion_tokens").get<long>();
        record.token_usage = usage;
    }
    return record;
}

ProviderError::ProviderError(ProviderErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

bool ProviderError::retryable() const {
    switch (kind_) {
        case ProviderErrorKind::rate_limit:
        case ProviderErrorKind::server:
        case ProviderErrorKind::transport: return true;
        case ProviderErrorKind::auth:
        case ProviderErrorKind::bad_response:
        case ProviderErrorKind::unscripted:
        case ProviderErrorKind::not_cached: return false;
    }
    throw std::logic_error("bad provider error kind");
}

LiveProvider::LiveProvider(ProviderConfig config, Transport& transport)
    : config_(std::move(config)), transport_(&transport) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw std::invalid_argument("live provider requires environment variable '" +
                                    config_.api_key_env + "' to be set");
    }
    api_key_ = key;
    sleep_ms = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

std::string LiveProvider::post_step(const std::string& body, double& latency_ms,
                                    std::optional<TokenUsage>& usage) {
    HttpHeaders headers = {{"Authorization", "Bearer " + api_key_}};
    std::string url = config_.base_url + "/chat/completions";

    for (int attempt = 1;; ++attempt) {
        auto start = std::chrono::steady_clock::now();
        HttpResponse res = transport_->post_json(url, headers, body, config_.timeout_s);
        latency_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                start)
                          .count();

        std::optional<ProviderError> error;
        if (!res.ok()) {
            error = ProviderError(ProviderErrorKind::transport,
                                  "transport failure: " + res.transport_error);
        } else if (res.status == 401 || res.status == 403) {
            error = ProviderError(ProviderErrorKind::auth,
                                  "authentication rejected (HTTP " + std::to_string(res.status) +
                                      ")");
        } else if (res.status == 429) {
            error = ProviderError(ProviderErrorKind::rate_limit, "rate limited (HTTP 429)");
        } else if (res.status >= 500) {
            error = ProviderError(ProviderErrorKind::server,
                                  "server error (HTTP " + std::to_string(res.status) + ")");
        } else if (res.status != 200) {
            error = ProviderError(ProviderErrorKind::bad_response,
                                  "unexpected HTTP " + std::to_string(res.status) + ": " +
                                      res.body.substr(0, 200));
        } else {
            try {
                json doc = json::parse(res.body);
                std::string content =
                    doc.at("choices").at(0).at("message").at("content").get<std::string>();
                if (doc.contains("usage")) {
                    if (!usage) usage = TokenUsage{};
                    usage->prompt_tokens += doc["usage"].value("prompt_tokens", 0L);
                    usage->completion_tokens += doc["usage"].value("completion_tokens", 0L);
                }
                return content;
            } catch (const json::exception& e) {
                error = ProviderError(ProviderErrorKind::bad_response,
                                      std::string("malformed completion response: ") + e.what());
            }
        }

        if (error->retryable() && attempt < config_.retry.max_attempts) {
            sleep_ms(backoff_delay_ms(config_.retry, attempt));
            continue;
        }
        throw *error;
    }
}

CompletionRecord LiveProvider::complete(const CompletionRequest& req) {
    validate_request(req);
    CompletionRecord record;
    record.request_digest = request_digest(req);

    std::vector<Message> transcript;
    std::optional<TokenUsage> usage;
    for (const auto& step : req.steps) {
        transcript.insert(transcript.end(), step.begin(), step.end());
        json body = {
            {"model", req.model},           {"messages", messages_to_json(transcript)},
            {"temperature", req.temperature}, {"top_p", req.top_p},
            {"max_tokens", req.max_tokens},
        };
        std::string content = post_step(body.dump(), record.latency_ms, usage);
        record.step_texts.push_back(content);
        transcript.push_back(Message{Role::assistant, content});
    }
    record.text = record.step_texts.back();
    record.token_usage = usage;
    return record;
}

ScriptedProvider::ScriptedProvider(const std::string& fixture_path) {
    std::ifstream in(fixture_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scripted fixture: " + fixture_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
        if (!row.is_object() || !row.contains("text") || !row["text"].is_string()) {
            throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) +
                                     ": row needs a 'text' string");
        }
        std::string text = row["text"].get<std::string>();
        if (row.contains("request_digest")) {
            auto key = std::make_pair(row["request_digest"].get<std::string>(),
                                      row.value("step", 0));
            if (!by_digest_.emplace(std::move(key), std::move(text)).second) {
                throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) +
                                         ": duplicate digest entry");
            }
        } else if (row.contains("prompt_text")) {
            auto key = row["prompt_text"].get<std::string>();
            if (!by_prompt_.emplace(std::move(key), std::move(text)).second) {
                throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) +
                                         ": duplicate prompt_text entry");
            }
        } else {
            throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) +
                                     ": row needs request_digest or prompt_text");
        }
    }
    if (by_digest_.empty() && by_prompt_.empty()) {
        throw std::runtime_error(fixture_path + ": no fixture entries");
    }
}

CompletionRecord ScriptedProvider::complete(const CompletionRequest& req) {
    validate_request(req);
    CompletionRecord record;
    record.request_digest = request_digest(req);

    for (std::size_t i = 0; i < req.steps.size(); ++i) {
        const std::string* text = nullptr;
        auto it = by_digest_.find({record.request_digest, static_cast<int>(i)});
        if (it != by_digest_.end()) {
            text = &it->second;
        } else {
            auto pt = by_prompt_.find(last_user_content(req.steps[i]));
            if (pt != by_prompt_.end()) text = &pt->second;
        }
        if (text == nullptr) {
            throw ProviderError(ProviderErrorKind::unscripted,
                                "unscripted request: digest " + record.request_digest + " step " +
                                    std::to_string(i));
        }
        calls_.fetch_add(1);
        record.step_texts.push_back(*text);
    }
    record.text = record.step_texts.back();
    return record;
}

std::string cache_path_for(const std::string& cache_dir, const std::string& digest) {
    return cache_dir + "/" + digest.substr(0, 2) + "/" + digest + ".json";
}

namespace {

CompletionRecord read_cached_record(const std::string& path, const std::string& digest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cache file: " + path);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CompletionRecord record;
    try {
        record = record_from_json(body);
    } catch (const std::exception& e) {
        throw std::runtime_error("corrupt cache file " + path + ": " + e.what());
    }
    if (record.request_digest != digest) {
        throw std::runtime_error("cache file " + path + " holds digest " +
                                 record.request_digest);
    }
    return record;
}

void write_record_atomic(const std::string& path, const CompletionRecord& record) {
    std::filesystem::path target(path);
    std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache file: " + tmp.string());
        out << record_to_json(record) << "\n";
        out.flush();
        if (!out) throw std::runtime_error("short write to cache file: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

CachingProvider::CachingProvider(CompletionProvider* inner, std::string cache_dir,
                                 bool cache_only)
    : inner_(inner), cache_dir_(std::move(cache_dir)), cache_only_(cache_only) {
    if (cache_dir_.empty()) throw std::invalid_argument("cache directory path is empty");
    if (!cache_only_ && inner_ == nullptr) {
        throw std::invalid_argument("caching provider needs an inner provider unless cache-only");
    }
}

CompletionRecord CachingProvider::complete(const CompletionRequest& req) {
    validate_request(req);
    const std::string digest = request_digest(req);
    const std::string path = cache_path_for(cache_dir_, digest);

    std::shared_future<CompletionRecord> waiter;
    std::promise<CompletionRecord> promise;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = inflight_.find(digest);
        if (it != inflight_.end()) {
            waiter = it->second;
        } else if (std::filesystem::exists(path)) {
            return read_cached_record(path, digest);
        } else if (cache_only_ || inner_ == nullptr) {
            throw ProviderError(ProviderErrorKind::not_cached,
                                "completion not cached: " + digest);
        } else {
            owner = true;
            waiter = promise.get_future().share();
            inflight_.emplace(digest, waiter);
        }
    }
    if (!owner) return waiter.get();

    try {
        CompletionRecord record = inner_->complete(req);
        record.request_digest = digest;
        write_record_atomic(path, record);
        promise.set_value(record);
        std::lock_guard<std::mutex> lock(mu_);
        inflight_.erase(digest);
        return record;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard<std::mutex> lock(mu_);
        inflight_.erase(digest);
        throw;
    }
}

}  // namespace xcot
