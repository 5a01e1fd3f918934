#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

namespace dkgqa {

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_output_tokens = 4096;
    std::string model_id;
};

/// Throws InvalidRequestError unless temperature is in [0, 2], both prompts are
/// non-empty, and max_output_tokens is positive.
void validate(const ChatRequest& request);

struct ChatResponse {
    std::string text;
    std::map<std::string, std::string> provider_metadata;
    std::chrono::milliseconds latency{0};
    int attempt_count = 1;
};

/// One wire dialect per implementation. Implementations throw ProviderError,
/// flagged transient or not, on failure.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse send(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

class Clock {
public:
    using duration = std::chrono::steady_clock::duration;
    using time_point = std::chrono::steady_clock::time_point;

    virtual ~Clock() = default;
    virtual time_point now() const = 0;
    virtual void sleep_for(duration d) = 0;
};

class SystemClock final : public Clock {
public:
    time_point now() const override { return std::chrono::steady_clock::now(); }
    void sleep_for(duration d) override;
};

/// Token bucket refilled at `requests_per_minute`, holding at most `burst`
/// tokens, kept in GCRA form (a theoretical arrival time in integer clock
/// ticks) so the bookkeeping never drifts from the sleeps actually taken.
/// Callers reserve the next free slot under a lock and then sleep until it.
/// With burst = 1, no half-open 60-second window admits more than
/// `requests_per_minute` requests.
class RateLimiter {
public:
    RateLimiter(double requests_per_minute, double burst, std::shared_ptr<Clock> clock);

    /// Blocks until a token is available. No-op when the rate is 0 (unlimited).
    void acquire();

private:
    bool enabled_;
    Clock::duration interval_{};
    Clock::duration tolerance_{};
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    Clock::time_point tat_;
};

struct RetryConfig {
    int max_retries = 3;
    std::chrono::milliseconds initial_delay{500};
    std::chrono::milliseconds max_delay{8000};
    double multiplier = 2.0;

    std::chrono::milliseconds delay_for(int retry_index) const;
};

struct GatewayConfig {
    RetryConfig retry;
    double requests_per_minute = 0.0;  // 0 disables rate limiting
    double burst = 1.0;
};

/// Provider-agnostic front door for every LLM call: validation, rate limiting,
/// retries with exponential backoff. Shareable across threads.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatProvider> provider, GatewayConfig config = {},
               std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());

    /// Throws InvalidRequestError before dispatch, ProviderError for
    /// non-transient failures, TransientFailureError once the retry budget is
    /// spent.
    ChatResponse complete(const ChatRequest& request);

    ChatProvider& provider() noexcept { return *provider_; }

private:
    std::shared_ptr<ChatProvider> provider_;
    GatewayConfig config_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
};

/// Deterministic provider for tests and offline runs. Looks up a fixture keyed
/// by the request's content hash; falls back to a responder function seeded by
/// the same hash.
class MockProvider final : public ChatProvider {
public:
    using Responder = std::function<std::string(const ChatRequest& request, std::uint64_t seed)>;

    explicit MockProvider(Responder responder = {});

    /// SHA-256 over model id, temperature (fixed 6-digit form), and both prompts.
    static std::string fixture_key(const ChatRequest& request);

    void add_fixture(const ChatRequest& request, std::string response);
    void add_fixture(const std::string& key, std::string response);
    /// Reads `{"fixtures": [{"key": ..., "response": ...}, ...]}`.
    void load_fixtures(const std::string& path);

    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "mock"; }

    std::size_t calls() const;

private:
    Responder responder_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> fixtures_;
    std::size_t calls_ = 0;
};

struct OpenAiProviderConfig {
    /// e.g. https://api.openai.com/v1; requests go to {base_url}/chat/completions.
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completions client over HTTP(S).
class OpenAiCompatibleProvider final : public ChatProvider {
public:
    explicit OpenAiCompatibleProvider(OpenAiProviderConfig config);

    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "openai-compatible"; }

    /// Wire form of a request, exposed for tests.
    static std::string request_body(const ChatRequest& request);
    /// Extracts choices[0].message.content; throws ProviderError on a
    /// malformed body.
    static ChatResponse parse_response_body(const std::string& body);
    /// 408, 409, 425, 429 and 5xx are transient; other statuses are not.
    static bool is_transient_status(int status);

private:
    OpenAiProviderConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace dkgqa
