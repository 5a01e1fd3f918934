#include "dkgqa/llm_gateway.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/hashing.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace dkgqa {

void validate(const ChatRequest& request) {
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw InvalidRequestError("temperature " + std::to_string(request.temperature) + " is outside [0, 2]");
    }
    if (request.system_prompt.empty() || request.user_prompt.empty()) {
        throw InvalidRequestError("system and user prompts must be non-empty");
    }
    if (request.max_output_tokens <= 0) throw InvalidRequestError("max_output_tokens must be positive");
}

void SystemClock::sleep_for(duration d) {
    if (d > duration::zero()) std::this_thread::sleep_for(d);
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute, double burst, std::shared_ptr<Clock> clock)
    : enabled_(requests_per_minute > 0.0), clock_(std::move(clock)), tat_(clock_->now()) {
    if (!enabled_) return;
    // Round the interval up so rounding can only make the limiter stricter.
    interval_ = std::chrono::ceil<Clock::duration>(std::chrono::duration<double>(60.0 / requests_per_minute));
    const auto extra = static_cast<Clock::duration::rep>(std::max(1.0, std::floor(burst)) - 1.0);
    tolerance_ = interval_ * extra;
}

void RateLimiter::acquire() {
    if (!enabled_) return;
    Clock::duration wait{0};
    {
        std::lock_guard lock(mutex_);
        const auto now = clock_->now();
        const auto slot = std::max(now, tat_ - tolerance_);
        tat_ = std::max(tat_, slot) + interval_;
        wait = slot - now;
    }
    clock_->sleep_for(wait);
}

std::chrono::milliseconds RetryConfig::delay_for(int retry_index) const {
    const double scaled = static_cast<double>(initial_delay.count()) * std::pow(multiplier, retry_index);
    const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

// ---------------------------------------------------------------------------

LlmGateway::LlmGateway(std::shared_ptr<ChatProvider> provider, GatewayConfig config, std::shared_ptr<Clock> clock)
    : provider_(std::move(provider)),
      config_(config),
      clock_(std::move(clock)),
      limiter_(config.requests_per_minute, config.burst, clock_) {}

ChatResponse LlmGateway::complete(const ChatRequest& request) {
    validate(request);
    const auto start = clock_->now();
    int attempts = 0;
    std::string last_error;
    while (true) {
        ++attempts;
        limiter_.acquire();
        try {
            auto response = provider_->send(request);
            if (response.text.empty()) throw ProviderError("provider returned an empty completion", true);
            response.attempt_count = attempts;
            response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - start);
            return response;
        } catch (const ProviderError& e) {
            if (!e.transient()) throw;
            last_error = e.what();
        }
        const int retry_index = attempts - 1;
        if (retry_index >= config_.retry.max_retries) break;
        const auto delay = config_.retry.delay_for(retry_index);
        spdlog::debug("{}: transient failure ({}), retry {} in {} ms", provider_->name(), last_error, attempts,
                      delay.count());
        clock_->sleep_for(delay);
    }
    throw TransientFailureError(
        "retry budget exhausted after " + std::to_string(attempts) + " attempt(s): " + last_error, attempts);
}

// ---------------------------------------------------------------------------

MockProvider::MockProvider(Responder responder) : responder_(std::move(responder)) {}

std::string MockProvider::fixture_key(const ChatRequest& request) {
    char temperature[32];
    std::snprintf(temperature, sizeof temperature, "%.6f", request.temperature);
    Sha256 h;
    h.field(request.model_id).field(temperature).field(request.system_prompt).field(request.user_prompt);
    return h.hex_digest();
}

void MockProvider::add_fixture(const ChatRequest& request, std::string response) {
    add_fixture(fixture_key(request), std::move(response));
}

void MockProvider::add_fixture(const std::string& key, std::string response) {
    std::lock_guard lock(mutex_);
    fixtures_[key] = std::move(response);
}

void MockProvider::load_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock fixture file '" + path + "'");
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("fixtures") || !doc["fixtures"].is_array()) {
        throw ConfigError("mock fixture file '" + path + "' must hold a \"fixtures\" array");
    }
    for (const auto& f : doc["fixtures"]) {
        add_fixture(f.at("key").get<std::string>(), f.at("response").get<std::string>());
    }
}

ChatResponse MockProvider::send(const ChatRequest& request) {
    const auto key = fixture_key(request);
    ChatResponse response;
    response.provider_metadata["provider"] = "mock";
    response.provider_metadata["fixture_key"] = key;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (const auto it = fixtures_.find(key); it != fixtures_.end()) {
            response.text = it->second;
            response.provider_metadata["source"] = "fixture";
            return response;
        }
    }
    if (!responder_) throw ProviderError("mock provider has no fixture for key " + key, false);
    response.text = responder_(request, std::stoull(key.substr(0, 16), nullptr, 16));
    response.provider_metadata["source"] = "responder";
    return response;
}

std::size_t MockProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

}  // namespace dkgqa
