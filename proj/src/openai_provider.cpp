#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dkgqa/errors.hpp"
#include "dkgqa/llm_gateway.hpp"

#include <nlohmann/json.hpp>

#include <chrono>

namespace dkgqa {

namespace {

// Splits "https://host:port/v1" into the origin httplib wants and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("provider base URL '" + url + "' has no scheme");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("provider base URL '" + url + "' must use http or https");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    auto path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

}  // namespace

OpenAiCompatibleProvider::OpenAiCompatibleProvider(OpenAiProviderConfig config) : config_(std::move(config)) {
    std::tie(origin_, path_prefix_) = split_url(config_.base_url);
}

std::string OpenAiCompatibleProvider::request_body(const ChatRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.model_id;
    body["messages"] = nlohmann::ordered_json::array({
        {{"role", "system"}, {"content", request.system_prompt}},
        {{"role", "user"}, {"content", request.user_prompt}},
    });
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    return body.dump();
}

ChatResponse OpenAiCompatibleProvider::parse_response_body(const std::string& body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ProviderError("provider returned a non-JSON body", true);
    const auto* choices = doc.contains("choices") ? &doc["choices"] : nullptr;
    if (choices == nullptr || !choices->is_array() || choices->empty()) {
        throw ProviderError("provider response has no choices", true);
    }
    const auto& message = (*choices)[0].value("message", nlohmann::json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
        throw ProviderError("provider response has no message content", true);
    }
    ChatResponse out;
    out.text = message["content"].get<std::string>();
    for (const char* key : {"id", "model"}) {
        if (doc.contains(key) && doc[key].is_string()) out.provider_metadata[key] = doc[key].get<std::string>();
    }
    if (const auto reason = (*choices)[0].find("finish_reason"); reason != (*choices)[0].end() && reason->is_string()) {
        out.provider_metadata["finish_reason"] = reason->get<std::string>();
    }
    if (doc.contains("usage") && doc["usage"].is_object()) out.provider_metadata["usage"] = doc["usage"].dump();
    return out;
}

bool OpenAiCompatibleProvider::is_transient_status(int status) {
    return status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

ChatResponse OpenAiCompatibleProvider::send(const ChatRequest& request) {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto result = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request),
                                    "application/json");
    if (!result) {
        throw ProviderError("HTTP request to " + origin_ + " failed: " + httplib::to_string(result.error()), true);
    }
    if (result->status != 200) {
        auto detail = result->body.substr(0, 300);
        throw ProviderError("provider returned HTTP " + std::to_string(result->status) + ": " + detail,
                            is_transient_status(result->status), result->status);
    }
    auto response = parse_response_body(result->body);
    response.provider_metadata["provider"] = name();
    return response;
}

}  // namespace dkgqa
