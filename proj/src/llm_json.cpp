#include "dkgqa/llm_json.hpp"

#include "dkgqa/text.hpp"

namespace dkgqa {

namespace {

bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::optional<nlohmann::json> try_object(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    return doc;
}

}  // namespace

std::string_view first_json_object(std::string_view text) {
    const auto start = text.find('{');
    if (start == std::string_view::npos) return {};
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return {};
}

std::string normalize_json_literals(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            out += c;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        if (ident_char(c) && (i == 0 || !ident_char(text[i - 1]))) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            const auto word = text.substr(i, j - i);
            if (word == "True") {
                out += "true";
            } else if (word == "False") {
                out += "false";
            } else if (word == "None") {
                out += "null";
            } else {
                out += word;
            }
            i = j - 1;
            continue;
        }
        out += c;
    }
    return out;
}

std::optional<nlohmann::json> parse_llm_object(const std::string& text) {
    if (auto doc = try_object(text)) return doc;
    const auto block = first_json_object(text);
    if (!block.empty()) {
        if (auto doc = try_object(block)) return doc;
    }
    const auto rewritten = normalize_json_literals(text);
    const auto block2 = first_json_object(rewritten);
    if (!block2.empty()) return try_object(block2);
    return std::nullopt;
}

std::optional<bool> json_flag(const nlohmann::json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_string()) {
        const auto s = text::normalize_label(j.get<std::string>());
        if (s == "true") return true;
        if (s == "false") return false;
    }
    return std::nullopt;
}

}  // namespace dkgqa
