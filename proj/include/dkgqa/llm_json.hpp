#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace dkgqa {

/// The first balanced top-level `{...}` in `text`, honouring JSON strings.
/// Empty when there is none.
std::string_view first_json_object(std::string_view text);

/// Rewrites bare Python-style True/False/None tokens outside strings to
/// their JSON spellings.
std::string normalize_json_literals(std::string_view text);

/// Recovers one JSON object from an LLM reply: strict parse, then the first
/// balanced block, then the same with Python-style literals rewritten.
std::optional<nlohmann::json> parse_llm_object(const std::string& text);

/// true/false, or the strings "true"/"false" in any case.
std::optional<bool> json_flag(const nlohmann::json& j);

}  // namespace dkgqa
