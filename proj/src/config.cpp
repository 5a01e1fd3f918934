#include "dkgqa/config.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

extern char** environ;

namespace dkgqa {

namespace {

namespace fs = std::filesystem;

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': '" + value + "' is not a valid number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = text::fold(value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("'" + key + "': '" + value + "' is not a boolean");
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        auto end = value.find(',', pos);
        if (end == std::string::npos) end = value.size();
        auto item = text::trim(std::string_view(value).substr(pos, end - pos));
        if (!item.empty()) out.push_back(std::move(item));
        pos = end + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::string show(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
    bool is_path = false;
};

template <typename M>
Field text_field(M PipelineConfig::*m, bool is_path = false) {
    return {[m](PipelineConfig& c, const std::string&, const std::string& v) { c.*m = v; },
            [m](const PipelineConfig& c) { return c.*m; }, is_path};
}

template <typename N>
Field number_field(N PipelineConfig::*m) {
    return {[m](PipelineConfig& c, const std::string& k, const std::string& v) { c.*m = parse_number<N>(k, v); },
            [m](const PipelineConfig& c) {
                if constexpr (std::is_floating_point_v<N>) {
                    return show(c.*m);
                } else {
                    return std::to_string(c.*m);
                }
            }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table{
        {"kg.path", text_field(&PipelineConfig::kg_path, true)},
        {"kg.labels", text_field(&PipelineConfig::labels_path, true)},
        {"kg.malformed",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              if (v == "skip") {
                  c.malformed = MalformedLinePolicy::skip_and_count;
              } else if (v == "fail") {
                  c.malformed = MalformedLinePolicy::fail_fast;
              } else {
                  throw ConfigError("'" + k + "' must be 'skip' or 'fail'");
              }
          },
          [](const PipelineConfig& c) {
              return std::string(c.malformed == MalformedLinePolicy::fail_fast ? "fail" : "skip");
          }}},
        {"corpus.path", text_field(&PipelineConfig::corpus_path, true)},
        {"provider.kind", text_field(&PipelineConfig::provider)},
        {"provider.base_url", text_field(&PipelineConfig::base_url)},
        {"provider.api_key_env", text_field(&PipelineConfig::api_key_env)},
        {"provider.mock_fixtures", text_field(&PipelineConfig::mock_fixtures, true)},
        {"provider.requests_per_minute", number_field(&PipelineConfig::requests_per_minute)},
        {"provider.burst", number_field(&PipelineConfig::burst)},
        {"provider.max_retries", number_field(&PipelineConfig::max_retries)},
        {"provider.timeout_seconds", number_field(&PipelineConfig::timeout_seconds)},
        {"generation.model", text_field(&PipelineConfig::generator_model)},
        {"generation.temperature", number_field(&PipelineConfig::temperature)},
        {"generation.reorder_seed", number_field(&PipelineConfig::reorder_seed)},
        {"generation.max_pairs", number_field(&PipelineConfig::max_pairs)},
        {"generation.max_output_tokens", number_field(&PipelineConfig::max_output_tokens)},
        {"judges.models",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.judge_models = parse_list(v); },
          [](const PipelineConfig& c) { return join(c.judge_models); }}},
        {"judges.max_output_tokens", number_field(&PipelineConfig::judge_max_output_tokens)},
        {"subgraph.min_triples", number_field(&PipelineConfig::min_triples)},
        {"subgraph.max_triples", number_field(&PipelineConfig::max_triples)},
        {"subgraph.max_mentions", number_field(&PipelineConfig::max_mentions)},
        {"subgraph.strip_diacritics",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.strip_diacritics = parse_bool(k, v); },
          [](const PipelineConfig& c) { return std::string(c.strip_diacritics ? "true" : "false"); }}},
        {"output.dir", text_field(&PipelineConfig::output_dir, true)},
        {"output.cache_dir", text_field(&PipelineConfig::cache_dir, true)},
        {"output.variant_id", text_field(&PipelineConfig::variant_id)},
        {"run.workers", number_field(&PipelineConfig::workers)},
        {"prompts.dir", text_field(&PipelineConfig::prompts_dir, true)},
        {"stats.jaccard_threshold", number_field(&PipelineConfig::jaccard_threshold)},
        {"stats.topic_table", text_field(&PipelineConfig::topic_table, true)},
    };
    return table;
}

const Field& field_for(const std::string& key) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

void require_file(const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError("'" + key + "' is not set");
    if (!fs::is_regular_file(path)) throw ConfigError("'" + key + "': no such file '" + path + "'");
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    field_for(key).set(*this, key, value);
}

std::map<std::string, std::string> PipelineConfig::entries() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, f] : fields()) out[key] = f.get(*this);
    return out;
}

void PipelineConfig::validate_for_generation() const {
    require_file("kg.path", kg_path);
    if (!labels_path.empty()) require_file("kg.labels", labels_path);
    require_file("corpus.path", corpus_path);
    if (!mock_fixtures.empty()) require_file("provider.mock_fixtures", mock_fixtures);
    if (provider != "mock" && provider != "openai") throw ConfigError("'provider.kind' must be 'mock' or 'openai'");
    if (workers < 1) throw ConfigError("'run.workers' must be at least 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("'generation.temperature' must be in [0, 2]");
    if (judge_models.empty()) throw ConfigError("'judges.models' must name at least one judge");
    if (max_retries < 0) throw ConfigError("'provider.max_retries' must be non-negative");
    if (requests_per_minute < 0.0) throw ConfigError("'provider.requests_per_minute' must be non-negative");
    if (max_triples != 0 && max_triples < min_triples) {
        throw ConfigError("'subgraph.max_triples' is below 'subgraph.min_triples'");
    }
    if (!prompts_dir.empty() && !fs::is_directory(prompts_dir)) {
        throw ConfigError("'prompts.dir': no such directory '" + prompts_dir + "'");
    }
}

std::string PipelineConfig::effective_cache_dir() const {
    return cache_dir.empty() ? (fs::path(output_dir) / "cache").string() : cache_dir;
}

std::string PipelineConfig::effective_variant_id() const {
    return variant_id.empty() ? default_variant_id(reorder_seed, temperature) : variant_id;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, f] : fields()) out.push_back(k);
        return out;
    }();
    return keys;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    const auto base = fs::absolute(path).parent_path();
    PipelineConfig cfg;
    std::string section, line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto t = text::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(path + ":" + std::to_string(n) + ": unterminated section header");
            section = text::trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(n) + ": expected key = value");
        const auto key = section + "." + text::trim(std::string_view(t).substr(0, eq));
        auto value = text::trim(std::string_view(t).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const auto& f = field_for(key);
        if (f.is_path && !value.empty() && fs::path(value).is_relative()) value = (base / value).lexically_normal().string();
        f.set(cfg, key, value);
    }
    return cfg;
}

void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments) {
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
        cfg.set(text::trim(std::string_view(a).substr(0, eq)), text::trim(std::string_view(a).substr(eq + 1)));
    }
}

void apply_environment(PipelineConfig& cfg, const std::map<std::string, std::string>& env) {
    for (const auto& key : config_keys()) {
        std::string name = "DKGQA_";
        for (const char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const auto it = env.find(name); it != env.end()) cfg.set(key, it->second);
    }
}

std::map<std::string, std::string> process_environment() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        const std::string_view kv(*e);
        if (!kv.starts_with("DKGQA_")) continue;
        const auto eq = kv.find('=');
        if (eq != std::string_view::npos) out.emplace(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
}

std::string default_variant_id(std::uint64_t seed, double temperature) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "variant_seed%llu_t%.2f", static_cast<unsigned long long>(seed), temperature);
    return buf;
}

}  // namespace dkgqa
