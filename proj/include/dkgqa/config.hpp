#pragma once

#include "dkgqa/kg_store.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dkgqa {

/// Everything a pipeline run needs. Keys are addressed as `section.key`, the
/// same names used in the INI file, by `--set` and by DKGQA_SECTION_KEY
/// environment variables.
struct PipelineConfig {
    // [kg]
    std::string kg_path;
    std::string labels_path;
    MalformedLinePolicy malformed = MalformedLinePolicy::skip_and_count;
    // [corpus]
    std::string corpus_path;
    // [provider]
    std::string provider = "mock";  // mock | openai
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "DKGQA_API_KEY";
    std::string mock_fixtures;
    double requests_per_minute = 0.0;
    double burst = 1.0;
    int max_retries = 3;
    int timeout_seconds = 120;
    // [generation]
    std::string generator_model = "mock-generator";
    double temperature = 0.8;
    std::uint64_t reorder_seed = 0;
    std::size_t max_pairs = 20;
    int max_output_tokens = 4096;
    // [judges]
    std::vector<std::string> judge_models{"mock-judge-a", "mock-judge-b", "mock-judge-c"};
    int judge_max_output_tokens = 1024;
    // [subgraph]
    std::size_t min_triples = 3;
    std::size_t max_triples = 200;
    std::size_t max_mentions = 0;
    bool strip_diacritics = false;
    // [output]
    std::string output_dir = "out";
    std::string cache_dir;  // empty: <output_dir>/cache
    std::string variant_id;  // empty: derived from seed and temperature
    // [run]
    std::size_t workers = 1;
    // [prompts]
    std::string prompts_dir;  // empty: the compiled-in copies
    // [stats]
    double jaccard_threshold = 0.6;
    std::string topic_table;

    /// Sets one key from its text form. Throws ConfigError on an unknown key
    /// or a malformed value.
    void set(const std::string& key, const std::string& value);
    /// Every key with its current value in text form, sorted by key.
    std::map<std::string, std::string> entries() const;

    /// Paths exist, numbers in range. Throws ConfigError.
    void validate_for_generation() const;

    std::string effective_cache_dir() const;
    std::string effective_variant_id() const;
};

/// Known keys, sorted.
const std::vector<std::string>& config_keys();

/// Reads `[section]` headers and `key = value` lines; `#` and `;` start
/// comments. Relative paths are resolved against the file's directory.
PipelineConfig load_config(const std::string& path);
/// Applies `section.key=value` overrides in order.
void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments);
/// Applies DKGQA_SECTION_KEY variables found in `env` (name -> value).
void apply_environment(PipelineConfig& cfg, const std::map<std::string, std::string>& env);
/// The process environment, restricted to DKGQA_* names.
std::map<std::string, std::string> process_environment();

/// "variant_seed<R>_t<T to 2 places>"
std::string default_variant_id(std::uint64_t seed, double temperature);

}  // namespace dkgqa
