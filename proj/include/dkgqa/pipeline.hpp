#pragma once

#include "dkgqa/config.hpp"
#include "dkgqa/dataset_io.hpp"
#include "dkgqa/llm_gateway.hpp"
#include "dkgqa/prompts.hpp"
#include "dkgqa/seed_linker.hpp"
#include "dkgqa/stats.hpp"
#include "dkgqa/subgraph.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dkgqa {

// --- corpus ----------------------------------------------------------------

/// JSONL with `doc_id`, `text` and `split` per line. Throws ParseError.
std::vector<SeedDocument> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<SeedDocument>& docs);

enum class CorpusFormat { jsonl, lines, wiki40b };

struct CorpusImportOptions {
    CorpusFormat format = CorpusFormat::jsonl;
    std::string id_field = "doc_id";
    std::string text_field = "text";
    std::string split_field = "split";
    /// Overrides any split field; required when the input carries none.
    std::optional<Split> split;
    std::string id_prefix = "doc";
};

/// jsonl: arbitrary field names mapped onto the exchange format.
/// lines: one document per non-empty line, ids `<prefix>-<n>`.
/// wiki40b: JSONL with `wikidata_id` and marker-laden `text`; markers are
/// turned back into plain paragraphs.
std::vector<SeedDocument> import_corpus(const std::string& path, const CorpusImportOptions& options);
std::string clean_wiki40b(std::string_view text);

// --- subgraph cache ----------------------------------------------------------

/// SHA-256 over the bytes of the KG file and the label file.
std::string kg_fingerprint(const std::string& kg_path, const std::string& labels_path);

struct CacheEntry {
    std::string doc_id;
    Split split = Split::train;
    std::string status = "ok";  // otherwise the stage that dropped the document
    std::optional<SeedSubgraph> subgraph;
};

struct SubgraphCache {
    std::string kg_hash;
    std::vector<CacheEntry> entries;  // corpus order
};

nlohmann::ordered_json subgraph_to_json(const SeedSubgraph& sub);
SeedSubgraph subgraph_from_json(const nlohmann::json& j);

std::string cache_file(const std::string& cache_dir, const std::string& kg_hash);
void write_cache(const std::string& cache_dir, const SubgraphCache& cache);
/// Throws IoError naming `generate` when there is no cache for `kg_hash`.
SubgraphCache read_cache(const std::string& cache_dir, const std::string& kg_hash);

/// Runs `fn(i)` for i in [0, n) on `workers` threads. The first exception is
/// rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// link -> expand -> Steiner -> largest component for every document.
SubgraphCache build_subgraphs(const KnowledgeGraph& kg, const std::vector<SeedDocument>& docs,
                              const PipelineConfig& cfg, const std::string& kg_hash);

// --- generation ---------------------------------------------------------------

PromptSet load_prompts(const PipelineConfig& cfg);
/// Mock (synthetic responder plus optional fixtures) or OpenAI-compatible,
/// with the API key read from the configured environment variable.
std::shared_ptr<ChatProvider> make_provider(const PipelineConfig& cfg, const PromptSet& prompts);
GatewayConfig gateway_config(const PipelineConfig& cfg);

/// generate -> verify -> judge -> assemble over the cached subgraphs.
DatasetVariant generate_variant(const SubgraphCache& cache, const PipelineConfig& cfg, LlmGateway& gateway,
                                const PromptSet& prompts);

/// Full run: loads KG and corpus, builds and caches subgraphs, then writes
/// the variant to the output directory.
DatasetVariant cmd_generate(const PipelineConfig& cfg);
/// Regenerates QA from the cached subgraphs with the configured seed and
/// temperature.
DatasetVariant cmd_variant(const PipelineConfig& cfg);

// --- checks and analysis --------------------------------------------------------

struct VerifyReport {
    std::size_t checked = 0;
    std::vector<std::string> failures;  // "<record id>: <reason>"
    bool ok() const noexcept { return failures.empty(); }
};

/// Re-checks every record: supporting facts are stored triples of its
/// subgraph, sizes agree, and (with a cache) the subgraph matches the cached
/// one and the path verifies against it.
VerifyReport verify_variant(const DatasetVariant& variant, const SubgraphCache* cache = nullptr);

stats::RunView run_view(const DatasetVariant& variant);

std::unique_ptr<stats::TopicLabeler> make_labeler(const PipelineConfig& cfg);

/// Every pair of variants, in the order given.
std::vector<stats::RunComparison> compare_variants(const std::vector<DatasetVariant>& variants,
                                                   const stats::TopicLabeler& labeler,
                                                   const stats::ClassifyOptions& opts = {});

/// Counts, mean sizes, judge flag rates and topic distribution of a variant.
nlohmann::ordered_json variant_stats(const DatasetVariant& variant, const stats::TopicLabeler& labeler);

}  // namespace dkgqa
