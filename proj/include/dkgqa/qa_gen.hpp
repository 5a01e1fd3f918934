#pragma once

#include "dkgqa/llm_gateway.hpp"
#include "dkgqa/prompts.hpp"
#include "dkgqa/subgraph.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dkgqa {

struct GenerationConfig {
    double temperature = 0.8;        // T
    std::uint64_t reorder_seed = 0;  // R
    std::string model_id;
    int max_output_tokens = 4096;
    /// Runaway guard on the number of pairs kept from one response.
    std::size_t max_pairs = 20;

    friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

/// One step of a supporting path, in the labels the generator used.
struct PathTriple {
    std::string subject;
    std::string predicate;
    std::string object;

    friend auto operator<=>(const PathTriple&, const PathTriple&) = default;
};

struct QaCandidate {
    std::string question;
    std::string answer;
    std::vector<PathTriple> supporting_path;
    std::string doc_id;
    GenerationConfig config;

    friend bool operator==(const QaCandidate&, const QaCandidate&) = default;
};

struct GenerationBatch {
    std::string doc_id;
    std::vector<QaCandidate> candidates;
    bool valid_flag = false;
    std::string raw_response;
    /// `number_of_qa_pairs` as the model reported it.
    std::int64_t reported_count = 0;
    bool count_corrected = false;
    bool truncated = false;
    int attempts = 0;
};

/// Seeded Fisher-Yates permutation of the subgraph's canonical triple order.
std::vector<Triple> reorder(const SeedSubgraph& sub, std::uint64_t seed);

/// `(subject, predicate, object)` with display labels.
std::string format_triple(std::string_view subject, std::string_view predicate, std::string_view object);

/// One line per triple, joined by newlines, no trailing newline.
std::string serialize_triples(const SeedSubgraph& sub, std::span<const Triple> ordered);
/// Same format against the full store; literal objects render as their lexical form.
std::string serialize_triples(const KnowledgeGraph& kg, std::span<const Triple> ordered);
std::string serialize_path(std::span<const PathTriple> path);

/// Parses a P1 response: strict JSON first, then the first balanced `{...}`
/// block (see parse_llm_object). Throws GenerationParseError if neither yields a well-formed object
/// or any pair violates the candidate invariants.
GenerationBatch parse_generation_response(const std::string& text, const std::string& doc_id,
                                          const GenerationConfig& cfg);

/// Renders P1 over serialize_triples(reorder(sub, R)), calls the gateway at
/// temperature T, and parses. A parse failure is retried once.
GenerationBatch generate_qa(const SeedSubgraph& sub, const GenerationConfig& cfg, LlmGateway& gateway,
                            const PromptSet& prompts);

}  // namespace dkgqa
