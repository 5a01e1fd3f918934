#pragma once

#include "dkgqa/judge.hpp"
#include "dkgqa/qa_gen.hpp"
#include "dkgqa/subgraph.hpp"
#include "dkgqa/verifier.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dkgqa {

using TripleStrings = std::array<std::string, 3>;

struct JudgeRecord {
    bool logical_structure_flag = false;
    std::string logical_structure_reasoning;
    bool redundancy_flag = false;
    std::string redundancy_reasoning;
    bool answer_support_flag = false;
    std::string answer_support_reasoning;
    bool answer_adequacy_flag = false;
    std::string answer_adequacy_reasoning;

    friend bool operator==(const JudgeRecord&, const JudgeRecord&) = default;
};

/// One dataset row. Serialized with the attribute names of the published
/// schema, in that order, followed by doc_id.
struct DatasetRecord {
    std::string id;
    std::string question;
    std::string answer;           // KG entity name (IRI local name)
    std::string answer_readable;  // label, or the entity name when unlabelled
    std::string answer_uri;       // empty when the answer is not a subgraph entity
    std::vector<TripleStrings> supporting_facts;      // labels
    std::vector<TripleStrings> supporting_facts_uri;  // IRIs, aligned with supporting_facts
    std::vector<TripleStrings> subgraph;              // IRIs, sorted
    std::int64_t subgraph_size = 0;
    std::vector<JudgeRecord> judges;  // suffix n = index + 1
    std::string doc_id;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Field names for a panel of `judges` judges, in serialization order.
std::vector<std::string> record_field_names(std::size_t judges);

nlohmann::ordered_json to_json(const DatasetRecord& r);
/// Throws DocumentError on a missing or mistyped field.
DatasetRecord record_from_json(const nlohmann::json& j);

/// Content-addressed id: SHA-256 of (doc_id, normalized question, variant id), first 32 hex digits.
std::string record_id(const std::string& doc_id, const std::string& question, const std::string& variant_id);

struct AssembledRecord {
    DatasetRecord record;
    bool label_gap = false;          // answer entity has no label
    bool answer_unresolved = false;  // answer names no subgraph entity
};

/// Maps a verified, accepted candidate onto the record schema. Throws
/// std::invalid_argument if the candidate was not verified and accepted.
AssembledRecord assemble_record(const QaCandidate& c, const SeedSubgraph& sub, const VerificationOutcome& outcome,
                                const PanelDecision& decision, const std::string& variant_id);

struct VariantManifest {
    std::string variant_id;
    std::uint64_t reorder_seed = 0;
    double temperature = 0.8;
    std::string generator_model;
    std::vector<std::string> judge_models;
    std::map<std::string, std::string> prompt_hashes;
    std::string config_hash;
    std::string kg_hash;
    std::map<std::string, std::int64_t> counts;  // split name -> records
    std::int64_t docs_input = 0;
    std::int64_t docs_emitted = 0;   // documents contributing at least one record
    std::map<std::string, std::int64_t> stage_drops;  // documents, by stage
    std::int64_t candidates_generated = 0;
    std::map<std::string, std::int64_t> candidate_drops;
    std::vector<std::string> label_gaps;          // record ids
    std::vector<std::string> unresolved_answers;  // record ids
    std::map<std::string, std::vector<std::string>> doc_ids;  // split name -> documents processed

    friend bool operator==(const VariantManifest&, const VariantManifest&) = default;
};

nlohmann::ordered_json to_json(const VariantManifest& m);
VariantManifest manifest_from_json(const nlohmann::json& j);

struct DatasetVariant {
    VariantManifest manifest;
    std::map<Split, std::vector<DatasetRecord>> records;
};

std::string split_path(const std::string& dir, const std::string& variant_id, Split split);
std::string manifest_path(const std::string& dir, const std::string& variant_id);

/// One record per line, UTF-8, stable field order, trailing newline.
void write_split(const std::string& path, const std::vector<DatasetRecord>& records);
/// Throws ParseError with the offending line number.
std::vector<DatasetRecord> read_split(const std::string& path);

/// Writes all three split files (empty ones included) and the manifest, whose
/// counts are refreshed from `records`.
void write_variant(const std::string& dir, DatasetVariant variant);
DatasetVariant read_variant(const std::string& dir, const std::string& variant_id);

}  // namespace dkgqa
