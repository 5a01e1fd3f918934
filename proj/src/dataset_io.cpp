#include "dkgqa/dataset_io.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/hashing.hpp"
#include "dkgqa/text.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace dkgqa {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kJudgeFields[] = {
    "logical_structure_flag", "logical_structure_reasoning", "redundancy_flag", "redundancy_reasoning",
    "answer_support_flag",    "answer_support_reasoning",    "answer_adequacy_flag", "answer_adequacy_reasoning",
};

ordered_json facts_json(const std::vector<TripleStrings>& facts) {
    auto out = ordered_json::array();
    for (const auto& f : facts) out.push_back({{"subject", f[0]}, {"predicate", f[1]}, {"object", f[2]}});
    return out;
}

template <typename T>
T field(const json& j, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) throw DocumentError("record is missing \"" + key + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw DocumentError("record field \"" + key + "\" has the wrong type");
    }
}

std::vector<TripleStrings> facts_from(const json& j, const std::string& key) {
    std::vector<TripleStrings> out;
    const auto arr = field<json>(j, key);
    if (!arr.is_array()) throw DocumentError("record field \"" + key + "\" is not a list");
    for (const auto& f : arr) {
        if (f.is_array() && f.size() == 3) {
            out.push_back({f[0].get<std::string>(), f[1].get<std::string>(), f[2].get<std::string>()});
        } else if (f.is_object()) {
            out.push_back({field<std::string>(f, "subject"), field<std::string>(f, "predicate"),
                           field<std::string>(f, "object")});
        } else {
            throw DocumentError("record field \"" + key + "\" holds a malformed triple");
        }
    }
    return out;
}

TripleStrings triple_iris(const SeedSubgraph& sub, const Triple& t) {
    return {sub.entity(t.subject).iri, sub.predicate(t.predicate).iri, sub.entity(t.object_entity()).iri};
}

TripleStrings triple_labels(const SeedSubgraph& sub, const Triple& t) {
    return {sub.entity(t.subject).display(), sub.predicate(t.predicate).display(),
            sub.entity(t.object_entity()).display()};
}

void write_text(const std::string& path, const std::string& body) {
    const auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out << body;
        if (!out.flush()) throw IoError("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

}  // namespace

std::vector<std::string> record_field_names(std::size_t judges) {
    std::vector<std::string> out{"id",         "question", "answer", "answer_readable", "answer_uri", "supporting_facts",
                                 "supporting_facts_uri", "subgraph", "subgraph_size"};
    for (std::size_t n = 1; n <= judges; ++n) {
        for (const auto* f : kJudgeFields) out.push_back(std::string(f) + "_" + std::to_string(n));
    }
    out.emplace_back("doc_id");
    return out;
}

ordered_json to_json(const DatasetRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["answer"] = r.answer;
    j["answer_readable"] = r.answer_readable;
    j["answer_uri"] = r.answer_uri;
    j["supporting_facts"] = facts_json(r.supporting_facts);
    j["supporting_facts_uri"] = facts_json(r.supporting_facts_uri);
    auto sub = ordered_json::array();
    for (const auto& t : r.subgraph) sub.push_back({t[0], t[1], t[2]});
    j["subgraph"] = std::move(sub);
    j["subgraph_size"] = r.subgraph_size;
    for (std::size_t i = 0; i < r.judges.size(); ++i) {
        const auto n = "_" + std::to_string(i + 1);
        const auto& v = r.judges[i];
        j["logical_structure_flag" + n] = v.logical_structure_flag;
        j["logical_structure_reasoning" + n] = v.logical_structure_reasoning;
        j["redundancy_flag" + n] = v.redundancy_flag;
        j["redundancy_reasoning" + n] = v.redundancy_reasoning;
        j["answer_support_flag" + n] = v.answer_support_flag;
        j["answer_support_reasoning" + n] = v.answer_support_reasoning;
        j["answer_adequacy_flag" + n] = v.answer_adequacy_flag;
        j["answer_adequacy_reasoning" + n] = v.answer_adequacy_reasoning;
    }
    j["doc_id"] = r.doc_id;
    return j;
}

DatasetRecord record_from_json(const json& j) {
    if (!j.is_object()) throw DocumentError("record is not a JSON object");
    DatasetRecord r;
    r.id = field<std::string>(j, "id");
    r.question = field<std::string>(j, "question");
    r.answer = field<std::string>(j, "answer");
    r.answer_readable = field<std::string>(j, "answer_readable");
    r.answer_uri = field<std::string>(j, "answer_uri");
    r.supporting_facts = facts_from(j, "supporting_facts");
    r.supporting_facts_uri = facts_from(j, "supporting_facts_uri");
    r.subgraph = facts_from(j, "subgraph");
    r.subgraph_size = field<std::int64_t>(j, "subgraph_size");
    for (std::size_t n = 1; j.contains("logical_structure_flag_" + std::to_string(n)); ++n) {
        const auto s = "_" + std::to_string(n);
        JudgeRecord v;
        v.logical_structure_flag = field<bool>(j, "logical_structure_flag" + s);
        v.logical_structure_reasoning = field<std::string>(j, "logical_structure_reasoning" + s);
        v.redundancy_flag = field<bool>(j, "redundancy_flag" + s);
        v.redundancy_reasoning = field<std::string>(j, "redundancy_reasoning" + s);
        v.answer_support_flag = field<bool>(j, "answer_support_flag" + s);
        v.answer_support_reasoning = field<std::string>(j, "answer_support_reasoning" + s);
        v.answer_adequacy_flag = field<bool>(j, "answer_adequacy_flag" + s);
        v.answer_adequacy_reasoning = field<std::string>(j, "answer_adequacy_reasoning" + s);
        r.judges.push_back(std::move(v));
    }
    r.doc_id = field<std::string>(j, "doc_id");
    return r;
}

std::string record_id(const std::string& doc_id, const std::string& question, const std::string& variant_id) {
    Sha256 h;
    h.field(doc_id).field(text::normalize_question(question)).field(variant_id);
    return h.hex_digest().substr(0, 32);
}

AssembledRecord assemble_record(const QaCandidate& c, const SeedSubgraph& sub, const VerificationOutcome& outcome,
                                const PanelDecision& decision, const std::string& variant_id) {
    if (!outcome.verified) throw std::invalid_argument("candidate was not verified");
    if (!decision.accepted) throw std::invalid_argument("candidate was not accepted by the judge panel");
    if (outcome.matched.size() != c.supporting_path.size()) {
        throw std::invalid_argument("verification outcome does not cover the supporting path");
    }

    AssembledRecord out;
    auto& r = out.record;
    r.id = record_id(c.doc_id, c.question, variant_id);
    r.doc_id = c.doc_id;
    r.question = c.question;
    for (const auto& t : outcome.matched) {
        r.supporting_facts.push_back(triple_labels(sub, t));
        r.supporting_facts_uri.push_back(triple_iris(sub, t));
    }
    r.subgraph = subgraph_dump(sub);
    r.subgraph_size = static_cast<std::int64_t>(sub.size());

    // Prefer the path terminal when the answer names it; otherwise any
    // subgraph entity of that name, smallest id first.
    const SubgraphIndex index(sub);
    const auto named = index.entities_named(c.answer);
    std::optional<EntityId> answer;
    const auto terminal = outcome.matched.back().object_entity();
    if (std::find(named.begin(), named.end(), terminal) != named.end()) {
        answer = terminal;
    } else if (!named.empty()) {
        answer = named.front();
    }
    if (answer) {
        const auto& term = sub.entity(*answer);
        r.answer = std::string(text::local_name(term.iri));
        r.answer_uri = term.iri;
        r.answer_readable = term.label.empty() ? r.answer : term.label;
        out.label_gap = term.label.empty();
    } else {
        r.answer = c.answer;
        r.answer_readable = c.answer;
        out.answer_unresolved = true;
    }

    for (const auto& v : decision.verdicts) {
        JudgeRecord j;
        j.logical_structure_flag = v.question->logical_structure_flag;
        j.logical_structure_reasoning = v.question->logical_structure_reasoning;
        j.redundancy_flag = v.question->redundancy_flag;
        j.redundancy_reasoning = v.question->redundancy_reasoning;
        j.answer_support_flag = v.answer->answer_support_flag;
        j.answer_support_reasoning = v.answer->answer_support_reasoning;
        j.answer_adequacy_flag = v.answer->answer_adequacy_flag;
        j.answer_adequacy_reasoning = v.answer->answer_adequacy_reasoning;
        r.judges.push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------

ordered_json to_json(const VariantManifest& m) {
    ordered_json j;
    j["variant_id"] = m.variant_id;
    j["reorder_seed"] = m.reorder_seed;
    j["temperature"] = m.temperature;
    j["generator_model"] = m.generator_model;
    j["judge_models"] = m.judge_models;
    j["prompt_hashes"] = m.prompt_hashes;
    j["config_hash"] = m.config_hash;
    j["kg_hash"] = m.kg_hash;
    j["counts"] = m.counts;
    j["docs_input"] = m.docs_input;
    j["docs_emitted"] = m.docs_emitted;
    j["stage_drops"] = m.stage_drops;
    j["candidates_generated"] = m.candidates_generated;
    j["candidate_drops"] = m.candidate_drops;
    j["label_gaps"] = m.label_gaps;
    j["unresolved_answers"] = m.unresolved_answers;
    j["doc_ids"] = m.doc_ids;
    return j;
}

VariantManifest manifest_from_json(const json& j) {
    VariantManifest m;
    try {
        m.variant_id = j.at("variant_id").get<std::string>();
        m.reorder_seed = j.at("reorder_seed").get<std::uint64_t>();
        m.temperature = j.at("temperature").get<double>();
        m.generator_model = j.at("generator_model").get<std::string>();
        m.judge_models = j.at("judge_models").get<std::vector<std::string>>();
        m.prompt_hashes = j.at("prompt_hashes").get<std::map<std::string, std::string>>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.kg_hash = j.at("kg_hash").get<std::string>();
        m.counts = j.at("counts").get<std::map<std::string, std::int64_t>>();
        m.docs_input = j.at("docs_input").get<std::int64_t>();
        m.docs_emitted = j.at("docs_emitted").get<std::int64_t>();
        m.stage_drops = j.at("stage_drops").get<std::map<std::string, std::int64_t>>();
        m.candidates_generated = j.at("candidates_generated").get<std::int64_t>();
        m.candidate_drops = j.at("candidate_drops").get<std::map<std::string, std::int64_t>>();
        m.label_gaps = j.at("label_gaps").get<std::vector<std::string>>();
        m.unresolved_answers = j.at("unresolved_answers").get<std::vector<std::string>>();
        m.doc_ids = j.at("doc_ids").get<std::map<std::string, std::vector<std::string>>>();
    } catch (const json::exception& e) {
        throw DocumentError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::string split_path(const std::string& dir, const std::string& variant_id, Split split) {
    return (std::filesystem::path(dir) / (variant_id + "." + std::string(to_string(split)) + ".jsonl")).string();
}

std::string manifest_path(const std::string& dir, const std::string& variant_id) {
    return (std::filesystem::path(dir) / (variant_id + ".manifest.json")).string();
}

void write_split(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::string body;
    for (const auto& r : records) {
        body += to_json(r).dump(-1, ' ', false, json::error_handler_t::strict);
        body += '\n';
    }
    write_text(path, body);
}

std::vector<DatasetRecord> read_split(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<DatasetRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(n, "not valid JSON in '" + path + "'");
        try {
            out.push_back(record_from_json(j));
        } catch (const DocumentError& e) {
            throw ParseError(n, e.what());
        }
    }
    return out;
}

void write_variant(const std::string& dir, DatasetVariant variant) {
    std::filesystem::create_directories(dir);
    auto& m = variant.manifest;
    m.counts.clear();
    for (const auto split : {Split::train, Split::validation, Split::test}) {
        const auto it = variant.records.find(split);
        const auto& records = it == variant.records.end() ? std::vector<DatasetRecord>{} : it->second;
        write_split(split_path(dir, m.variant_id, split), records);
        m.counts[std::string(to_string(split))] = static_cast<std::int64_t>(records.size());
    }
    write_text(manifest_path(dir, m.variant_id), to_json(m).dump(2) + "\n");
}

DatasetVariant read_variant(const std::string& dir, const std::string& variant_id) {
    std::ifstream in(manifest_path(dir, variant_id));
    if (!in) throw IoError("no manifest for variant '" + variant_id + "' in '" + dir + "'");
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DocumentError("manifest for variant '" + variant_id + "' is not valid JSON");
    DatasetVariant v;
    v.manifest = manifest_from_json(j);
    for (const auto split : {Split::train, Split::validation, Split::test}) {
        v.records[split] = read_split(split_path(dir, variant_id, split));
    }
    return v;
}

}  // namespace dkgqa
