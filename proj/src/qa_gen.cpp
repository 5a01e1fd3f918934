#include "dkgqa/qa_gen.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/llm_json.hpp"
#include "dkgqa/random.hpp"
#include "dkgqa/text.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <optional>

namespace dkgqa {

namespace {

using nlohmann::json;

// Strings as-is; numbers and booleans in their JSON spelling.
std::optional<std::string> scalar_text(const json& j) {
    if (j.is_string()) return text::trim(j.get<std::string>());
    if (j.is_number() || j.is_boolean()) return j.dump();
    return std::nullopt;
}

std::string required_text(const json& obj, const char* key, std::size_t index) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw GenerationParseError("qa_pairs[" + std::to_string(index) + "] has no \"" + key + "\"");
    }
    auto value = scalar_text(*it);
    if (!value || value->empty()) {
        throw GenerationParseError("qa_pairs[" + std::to_string(index) + "]." + key + " is empty or not a string");
    }
    return *value;
}

json parse_object(const std::string& text) {
    auto doc = parse_llm_object(text);
    if (!doc) throw GenerationParseError("response contains no parseable JSON object");
    return std::move(*doc);
}

}  // namespace

std::vector<Triple> reorder(const SeedSubgraph& sub, std::uint64_t seed) {
    auto out = sub.triples;
    seeded_shuffle(out, seed);
    return out;
}

std::string format_triple(std::string_view subject, std::string_view predicate, std::string_view object) {
    std::string out;
    out.reserve(subject.size() + predicate.size() + object.size() + 6);
    out += '(';
    out += subject;
    out += ", ";
    out += predicate;
    out += ", ";
    out += object;
    out += ')';
    return out;
}

std::string serialize_triples(const SeedSubgraph& sub, std::span<const Triple> ordered) {
    std::string out;
    for (const auto& t : ordered) {
        if (!out.empty()) out += '\n';
        out += format_triple(sub.entity(t.subject).display(), sub.predicate(t.predicate).display(),
                             sub.entity(t.object_entity()).display());
    }
    return out;
}

std::string serialize_triples(const KnowledgeGraph& kg, std::span<const Triple> ordered) {
    std::string out;
    for (const auto& t : ordered) {
        if (!out.empty()) out += '\n';
        out += format_triple(kg.entity_display(t.subject), kg.predicate_display(t.predicate),
                             kg.object_display(t.object));
    }
    return out;
}

std::string serialize_path(std::span<const PathTriple> path) {
    std::string out;
    for (const auto& p : path) {
        if (!out.empty()) out += '\n';
        out += format_triple(p.subject, p.predicate, p.object);
    }
    return out;
}

GenerationBatch parse_generation_response(const std::string& text, const std::string& doc_id,
                                          const GenerationConfig& cfg) {
    const auto doc = parse_object(text);
    GenerationBatch batch;
    batch.doc_id = doc_id;
    batch.raw_response = text;

    const auto valid_it = doc.find("valid_qa_pairs");
    if (valid_it == doc.end()) throw GenerationParseError("response has no \"valid_qa_pairs\"");
    const auto valid = json_flag(*valid_it);
    if (!valid) throw GenerationParseError("\"valid_qa_pairs\" is not a boolean");
    batch.valid_flag = *valid;
    if (const auto n = doc.find("number_of_qa_pairs"); n != doc.end() && n->is_number_integer()) {
        batch.reported_count = n->get<std::int64_t>();
    } else {
        batch.reported_count = -1;
    }
    if (!batch.valid_flag) return batch;

    const auto pairs_it = doc.find("qa_pairs");
    if (pairs_it == doc.end() || !pairs_it->is_array()) throw GenerationParseError("\"qa_pairs\" is not a list");
    const auto& pairs = *pairs_it;

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (!p.is_object()) throw GenerationParseError("qa_pairs[" + std::to_string(i) + "] is not an object");
        QaCandidate c;
        c.doc_id = doc_id;
        c.config = cfg;
        c.question = required_text(p, "question", i);
        c.answer = required_text(p, "answer", i);
        const auto path = p.find("supporting_path");
        if (path == p.end() || !path->is_array() || path->empty()) {
            throw GenerationParseError("qa_pairs[" + std::to_string(i) + "] has no supporting_path");
        }
        for (const auto& step : *path) {
            if (!step.is_object()) {
                throw GenerationParseError("qa_pairs[" + std::to_string(i) + "] path step is not an object");
            }
            c.supporting_path.push_back(
                {required_text(step, "subject", i), required_text(step, "predicate", i), required_text(step, "object", i)});
        }
        batch.candidates.push_back(std::move(c));
    }

    if (batch.reported_count != static_cast<std::int64_t>(batch.candidates.size())) {
        spdlog::warn("{}: number_of_qa_pairs is {} but {} pairs were returned; using {}", doc_id,
                     batch.reported_count, batch.candidates.size(), batch.candidates.size());
        batch.count_corrected = true;
    }
    if (cfg.max_pairs != 0 && batch.candidates.size() > cfg.max_pairs) {
        spdlog::warn("{}: keeping the first {} of {} pairs", doc_id, cfg.max_pairs, batch.candidates.size());
        batch.candidates.resize(cfg.max_pairs);
        batch.truncated = true;
    }
    return batch;
}

GenerationBatch generate_qa(const SeedSubgraph& sub, const GenerationConfig& cfg, LlmGateway& gateway,
                            const PromptSet& prompts) {
    const auto ordered = reorder(sub, cfg.reorder_seed);
    const auto prompt = prompts.generate.render({{"triples_str", serialize_triples(sub, ordered)}});
    const ChatRequest request{prompt.system, prompt.user, cfg.temperature, cfg.max_output_tokens, cfg.model_id};

    constexpr int kAttempts = 2;
    for (int attempt = 1;; ++attempt) {
        const auto response = gateway.complete(request);
        try {
            auto batch = parse_generation_response(response.text, sub.doc_id, cfg);
            batch.attempts = attempt;
            return batch;
        } catch (const GenerationParseError& e) {
            if (attempt >= kAttempts) throw;
            spdlog::warn("{}: unparseable generation response ({}); retrying once", sub.doc_id, e.what());
        }
    }
}

}  // namespace dkgqa
