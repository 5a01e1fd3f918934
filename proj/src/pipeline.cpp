#include "dkgqa/pipeline.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/hashing.hpp"
#include "dkgqa/judge.hpp"
#include "dkgqa/mock_llm.hpp"
#include "dkgqa/qa_gen.hpp"
#include "dkgqa/text.hpp"
#include "dkgqa/verifier.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace dkgqa {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void write_atomically(const std::string& path, const std::string& body) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    const auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out << body;
        if (!out.flush()) throw IoError("write to '" + tmp + "' failed");
    }
    fs::rename(tmp, path);
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        fn(n, line);
    }
}

std::string string_field(const json& j, const std::string& key, std::size_t line) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, "missing \"" + key + "\"");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    throw ParseError(line, "\"" + key + "\" is not a string");
}

Split split_field(const json& j, const std::string& key, std::size_t line) {
    const auto name = string_field(j, key, line);
    const auto split = parse_split(name);
    if (!split) throw ParseError(line, "unknown split '" + name + "'");
    return *split;
}

void hash_file(Sha256& h, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<char> buf(1 << 16);
    std::uint64_t total = 0;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        h.update(std::string_view(buf.data(), got));
        total += got;
    }
    h.field(std::to_string(total));
}

std::string drop_stage(const std::exception& e) {
    if (dynamic_cast<const EmptySeedError*>(&e)) return "no_seed_entities";
    if (dynamic_cast<const SubgraphTooSmallError*>(&e)) return "subgraph_too_small";
    if (dynamic_cast<const SubgraphTooLargeError*>(&e)) return "subgraph_too_large";
    return "subgraph_failed";
}

std::string config_hash(const PipelineConfig& cfg, const std::string& kg_hash, const PromptSet& prompts) {
    // Only settings that change the output; paths, workers and credentials do not.
    ordered_json j;
    j["kg_hash"] = kg_hash;
    j["generator_model"] = cfg.generator_model;
    j["temperature"] = cfg.temperature;
    j["reorder_seed"] = cfg.reorder_seed;
    j["max_pairs"] = cfg.max_pairs;
    j["max_output_tokens"] = cfg.max_output_tokens;
    j["judge_models"] = cfg.judge_models;
    j["judge_max_output_tokens"] = cfg.judge_max_output_tokens;
    j["min_triples"] = cfg.min_triples;
    j["max_triples"] = cfg.max_triples;
    j["max_mentions"] = cfg.max_mentions;
    j["strip_diacritics"] = cfg.strip_diacritics;
    j["prompts"] = prompts.hashes();
    j["provider"] = cfg.provider;
    return sha256_hex(j.dump());
}

struct DocOutcome {
    std::vector<AssembledRecord> records;
    std::string drop;
    std::int64_t generated = 0;
    std::map<std::string, std::int64_t> candidate_drops;
};

DocOutcome process_document(const SeedSubgraph& sub, const GenerationConfig& gcfg, LlmGateway& gateway,
                            const PromptSet& prompts, const JudgePanel& panel, const std::string& variant_id) {
    DocOutcome out;
    GenerationBatch batch;
    try {
        batch = generate_qa(sub, gcfg, gateway, prompts);
    } catch (const GenerationParseError& e) {
        spdlog::warn("{}: dropped, generation response unusable: {}", sub.doc_id, e.what());
        out.drop = "generation_unparseable";
        return out;
    } catch (const TransientFailureError& e) {
        spdlog::warn("{}: dropped, provider unavailable: {}", sub.doc_id, e.what());
        out.drop = "provider_unavailable";
        return out;
    }
    if (!batch.valid_flag || batch.candidates.empty()) {
        out.drop = "no_qa_pairs";
        return out;
    }

    const SubgraphIndex index(sub);
    for (const auto& c : batch.candidates) {
        ++out.generated;
        const auto outcome = verify_path(c, index);
        if (!outcome.verified) {
            spdlog::debug("{}: unverified at step {} ({}): {}", sub.doc_id, outcome.failures.front().position,
                          to_string(outcome.failures.front().reason), c.question);
            ++out.candidate_drops["unverified"];
            continue;
        }
        const auto decision = panel.evaluate(c);
        if (!decision.accepted) {
            spdlog::debug("{}: rejected ({}): {}", sub.doc_id, decision.rejection_causes.front(), c.question);
            ++out.candidate_drops["judge_rejected"];
            continue;
        }
        out.records.push_back(assemble_record(c, sub, outcome, decision, variant_id));
    }
    if (out.records.empty()) out.drop = "no_accepted_pairs";
    return out;
}

}  // namespace

// --- corpus ----------------------------------------------------------------------

std::vector<SeedDocument> read_corpus(const std::string& path) {
    std::vector<SeedDocument> docs;
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(n, "corpus line is not a JSON object");
        docs.push_back({string_field(j, "doc_id", n), string_field(j, "text", n), split_field(j, "split", n)});
    });
    std::set<std::string> seen;
    for (const auto& d : docs) {
        if (!seen.insert(d.doc_id).second) throw ConfigError("corpus '" + path + "' repeats doc_id '" + d.doc_id + "'");
    }
    return docs;
}

void write_corpus(const std::string& path, const std::vector<SeedDocument>& docs) {
    std::string body;
    for (const auto& d : docs) {
        ordered_json j;
        j["doc_id"] = d.doc_id;
        j["text"] = d.text;
        j["split"] = std::string(to_string(d.split));
        body += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
    write_atomically(path, body);
}

std::string clean_wiki40b(std::string_view raw) {
    std::string s(raw);
    if (s.size() >= 3 && s[0] == 'b' && (s[1] == '\'' || s[1] == '"') && s.back() == s[1]) {
        s = s.substr(2, s.size() - 3);
    }
    std::string out;
    std::size_t pos = 0;
    const auto paragraph_break = [&out] {
        while (!out.empty() && (out.back() == ' ' || out.back() == '\n')) out.pop_back();
        if (!out.empty()) out += "\n";
    };
    while (pos < s.size()) {
        if (s.compare(pos, 15, "_START_ARTICLE_") == 0) {
            pos += 15;
            paragraph_break();
        } else if (s.compare(pos, 15, "_START_SECTION_") == 0) {
            pos += 15;
            paragraph_break();
        } else if (s.compare(pos, 17, "_START_PARAGRAPH_") == 0) {
            pos += 17;
            paragraph_break();
        } else if (s.compare(pos, 9, "_NEWLINE_") == 0) {
            pos += 9;
            paragraph_break();
        } else if (s.compare(pos, 2, "\\n") == 0) {
            pos += 2;
            paragraph_break();
        } else {
            const char c = s[pos++];
            if (c == '\n') {
                paragraph_break();
            } else if (!(out.empty() && c == ' ') && !(c == ' ' && !out.empty() && out.back() == '\n')) {
                out += c;
            }
        }
    }
    return text::trim(out);
}

std::vector<SeedDocument> import_corpus(const std::string& path, const CorpusImportOptions& options) {
    std::vector<SeedDocument> docs;
    const auto split_for = [&](const json& j, std::size_t n) {
        if (options.split) return *options.split;
        if (!j.is_null() && j.contains(options.split_field)) return split_field(j, options.split_field, n);
        throw ConfigError("input has no split field; pass a split explicitly");
    };
    std::map<std::string, int> id_uses;
    const auto unique_id = [&id_uses](std::string id) {
        const int k = id_uses[id]++;
        return k == 0 ? id : id + "#" + std::to_string(k);
    };
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        if (options.format == CorpusFormat::lines) {
            docs.push_back({options.id_prefix + "-" + std::to_string(docs.size() + 1), text::trim(line),
                            split_for(json(), n)});
            return;
        }
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(n, "input line is not a JSON object");
        if (options.format == CorpusFormat::wiki40b) {
            const auto id_key = j.contains("wikidata_id") ? std::string("wikidata_id") : options.id_field;
            docs.push_back({unique_id(string_field(j, id_key, n)), clean_wiki40b(string_field(j, "text", n)),
                            split_for(j, n)});
        } else {
            docs.push_back({unique_id(string_field(j, options.id_field, n)), string_field(j, options.text_field, n),
                            split_for(j, n)});
        }
    });
    return docs;
}

// --- subgraph cache ------------------------------------------------------------------

std::string kg_fingerprint(const std::string& kg_path, const std::string& labels_path) {
    Sha256 h;
    hash_file(h, kg_path);
    if (!labels_path.empty()) hash_file(h, labels_path);
    return h.hex_digest();
}

ordered_json subgraph_to_json(const SeedSubgraph& sub) {
    ordered_json j;
    j["doc_id"] = sub.doc_id;
    j["split"] = std::string(to_string(sub.split));
    auto triples = ordered_json::array();
    for (const auto& t : sub.triples) triples.push_back({t.subject.value, t.predicate.value, t.object_entity().value});
    j["triples"] = std::move(triples);
    auto ids = [](const auto& v) {
        auto a = ordered_json::array();
        for (const auto& x : v) a.push_back(x.value);
        return a;
    };
    j["entities"] = ids(sub.entities);
    j["predicates"] = ids(sub.predicates);
    j["seeds_retained"] = ids(sub.seeds_retained);
    auto terms = [](const auto& m) {
        auto a = ordered_json::array();
        for (const auto& [id, term] : m) a.push_back({id.value, term.iri, term.label});
        return a;
    };
    j["entity_terms"] = terms(sub.entity_terms);
    j["predicate_terms"] = terms(sub.predicate_terms);
    return j;
}

SeedSubgraph subgraph_from_json(const json& j) {
    SeedSubgraph sub;
    try {
        sub.doc_id = j.at("doc_id").get<std::string>();
        const auto split = parse_split(j.at("split").get<std::string>());
        if (!split) throw DocumentError("cached subgraph has an unknown split");
        sub.split = *split;
        for (const auto& t : j.at("triples")) {
            sub.triples.push_back({EntityId{t.at(0).get<std::uint32_t>()}, PredicateId{t.at(1).get<std::uint32_t>()},
                                   EntityId{t.at(2).get<std::uint32_t>()}});
        }
        for (const auto& v : j.at("entities")) sub.entities.push_back(EntityId{v.get<std::uint32_t>()});
        for (const auto& v : j.at("predicates")) sub.predicates.push_back(PredicateId{v.get<std::uint32_t>()});
        for (const auto& v : j.at("seeds_retained")) sub.seeds_retained.push_back(EntityId{v.get<std::uint32_t>()});
        for (const auto& t : j.at("entity_terms")) {
            sub.entity_terms.emplace(EntityId{t.at(0).get<std::uint32_t>()},
                                     TermInfo{t.at(1).get<std::string>(), t.at(2).get<std::string>()});
        }
        for (const auto& t : j.at("predicate_terms")) {
            sub.predicate_terms.emplace(PredicateId{t.at(0).get<std::uint32_t>()},
                                        TermInfo{t.at(1).get<std::string>(), t.at(2).get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw DocumentError(std::string("malformed cached subgraph: ") + e.what());
    }
    return sub;
}

std::string cache_file(const std::string& cache_dir, const std::string& kg_hash) {
    return (fs::path(cache_dir) / ("subgraphs-" + kg_hash.substr(0, 16) + ".jsonl")).string();
}

void write_cache(const std::string& cache_dir, const SubgraphCache& cache) {
    std::string body;
    for (const auto& e : cache.entries) {
        ordered_json j;
        j["key"] = Sha256().field(e.doc_id).field(cache.kg_hash).hex_digest();
        j["doc_id"] = e.doc_id;
        j["split"] = std::string(to_string(e.split));
        j["status"] = e.status;
        if (e.subgraph) j["subgraph"] = subgraph_to_json(*e.subgraph);
        body += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
    write_atomically(cache_file(cache_dir, cache.kg_hash), body);
}

SubgraphCache read_cache(const std::string& cache_dir, const std::string& kg_hash) {
    const auto path = cache_file(cache_dir, kg_hash);
    if (!fs::exists(path)) {
        throw IoError("no subgraph cache for this knowledge graph in '" + cache_dir +
                      "'; run `dkgqa generate` with the same configuration first");
    }
    SubgraphCache cache;
    cache.kg_hash = kg_hash;
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(n, "cache line is not valid JSON");
        CacheEntry e;
        e.doc_id = string_field(j, "doc_id", n);
        e.split = split_field(j, "split", n);
        e.status = string_field(j, "status", n);
        if (j.at("key").get<std::string>() != Sha256().field(e.doc_id).field(kg_hash).hex_digest()) {
            throw ParseError(n, "cache entry key does not match its document and knowledge graph");
        }
        if (e.status == "ok") e.subgraph = subgraph_from_json(j.at("subgraph"));
        cache.entries.push_back(std::move(e));
    });
    return cache;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed) {
                const auto i = next++;
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

SubgraphCache build_subgraphs(const KnowledgeGraph& kg, const std::vector<SeedDocument>& docs,
                              const PipelineConfig& cfg, const std::string& kg_hash) {
    const DictionaryLinker linker(kg, LinkerOptions{cfg.strip_diacritics, cfg.max_mentions});
    const SubgraphOptions options{cfg.min_triples, cfg.max_triples};
    SubgraphCache cache;
    cache.kg_hash = kg_hash;
    cache.entries.resize(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
        auto& e = cache.entries[i];
        e.doc_id = docs[i].doc_id;
        e.split = docs[i].split;
        try {
            e.subgraph = build_seed_subgraph(kg, linker, docs[i], options);
        } catch (const DocumentError& err) {
            e.status = drop_stage(err);
            spdlog::debug("{}: dropped at subgraph stage: {}", docs[i].doc_id, err.what());
        }
    });
    return cache;
}

// --- generation -------------------------------------------------------------------------

PromptSet load_prompts(const PipelineConfig& cfg) {
    return cfg.prompts_dir.empty() ? PromptSet::embedded() : PromptSet::load(cfg.prompts_dir);
}

std::shared_ptr<ChatProvider> make_provider(const PipelineConfig& cfg, const PromptSet& prompts) {
    if (cfg.provider == "mock") {
        auto mock = std::make_shared<MockProvider>(synthetic_responder(prompts));
        if (!cfg.mock_fixtures.empty()) mock->load_fixtures(cfg.mock_fixtures);
        return mock;
    }
    if (cfg.provider == "openai") {
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + cfg.api_key_env + " holds no API key");
        }
        return std::make_shared<OpenAiCompatibleProvider>(
            OpenAiProviderConfig{cfg.base_url, key, std::chrono::seconds(cfg.timeout_seconds)});
    }
    throw ConfigError("unknown provider '" + cfg.provider + "'");
}

GatewayConfig gateway_config(const PipelineConfig& cfg) {
    GatewayConfig g;
    g.retry.max_retries = cfg.max_retries;
    g.requests_per_minute = cfg.requests_per_minute;
    g.burst = cfg.burst;
    return g;
}

DatasetVariant generate_variant(const SubgraphCache& cache, const PipelineConfig& cfg, LlmGateway& gateway,
                                const PromptSet& prompts) {
    const auto variant_id = cfg.effective_variant_id();
    GenerationConfig gcfg;
    gcfg.temperature = cfg.temperature;
    gcfg.reorder_seed = cfg.reorder_seed;
    gcfg.model_id = cfg.generator_model;
    gcfg.max_output_tokens = cfg.max_output_tokens;
    gcfg.max_pairs = cfg.max_pairs;
    const JudgePanel panel(gateway, cfg.judge_models, prompts, cfg.judge_max_output_tokens);

    std::vector<DocOutcome> outcomes(cache.entries.size());
    parallel_for(cache.entries.size(), cfg.workers, [&](std::size_t i) {
        const auto& e = cache.entries[i];
        if (!e.subgraph) {
            outcomes[i].drop = e.status;
            return;
        }
        outcomes[i] = process_document(*e.subgraph, gcfg, gateway, prompts, panel, variant_id);
    });

    DatasetVariant v;
    auto& m = v.manifest;
    m.variant_id = variant_id;
    m.reorder_seed = cfg.reorder_seed;
    m.temperature = cfg.temperature;
    m.generator_model = cfg.generator_model;
    m.judge_models = cfg.judge_models;
    m.prompt_hashes = prompts.hashes();
    m.config_hash = config_hash(cfg, cache.kg_hash, prompts);
    m.kg_hash = cache.kg_hash;
    m.docs_input = static_cast<std::int64_t>(cache.entries.size());
    for (const auto split : {Split::train, Split::validation, Split::test}) {
        v.records[split];
        m.doc_ids[std::string(to_string(split))];
    }

    std::set<std::string> ids;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& e = cache.entries[i];
        auto& o = outcomes[i];
        if (e.subgraph) m.doc_ids[std::string(to_string(e.split))].push_back(e.doc_id);
        m.candidates_generated += o.generated;
        for (const auto& [stage, n] : o.candidate_drops) m.candidate_drops[stage] += n;
        if (!o.drop.empty()) {
            ++m.stage_drops[o.drop];
            continue;
        }
        ++m.docs_emitted;
        for (auto& a : o.records) {
            if (!ids.insert(a.record.id).second) {
                ++m.candidate_drops["duplicate_question"];
                continue;
            }
            if (a.label_gap) m.label_gaps.push_back(a.record.id);
            if (a.answer_unresolved) m.unresolved_answers.push_back(a.record.id);
            v.records[e.split].push_back(std::move(a.record));
        }
    }
    for (const auto& [split, records] : v.records) m.counts[std::string(to_string(split))] = std::ssize(records);

    std::int64_t emitted = 0;
    for (const auto& [split, n] : m.counts) emitted += n;
    spdlog::info("{}: {} documents in, {} contributed records; {} candidates, {} records", variant_id, m.docs_input,
                 m.docs_emitted, m.candidates_generated, emitted);
    for (const auto& [stage, n] : m.stage_drops) spdlog::info("  documents dropped at {}: {}", stage, n);
    for (const auto& [stage, n] : m.candidate_drops) spdlog::info("  candidates dropped at {}: {}", stage, n);
    if (emitted == 0) spdlog::warn("{}: no records were produced", variant_id);
    return v;
}

DatasetVariant cmd_generate(const PipelineConfig& cfg) {
    cfg.validate_for_generation();
    const auto prompts = load_prompts(cfg);
    auto provider = make_provider(cfg, prompts);
    const auto kg_hash = kg_fingerprint(cfg.kg_path, cfg.labels_path);

    ParseOptions popts;
    popts.malformed = cfg.malformed;
    auto kg = parse_ntriples_file(cfg.kg_path, popts);
    if (!cfg.labels_path.empty()) {
        std::ifstream labels(cfg.labels_path);
        if (!labels) throw IoError("cannot open label file '" + cfg.labels_path + "'");
        kg.load_labels(labels);
    }
    kg.enable_label_index();
    spdlog::info("knowledge graph: {} triples, {} entities", kg.triple_count(), kg.entity_count());

    const auto docs = read_corpus(cfg.corpus_path);
    const auto cache = build_subgraphs(kg, docs, cfg, kg_hash);
    write_cache(cfg.effective_cache_dir(), cache);
    const auto linked = std::count_if(cache.entries.begin(), cache.entries.end(),
                                      [](const CacheEntry& e) { return e.subgraph.has_value(); });
    if (linked == 0) spdlog::warn("no document of the corpus produced a usable subgraph");

    LlmGateway gateway(std::move(provider), gateway_config(cfg));
    auto variant = generate_variant(cache, cfg, gateway, prompts);
    write_variant(cfg.output_dir, variant);
    return read_variant(cfg.output_dir, variant.manifest.variant_id);
}

DatasetVariant cmd_variant(const PipelineConfig& cfg) {
    if (cfg.kg_path.empty() || !fs::is_regular_file(cfg.kg_path)) {
        throw ConfigError("'kg.path' must name the knowledge graph the cache was built from");
    }
    if (!cfg.labels_path.empty() && !fs::is_regular_file(cfg.labels_path)) {
        throw ConfigError("'kg.labels': no such file '" + cfg.labels_path + "'");
    }
    if (cfg.judge_models.empty()) throw ConfigError("'judges.models' must name at least one judge");
    const auto prompts = load_prompts(cfg);
    const auto cache = read_cache(cfg.effective_cache_dir(), kg_fingerprint(cfg.kg_path, cfg.labels_path));
    LlmGateway gateway(make_provider(cfg, prompts), gateway_config(cfg));
    auto variant = generate_variant(cache, cfg, gateway, prompts);
    write_variant(cfg.output_dir, variant);
    return read_variant(cfg.output_dir, variant.manifest.variant_id);
}

// --- checks and analysis ------------------------------------------------------------------

VerifyReport verify_variant(const DatasetVariant& variant, const SubgraphCache* cache) {
    std::map<std::string, const SeedSubgraph*> cached;
    if (cache != nullptr) {
        for (const auto& e : cache->entries) {
            if (e.subgraph) cached.emplace(e.doc_id, &*e.subgraph);
        }
    }
    VerifyReport report;
    for (const auto& [split, records] : variant.records) {
        for (const auto& r : records) {
            ++report.checked;
            const auto fail = [&](const std::string& why) { report.failures.push_back(r.id + ": " + why); };
            const std::set<TripleStrings> stored(r.subgraph.begin(), r.subgraph.end());
            if (r.subgraph_size != std::ssize(r.subgraph)) fail("subgraph_size disagrees with the subgraph");
            if (r.supporting_facts.size() != r.supporting_facts_uri.size()) {
                fail("supporting_facts and supporting_facts_uri differ in length");
            }
            if (r.supporting_facts_uri.empty()) fail("no supporting facts");
            for (const auto& f : r.supporting_facts_uri) {
                if (!stored.contains(f)) fail("supporting fact (" + f[0] + ", " + f[1] + ", " + f[2] + ") is not in the subgraph");
            }
            if (cache == nullptr) continue;
            const auto it = cached.find(r.doc_id);
            if (it == cached.end()) {
                fail("document " + r.doc_id + " has no cached subgraph");
                continue;
            }
            if (subgraph_dump(*it->second) != r.subgraph) fail("subgraph differs from the cached one");
            QaCandidate c;
            c.doc_id = r.doc_id;
            c.question = r.question;
            c.answer = r.answer_readable;
            for (const auto& f : r.supporting_facts_uri) c.supporting_path.push_back({f[0], f[1], f[2]});
            if (!verify_path(c, *it->second).verified) fail("supporting path does not verify against the cached subgraph");
        }
    }
    return report;
}

stats::RunView run_view(const DatasetVariant& variant) {
    stats::RunView view;
    view.variant_id = variant.manifest.variant_id;
    for (const auto& [split, ids] : variant.manifest.doc_ids) {
        view.doc_ids.insert(view.doc_ids.end(), ids.begin(), ids.end());
    }
    for (const auto& [split, records] : variant.records) {
        for (const auto& r : records) {
            QaCandidate c;
            c.doc_id = r.doc_id;
            c.question = r.question;
            c.answer = r.answer_readable;
            for (const auto& f : r.supporting_facts) c.supporting_path.push_back({f[0], f[1], f[2]});
            view.items.push_back(std::move(c));
        }
    }
    return view;
}

std::unique_ptr<stats::TopicLabeler> make_labeler(const PipelineConfig& cfg) {
    if (!cfg.topic_table.empty()) {
        return std::make_unique<stats::TableTopicLabeler>(stats::TableTopicLabeler::from_tsv(cfg.topic_table));
    }
    return std::make_unique<stats::KeywordTopicLabeler>();
}

std::vector<stats::RunComparison> compare_variants(const std::vector<DatasetVariant>& variants,
                                                   const stats::TopicLabeler& labeler,
                                                   const stats::ClassifyOptions& opts) {
    if (variants.size() < 2) throw ConfigError("a consistency analysis needs at least two variants");
    std::vector<stats::RunView> views;
    for (const auto& v : variants) views.push_back(run_view(v));
    std::vector<stats::RunComparison> out;
    for (std::size_t i = 0; i < views.size(); ++i) {
        for (std::size_t j = i + 1; j < views.size(); ++j) out.push_back(stats::compare_runs(views[i], views[j], labeler, opts));
    }
    return out;
}

ordered_json variant_stats(const DatasetVariant& variant, const stats::TopicLabeler& labeler) {
    const auto& m = variant.manifest;
    ordered_json j;
    j["variant_id"] = m.variant_id;
    j["counts"] = m.counts;
    j["docs_input"] = m.docs_input;
    j["docs_emitted"] = m.docs_emitted;
    j["stage_drops"] = m.stage_drops;
    j["candidates_generated"] = m.candidates_generated;
    j["candidate_drops"] = m.candidate_drops;

    std::int64_t n = 0, subgraph_total = 0, path_total = 0;
    std::size_t judges = 0;
    for (const auto& [split, records] : variant.records) {
        for (const auto& r : records) {
            ++n;
            subgraph_total += r.subgraph_size;
            path_total += std::ssize(r.supporting_facts);
            judges = std::max(judges, r.judges.size());
        }
    }
    j["records"] = n;
    j["mean_subgraph_size"] = n == 0 ? 0.0 : static_cast<double>(subgraph_total) / static_cast<double>(n);
    j["mean_path_length"] = n == 0 ? 0.0 : static_cast<double>(path_total) / static_cast<double>(n);
    j["acceptance_rate"] =
        m.candidates_generated == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(m.candidates_generated);
    j["label_gaps"] = m.label_gaps.size();
    j["unresolved_answers"] = m.unresolved_answers.size();

    const auto view = run_view(variant);
    const auto topics = stats::topic_distribution(view.items, labeler);
    ordered_json t;
    for (std::size_t i = 0; i < topics.labels.size(); ++i) t[topics.labels[i]] = topics.counts[i];
    j["topics"] = std::move(t);
    j["judges"] = judges;
    return j;
}

}  // namespace dkgqa
