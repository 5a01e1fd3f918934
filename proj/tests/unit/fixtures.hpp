#pragma once

#include "dkgqa/kg_store.hpp"
#include "dkgqa/subgraph.hpp"

#include <algorithm>
#include <tuple>

#include <sstream>
#include <string>

namespace dkgqa::testing {

inline KnowledgeGraph kg_from(const std::string& ntriples, const std::string& labels = {}) {
    std::istringstream in(ntriples);
    auto kg = parse_ntriples(in, ParseOptions{.malformed = MalformedLinePolicy::fail_fast});
    if (!labels.empty()) {
        std::istringstream lab(labels);
        kg.load_labels(lab);
    }
    kg.enable_label_index();
    return kg;
}

inline EntityId ent(const KnowledgeGraph& kg, const std::string& local) {
    return kg.find_entity("http://x/" + local).value();
}

inline std::string stmt(const std::string& s, const std::string& p, const std::string& o) {
    return "<http://x/" + s + "> <http://x/" + p + "> <http://x/" + o + "> .\n";
}

// Every entity-to-entity triple of `kg` as one subgraph, assembled directly
// rather than through the extraction pipeline.
inline SeedSubgraph subgraph_of(const KnowledgeGraph& kg, const std::string& doc_id = "doc") {
    SeedSubgraph sub;
    sub.doc_id = doc_id;
    for (const auto& t : kg.triples()) {
        if (!t.has_entity_object()) continue;
        sub.triples.push_back(t);
        for (const auto e : {t.subject, t.object_entity()}) {
            const auto label = kg.entity_label(e);
            sub.entity_terms.emplace(e, TermInfo{kg.entity_iri(e), label ? std::string(*label) : std::string()});
        }
        const auto label = kg.predicate_label(t.predicate);
        sub.predicate_terms.emplace(t.predicate,
                                    TermInfo{kg.predicate_iri(t.predicate), label ? std::string(*label) : std::string()});
    }
    for (const auto& [e, term] : sub.entity_terms) sub.entities.push_back(e);
    for (const auto& [p, term] : sub.predicate_terms) sub.predicates.push_back(p);
    std::sort(sub.triples.begin(), sub.triples.end(), [&kg](const Triple& a, const Triple& b) {
        return std::tie(kg.entity_iri(a.subject), kg.predicate_iri(a.predicate), kg.entity_iri(a.object_entity())) <
               std::tie(kg.entity_iri(b.subject), kg.predicate_iri(b.predicate), kg.entity_iri(b.object_entity()));
    });
    return sub;
}

}  // namespace dkgqa::testing
