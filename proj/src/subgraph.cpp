#include "dkgqa/subgraph.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/steiner.hpp"
#include "dkgqa/text.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace dkgqa {

namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Dense local numbering of the entities of a triple set.
struct LocalIndex {
    std::vector<EntityId> entities;
    std::unordered_map<std::uint32_t, std::uint32_t> local;

    explicit LocalIndex(const std::vector<EntityId>& sorted_entities) : entities(sorted_entities) {
        local.reserve(entities.size());
        for (std::uint32_t i = 0; i < entities.size(); ++i) local.emplace(entities[i].value, i);
    }
    std::uint32_t operator[](EntityId e) const { return local.at(e.value); }
};

}  // namespace

std::string TermInfo::display() const {
    if (!label.empty()) return label;
    return std::string(text::local_name(iri));
}

const TermInfo& SeedSubgraph::entity(EntityId id) const {
    const auto it = entity_terms.find(id);
    if (it == entity_terms.end()) throw LookupError("entity " + std::to_string(id.value) + " is not in the subgraph");
    return it->second;
}

const TermInfo& SeedSubgraph::predicate(PredicateId id) const {
    const auto it = predicate_terms.find(id);
    if (it == predicate_terms.end()) {
        throw LookupError("predicate " + std::to_string(id.value) + " is not in the subgraph");
    }
    return it->second;
}

ExpandedGraph expand_one_hop(const KnowledgeGraph& kg, const SeedEntitySet& seeds) {
    if (seeds.entities.empty()) throw EmptySeedError("document '" + seeds.doc_id + "' has no seed entities");
    ExpandedGraph g;
    g.seeds = seeds;
    for (const auto seed : seeds.entities) {
        for (const auto& t : kg.neighbors(seed)) {
            if (t.has_entity_object()) {
                g.triples.push_back(t);
            } else {
                g.literal_triples.push_back(t);
            }
        }
    }
    sort_unique(g.triples);
    sort_unique(g.literal_triples);
    for (const auto& t : g.triples) {
        g.entities.push_back(t.subject);
        g.entities.push_back(t.object_entity());
        g.predicates.push_back(t.predicate);
    }
    sort_unique(g.entities);
    sort_unique(g.predicates);
    return g;
}

SteinerResult steiner_tree(const KnowledgeGraph& kg, const ExpandedGraph& g) {
    SteinerResult result;
    if (g.triples.empty()) return result;
    const LocalIndex index(g.entities);

    // Collapse parallel triples into one undirected edge per entity pair.
    auto rank_key = [&kg](const Triple& t) {
        return std::tuple<const std::string&, const std::string&, const std::string&>(
            kg.predicate_iri(t.predicate), kg.entity_iri(t.subject), kg.entity_iri(t.object_entity()));
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> pair_rep;
    for (std::size_t i = 0; i < g.triples.size(); ++i) {
        const auto& t = g.triples[i];
        const auto a = index[t.subject];
        const auto b = index[t.object_entity()];
        if (a == b) continue;
        const auto key = std::minmax(a, b);
        auto [it, inserted] = pair_rep.try_emplace({key.first, key.second}, i);
        if (!inserted && rank_key(t) < rank_key(g.triples[it->second])) it->second = i;
    }
    std::vector<graph::Edge> edges;
    std::vector<std::size_t> edge_triple;
    edges.reserve(pair_rep.size());
    for (const auto& [key, triple_index] : pair_rep) {
        edges.push_back({key.first, key.second});
        edge_triple.push_back(triple_index);
    }

    std::vector<std::uint32_t> terminals;
    for (const auto seed : g.seeds.entities) {
        if (const auto it = index.local.find(seed.value); it != index.local.end()) terminals.push_back(it->second);
    }

    const auto chosen = graph::mehlhorn_steiner(index.entities.size(), edges, terminals);
    std::vector<graph::Edge> tree_edges;
    for (const auto ei : chosen) {
        tree_edges.push_back(edges[ei]);
        result.tree_triples.push_back(g.triples[edge_triple[ei]]);
    }
    std::sort(result.tree_triples.begin(), result.tree_triples.end());

    const auto labels = graph::component_labels(index.entities.size(), tree_edges);
    std::map<std::uint32_t, SteinerComponent> by_label;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        auto& comp = by_label[labels[tree_edges[k].u]];
        comp.triples.push_back(g.triples[edge_triple[chosen[k]]]);
        comp.entities.push_back(index.entities[tree_edges[k].u]);
        comp.entities.push_back(index.entities[tree_edges[k].v]);
    }
    for (auto& [label, comp] : by_label) {
        std::sort(comp.triples.begin(), comp.triples.end());
        sort_unique(comp.entities);
        for (const auto e : comp.entities) {
            if (g.seeds.contains(e)) comp.terminals.push_back(e);
        }
        result.terminals_covered.insert(result.terminals_covered.end(), comp.terminals.begin(), comp.terminals.end());
        result.components.push_back(std::move(comp));
    }
    sort_unique(result.terminals_covered);
    std::sort(result.components.begin(), result.components.end(),
              [](const SteinerComponent& a, const SteinerComponent& b) { return a.entities.front() < b.entities.front(); });
    return result;
}

SeedSubgraph largest_component(const KnowledgeGraph& kg, const SteinerResult& s, const SeedEntitySet& seeds,
                               const SubgraphOptions& options) {
    if (s.components.empty()) {
        throw SubgraphTooSmallError("document '" + seeds.doc_id + "' has no connected seed component");
    }
    const SteinerComponent* best = nullptr;
    for (const auto& c : s.components) {
        if (best == nullptr) {
            best = &c;
            continue;
        }
        const auto key = [](const SteinerComponent& x) {
            // Larger is better on the first two, smaller is better on the last.
            return std::tuple<std::size_t, std::size_t, std::int64_t>(x.entities.size(), x.terminals.size(),
                                                                      -static_cast<std::int64_t>(x.entities.front().value));
        };
        if (key(c) > key(*best)) best = &c;
    }
    if (best->triples.size() < options.min_triples) {
        throw SubgraphTooSmallError("document '" + seeds.doc_id + "': largest component has " +
                                    std::to_string(best->triples.size()) + " triple(s), minimum is " +
                                    std::to_string(options.min_triples));
    }

    SeedSubgraph sub;
    sub.doc_id = seeds.doc_id;
    sub.triples = best->triples;
    sub.entities = best->entities;
    for (const auto& t : sub.triples) sub.predicates.push_back(t.predicate);
    sort_unique(sub.predicates);
    for (const auto e : sub.entities) {
        if (seeds.contains(e)) sub.seeds_retained.push_back(e);
        auto label = kg.entity_label(e);
        sub.entity_terms.emplace(e, TermInfo{kg.entity_iri(e), label ? std::string(*label) : std::string()});
    }
    for (const auto p : sub.predicates) {
        auto label = kg.predicate_label(p);
        sub.predicate_terms.emplace(p, TermInfo{kg.predicate_iri(p), label ? std::string(*label) : std::string()});
    }
    std::sort(sub.triples.begin(), sub.triples.end(), [&sub](const Triple& a, const Triple& b) {
        const auto ka = std::tie(sub.entity(a.subject).iri, sub.predicate(a.predicate).iri,
                                 sub.entity(a.object_entity()).iri);
        const auto kb = std::tie(sub.entity(b.subject).iri, sub.predicate(b.predicate).iri,
                                 sub.entity(b.object_entity()).iri);
        return ka < kb;
    });
    return sub;
}

SeedSubgraph build_seed_subgraph(const KnowledgeGraph& kg, const EntityLinker& linker, const SeedDocument& doc,
                                 const SubgraphOptions& options) {
    const auto seeds = linker.link(doc);
    const auto expanded = expand_one_hop(kg, seeds);
    const auto tree = steiner_tree(kg, expanded);
    auto sub = largest_component(kg, tree, seeds, options);
    sub.split = doc.split;
    if (options.max_triples != 0 && sub.size() > options.max_triples) {
        throw SubgraphTooLargeError("document '" + doc.doc_id + "': subgraph has " + std::to_string(sub.size()) +
                                    " triples, cap is " + std::to_string(options.max_triples));
    }
    return sub;
}

std::vector<std::array<std::string, 3>> subgraph_dump(const SeedSubgraph& sub) {
    std::vector<std::array<std::string, 3>> rows;
    rows.reserve(sub.triples.size());
    for (const auto& t : sub.triples) {
        rows.push_back({sub.entity(t.subject).iri, sub.predicate(t.predicate).iri, sub.entity(t.object_entity()).iri});
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

bool is_connected(const std::vector<Triple>& triples) {
    if (triples.empty()) return true;
    std::vector<EntityId> nodes;
    for (const auto& t : triples) {
        nodes.push_back(t.subject);
        if (t.has_entity_object()) nodes.push_back(t.object_entity());
    }
    sort_unique(nodes);
    const LocalIndex index(nodes);
    std::vector<graph::Edge> edges;
    for (const auto& t : triples) {
        if (t.has_entity_object()) edges.push_back({index[t.subject], index[t.object_entity()]});
    }
    const auto labels = graph::component_labels(nodes.size(), edges);
    return std::all_of(labels.begin(), labels.end(), [&](std::uint32_t l) { return l == labels.front(); });
}

}  // namespace dkgqa
