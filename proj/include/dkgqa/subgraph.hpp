#pragma once

#include "dkgqa/kg_store.hpp"
#include "dkgqa/seed_linker.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace dkgqa {

/// Union of the one-hop neighbourhoods of all seeds.
struct ExpandedGraph {
    std::vector<Triple> triples;          // entity-entity triples, ascending
    std::vector<Triple> literal_triples;  // literal-valued triples of seeds, excluded from connectivity
    std::vector<EntityId> entities;       // endpoints of `triples`, ascending
    std::vector<PredicateId> predicates;  // predicates of `triples`, ascending
    SeedEntitySet seeds;
};

struct SteinerComponent {
    std::vector<Triple> triples;  // ascending
    std::vector<EntityId> entities;
    std::vector<EntityId> terminals;
};

struct SteinerResult {
    std::vector<Triple> tree_triples;  // ascending
    std::vector<SteinerComponent> components;
    std::vector<EntityId> terminals_covered;
};

/// IRI and optional label of one term, carried with the subgraph so that it
/// stays usable (cached, reloaded, verified) without the full store.
struct TermInfo {
    std::string iri;
    std::string label;

    /// Label if present, IRI local name otherwise.
    std::string display() const;
    friend bool operator==(const TermInfo&, const TermInfo&) = default;
};

/// Connected, compact grounding subgraph for one seed document.
struct SeedSubgraph {
    std::string doc_id;
    Split split = Split::train;
    std::vector<Triple> triples;  // canonical order: subject IRI, predicate IRI, object IRI
    std::vector<EntityId> entities;
    std::vector<PredicateId> predicates;
    std::vector<EntityId> seeds_retained;
    std::map<EntityId, TermInfo> entity_terms;
    std::map<PredicateId, TermInfo> predicate_terms;

    std::size_t size() const noexcept { return triples.size(); }
    const TermInfo& entity(EntityId id) const;
    const TermInfo& predicate(PredicateId id) const;

    friend bool operator==(const SeedSubgraph&, const SeedSubgraph&) = default;
};

struct SubgraphOptions {
    /// Subgraphs with fewer triples are rejected (SubgraphTooSmallError).
    std::size_t min_triples = 3;
    /// Subgraphs with more triples are rejected (SubgraphTooLargeError); 0 disables.
    std::size_t max_triples = 200;
};

/// Throws EmptySeedError when `seeds.entities` is empty.
ExpandedGraph expand_one_hop(const KnowledgeGraph& kg, const SeedEntitySet& seeds);

/// Unit-weight, undirected Mehlhorn approximation over the expanded graph.
/// Parallel edges between one entity pair collapse to the triple with the
/// smallest (predicate IRI, subject IRI, object IRI).
SteinerResult steiner_tree(const KnowledgeGraph& kg, const ExpandedGraph& g);

/// Picks the component with the most entities; ties go to the component with
/// more seeds, then to the one with the smallest entity id.
SeedSubgraph largest_component(const KnowledgeGraph& kg, const SteinerResult& s, const SeedEntitySet& seeds,
                               const SubgraphOptions& options = {});

/// link -> expand -> steiner -> largest component, with the size cap applied.
SeedSubgraph build_seed_subgraph(const KnowledgeGraph& kg, const EntityLinker& linker, const SeedDocument& doc,
                                 const SubgraphOptions& options = {});

/// `[subject_iri, predicate_iri, object_iri]` rows sorted by subject,
/// predicate, object.
std::vector<std::array<std::string, 3>> subgraph_dump(const SeedSubgraph& sub);

/// True when the undirected graph over `triples` is connected (vacuously true
/// for zero triples).
bool is_connected(const std::vector<Triple>& triples);

}  // namespace dkgqa
