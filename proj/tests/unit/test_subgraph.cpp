#include "dkgqa/errors.hpp"
#include "dkgqa/subgraph.hpp"
#include "dkgqa/text.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace dkgqa;
using dkgqa::testing::ent;
using dkgqa::testing::kg_from;
using dkgqa::testing::stmt;

namespace {

SeedEntitySet seeds_of(const KnowledgeGraph& kg, std::initializer_list<const char*> names) {
    SeedEntitySet s;
    s.doc_id = "doc";
    for (const auto* n : names) s.entities.push_back(ent(kg, n));
    std::sort(s.entities.begin(), s.entities.end());
    s.detected_total = s.entities.size();
    return s;
}

std::set<std::string> triple_names(const KnowledgeGraph& kg, const std::vector<Triple>& ts) {
    std::set<std::string> out;
    for (const auto& t : ts) {
        out.insert(std::string(text::local_name(kg.entity_iri(t.subject))) + " " +
                   std::string(text::local_name(kg.predicate_iri(t.predicate))) + " " +
                   std::string(text::local_name(kg.entity_iri(t.object_entity()))));
    }
    return out;
}

bool subset(const std::vector<Triple>& a, const std::vector<Triple>& b) {
    return std::all_of(a.begin(), a.end(), [&](const Triple& t) { return std::find(b.begin(), b.end(), t) != b.end(); });
}

// The fixture used by the end-to-end cases. Interning order (and so id order)
// follows first appearance: A, B, H, C, L, X1..X4, Org, ...
const std::string kTwentyTriples = stmt("A", "knows", "B") + stmt("A", "memberOf", "H") + stmt("C", "memberOf", "H") +
                                   stmt("C", "livesIn", "L") + stmt("B", "livesIn", "L") + stmt("A", "likes", "X1") +
                                   stmt("A", "likes", "X2") + stmt("B", "likes", "X3") + stmt("C", "likes", "X4") +
                                   stmt("H", "partOf", "Org") + stmt("Org", "foundedIn", "L") +
                                   stmt("X1", "relatedTo", "X2") + stmt("X3", "relatedTo", "X4") +
                                   stmt("L", "partOf", "Country") + stmt("Country", "partOf", "Continent") +
                                   stmt("P", "knows", "Q") + stmt("Q", "knows", "U") + stmt("S", "knows", "M") +
                                   stmt("M", "knows", "T") + "<http://x/A> <http://x/born> \"1970\" .\n";

const std::string kLabels =
    "http://x/A\tAda\nhttp://x/B\tBoris\nhttp://x/C\tCleo\nhttp://x/P\tPia\nhttp://x/Q\tQuinn\n"
    "http://x/U\tUma\nhttp://x/S\tSol\nhttp://x/T\tTeo\nhttp://x/Z\tZed\n";

}  // namespace

TEST_CASE("single seed of degree three") {
    const auto kg = kg_from(stmt("s", "p", "a") + stmt("s", "p", "b") + stmt("c", "p", "s") + stmt("a", "p", "b"));
    const auto g = expand_one_hop(kg, seeds_of(kg, {"s"}));
    CHECK(g.triples.size() == 3);
    CHECK(g.entities.size() == 4);
    CHECK(g.predicates.size() == 1);
}

TEST_CASE("two seeds sharing a neighbour and a triple") {
    const auto kg = kg_from(stmt("s1", "p", "n") + stmt("s2", "p", "n") + stmt("s1", "q", "x") + stmt("y", "q", "s2") +
                            stmt("s1", "r", "s2") + stmt("x", "p", "y"));
    const auto s1 = ent(kg, "s1");
    const auto s2 = ent(kg, "s2");
    const auto g = expand_one_hop(kg, seeds_of(kg, {"s1", "s2"}));
    // Set-union oracle over the explicit adjacency lists.
    std::set<Triple> oracle;
    for (const auto& t : kg.neighbors(s1)) oracle.insert(t);
    for (const auto& t : kg.neighbors(s2)) oracle.insert(t);
    CHECK(g.triples == std::vector<Triple>(oracle.begin(), oracle.end()));
    CHECK(g.triples.size() == kg.degree(s1) + kg.degree(s2) - 1);
}

TEST_CASE("a seed with no entity edges contributes nothing") {
    const auto kg = kg_from(stmt("a", "p", "b") + "<http://x/lit> <http://x/p> \"v\" .\n");
    const auto g = expand_one_hop(kg, seeds_of(kg, {"a", "lit"}));
    CHECK(g.triples.size() == 1);
    CHECK(g.literal_triples.size() == 1);
    CHECK(std::find(g.entities.begin(), g.entities.end(), ent(kg, "lit")) == g.entities.end());
}

TEST_CASE("empty seed set is rejected") {
    const auto kg = kg_from(stmt("a", "p", "b"));
    SeedEntitySet empty;
    CHECK_THROWS_AS(expand_one_hop(kg, empty), EmptySeedError);
}

TEST_CASE("parallel edges collapse to the smallest predicate IRI") {
    const auto kg = kg_from(stmt("a", "zeta", "b") + stmt("b", "alpha", "a") + stmt("a", "mid", "b"));
    const auto seeds = seeds_of(kg, {"a", "b"});
    const auto r = steiner_tree(kg, expand_one_hop(kg, seeds));
    REQUIRE(r.tree_triples.size() == 1);
    CHECK(kg.predicate_iri(r.tree_triples[0].predicate) == "http://x/alpha");
    CHECK(r.tree_triples[0].subject == ent(kg, "b"));
}

TEST_CASE("largest component selection and tie-breaks") {
    const auto kg = kg_from(stmt("a1", "p", "a2") + stmt("a2", "p", "a3") + stmt("a3", "p", "a4") + stmt("a4", "p", "a5") +
                            stmt("b1", "p", "b2") + stmt("b2", "p", "b3") + stmt("b3", "p", "b4") + stmt("c1", "p", "c2") +
                            stmt("c2", "p", "c3") + stmt("c3", "p", "c4"));
    auto component = [&](std::vector<std::string> names, std::vector<std::string> terminals) {
        SteinerComponent c;
        for (std::size_t i = 0; i + 1 < names.size(); ++i) {
            const auto nb = kg.neighbors(ent(kg, names[i]));
            for (const auto& t : nb) {
                if (t.subject == ent(kg, names[i]) && t.object_entity() == ent(kg, names[i + 1])) c.triples.push_back(t);
            }
        }
        for (const auto& n : names) c.entities.push_back(ent(kg, n));
        for (const auto& n : terminals) c.terminals.push_back(ent(kg, n));
        std::sort(c.triples.begin(), c.triples.end());
        std::sort(c.entities.begin(), c.entities.end());
        std::sort(c.terminals.begin(), c.terminals.end());
        return c;
    };
    SeedEntitySet seeds;
    seeds.doc_id = "doc";
    for (const auto* n : {"a1", "a5", "b1", "b4", "c1", "c3", "c4"}) seeds.entities.push_back(ent(kg, n));
    std::sort(seeds.entities.begin(), seeds.entities.end());
    const SubgraphOptions opts{.min_triples = 1, .max_triples = 0};

    SUBCASE("single component is returned unchanged") {
        SteinerResult r;
        r.components.push_back(component({"a1", "a2", "a3", "a4", "a5"}, {"a1", "a5"}));
        const auto sub = largest_component(kg, r, seeds, opts);
        CHECK(sub.size() == 4);
        CHECK(sub.entities == r.components[0].entities);
        CHECK(sub.seeds_retained.size() == 2);
    }
    SUBCASE("sizes five and four pick the five") {
        SteinerResult r;
        r.components.push_back(component({"b1", "b2", "b3", "b4"}, {"b1", "b4"}));
        r.components.push_back(component({"a1", "a2", "a3", "a4", "a5"}, {"a1", "a5"}));
        CHECK(largest_component(kg, r, seeds, opts).entities.size() == 5);
    }
    SUBCASE("equal size: more seeds wins") {
        SteinerResult r;
        r.components.push_back(component({"b1", "b2", "b3", "b4"}, {"b1", "b4"}));
        r.components.push_back(component({"c1", "c2", "c3", "c4"}, {"c1", "c3", "c4"}));
        const auto sub = largest_component(kg, r, seeds, opts);
        CHECK(std::find(sub.entities.begin(), sub.entities.end(), ent(kg, "c1")) != sub.entities.end());
    }
    SUBCASE("equal size and seeds: smallest entity id wins") {
        SteinerResult r;
        r.components.push_back(component({"c1", "c2", "c3", "c4"}, {"c1", "c3"}));
        r.components.push_back(component({"b1", "b2", "b3", "b4"}, {"b1", "b4"}));
        const auto sub = largest_component(kg, r, seeds, opts);
        CHECK(std::find(sub.entities.begin(), sub.entities.end(), ent(kg, "b1")) != sub.entities.end());
    }
    SUBCASE("below the minimum size") {
        SteinerResult r;
        r.components.push_back(component({"b1", "b2", "b3", "b4"}, {"b1", "b4"}));
        CHECK_THROWS_AS(largest_component(kg, r, seeds, SubgraphOptions{.min_triples = 4}), SubgraphTooSmallError);
        CHECK_THROWS_AS(largest_component(kg, SteinerResult{}, seeds, opts), SubgraphTooSmallError);
    }
}

TEST_CASE("end to end on a twenty-triple fixture") {
    const auto kg = kg_from(kTwentyTriples, kLabels);
    REQUIRE(kg.triple_count() == 20);
    const DictionaryLinker linker(kg);
    const SubgraphOptions one{.min_triples = 1, .max_triples = 200};

    SUBCASE("two adjacent seeds give their connecting triple") {
        const auto sub = build_seed_subgraph(kg, linker, {"d1", "Ada once met Boris.", Split::train}, one);
        CHECK(triple_names(kg, sub.triples) == std::set<std::string>{"A knows B"});
        CHECK(sub.seeds_retained.size() == 2);
        CHECK_THROWS_AS(build_seed_subgraph(kg, linker, {"d1", "Ada once met Boris.", Split::train}),
                        SubgraphTooSmallError);
    }
    SUBCASE("three seeds: hand-derived Mehlhorn tree") {
        // Voronoi: H is reached from A first, L from B first. Auxiliary
        // edges A-B (1), A-C via H (2), B-C via L (2); Kruskal takes A-B and
        // then A-C because (2, A, C) sorts before (2, B, C).
        const auto sub =
            build_seed_subgraph(kg, linker, {"d2", "Ada, Boris and Cleo.", Split::validation}, SubgraphOptions{});
        CHECK(triple_names(kg, sub.triples) == std::set<std::string>{"A knows B", "A memberOf H", "C memberOf H"});
        CHECK(sub.split == Split::validation);
        CHECK(sub.entities.size() == 4);
        CHECK(sub.predicates.size() == 2);
        CHECK(sub.seeds_retained.size() == 3);
        CHECK(is_connected(sub.triples));
        // Canonical order: by subject IRI, then predicate IRI, then object IRI.
        const auto dump = subgraph_dump(sub);
        REQUIRE(dump.size() == 3);
        CHECK(dump[0] == std::array<std::string, 3>{"http://x/A", "http://x/knows", "http://x/B"});
        CHECK(dump[2] == std::array<std::string, 3>{"http://x/C", "http://x/memberOf", "http://x/H"});
        CHECK(sub.entity(ent(kg, "H")).display() == "H");
        CHECK(sub.entity(ent(kg, "A")).display() == "Ada");
    }
    SUBCASE("two islands: the plurality component wins") {
        // P-Q-U holds three seeds; S-M-T holds two, same entity count.
        const auto sub = build_seed_subgraph(kg, linker, {"d3", "Pia, Quinn, Uma, Sol and Teo.", Split::test}, one);
        CHECK(triple_names(kg, sub.triples) == std::set<std::string>{"P knows Q", "Q knows U"});
        const auto seeds = linker.link({"d3", "Pia, Quinn, Uma, Sol and Teo.", Split::test});
        const auto expanded = expand_one_hop(kg, seeds);
        const auto tree = steiner_tree(kg, expanded);
        CHECK(tree.components.size() == 2);
        CHECK(subset(sub.triples, tree.tree_triples));
        CHECK(subset(tree.tree_triples, expanded.triples));
    }
    SUBCASE("no linkable entity") {
        CHECK_THROWS_AS(build_seed_subgraph(kg, linker, {"d4", "nothing to see", Split::train}), EmptySeedError);
    }
    SUBCASE("size cap") {
        CHECK_THROWS_AS(build_seed_subgraph(kg, linker, {"d5", "Ada, Boris and Cleo.", Split::train},
                                            SubgraphOptions{.min_triples = 1, .max_triples = 2}),
                        SubgraphTooLargeError);
    }
    SUBCASE("a lone seed has no tree") {
        CHECK_THROWS_AS(build_seed_subgraph(kg, linker, {"d6", "Only Ada.", Split::train}, one), SubgraphTooSmallError);
    }
}
