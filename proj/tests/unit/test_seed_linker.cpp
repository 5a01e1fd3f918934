#include "dkgqa/errors.hpp"
#include "dkgqa/seed_linker.hpp"
#include "dkgqa/text.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

using namespace dkgqa;
using dkgqa::testing::ent;
using dkgqa::testing::kg_from;
using dkgqa::testing::stmt;

namespace {

// Brute force: every (start, end) substring that sits on word boundaries and
// equals a folded label is a candidate; scan left to right, keep the longest
// candidate at each start, skip past it.
std::vector<std::pair<std::size_t, std::size_t>> brute_force_mentions(const std::string& textv,
                                                                      const std::map<std::string, EntityId>& dict) {
    const auto cps = text::decode_utf8(textv);
    const auto n = cps.size();
    auto word = [&](std::size_t i) { return text::is_word_char(cps[i].value); };
    auto boundary = [&](std::size_t i) { return i == 0 || i == n || !word(i - 1) || !word(i); };
    auto folded = [&](std::size_t a, std::size_t b) {
        std::string s;
        for (std::size_t k = a; k < b; ++k) text::append_utf8(s, text::fold_case(cps[k].value));
        return s;
    };
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < n) {
        std::size_t best = 0;
        if (boundary(i) && !text::is_space(cps[i].value)) {
            for (std::size_t j = i + 1; j <= n; ++j) {
                if (boundary(j) && dict.count(folded(i, j))) best = j;
            }
        }
        if (best == 0) {
            ++i;
        } else {
            out.emplace_back(i, best);
            i = best;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("text without label matches links nothing") {
    const auto kg = kg_from(stmt("a", "p", "b"), "http://x/a\tAlpha\n");
    const auto s = link_entities({"d", "nothing relevant here", Split::train}, kg);
    CHECK(s.entities.empty());
    CHECK(s.mentions.empty());
    CHECK(s.detected_total == 0);
}

TEST_CASE("Harry Potter studied at Hogwarts") {
    const auto kg = kg_from(stmt("HarryPotter", "educatedAt", "Hogwarts") + stmt("Hogwarts", "locatedIn", "Scotland"),
                            "http://x/HarryPotter\tHarry Potter\nhttp://x/Hogwarts\tHogwarts\n"
                            "http://x/Scotland\tScotland\n");
    const auto s = link_entities({"hp", "Harry Potter studied at Hogwarts", Split::train}, kg);
    REQUIRE(s.entities.size() == 2);
    CHECK(s.contains(ent(kg, "HarryPotter")));
    CHECK(s.contains(ent(kg, "Hogwarts")));
    REQUIRE(s.mentions.size() == 2);
    CHECK(s.mentions[0].begin == 0);
    CHECK(s.mentions[0].end == 12);
}

TEST_CASE("longest label wins: New York City over New York") {
    const auto kg = kg_from(stmt("NY", "p", "NYC") + stmt("NYC", "p", "City"),
                            "http://x/NY\tNew York\nhttp://x/NYC\tNew York City\nhttp://x/City\tCity\n");
    const std::string doc = "She moved to New York City in 1999.";
    const auto s = link_entities({"d", doc, Split::test}, kg);
    REQUIRE(s.mentions.size() == 1);
    CHECK(s.mentions[0].entity == ent(kg, "NYC"));
    CHECK(doc.substr(s.mentions[0].begin, s.mentions[0].end - s.mentions[0].begin) == "New York City");

    std::map<std::string, EntityId> dict{{"new york", ent(kg, "NY")}, {"new york city", ent(kg, "NYC")},
                                         {"city", ent(kg, "City")}};
    const auto oracle = brute_force_mentions(doc, dict);
    REQUIRE(oracle.size() == 1);
}

TEST_CASE("matches respect word boundaries") {
    const auto kg = kg_from(stmt("Java", "p", "Indonesia"), "http://x/Java\tJava\nhttp://x/Indonesia\tIndonesia\n");
    CHECK(link_entities({"d", "Javanese cuisine", Split::train}, kg).entities.empty());
    CHECK(link_entities({"d", "JAVA, Indonesia.", Split::train}, kg).entities.size() == 2);
}

TEST_CASE("duplicate mentions collapse in the entity set") {
    const auto kg = kg_from(stmt("a", "p", "b"), "http://x/a\tAlpha\n");
    const auto s = link_entities({"d", "Alpha and alpha and ALPHA", Split::train}, kg);
    CHECK(s.mentions.size() == 3);
    CHECK(s.detected_total == 3);
    CHECK(s.entities.size() == 1);
}

TEST_CASE("diacritic stripping and mention cap are configurable") {
    const auto kg = kg_from(stmt("z", "p", "b"), "http://x/z\tZürich\nhttp://x/b\tBern\n");
    CHECK(link_entities({"d", "Zurich", Split::train}, kg).entities.empty());
    CHECK(link_entities({"d", "Zurich", Split::train}, kg, {.strip_diacritics = true}).entities.size() == 1);
    CHECK(link_entities({"d", "zÜrich and Bern", Split::train}, kg, {.max_mentions = 1}).entities.size() == 1);
}

TEST_CASE("labels shared by two entities link to the smaller id") {
    const auto kg = kg_from(stmt("first", "p", "second"), "http://x/first\tMercury\nhttp://x/second\tMercury\n");
    const auto s = link_entities({"d", "Mercury", Split::train}, kg);
    REQUIRE(s.entities.size() == 1);
    CHECK(s.entities[0] == ent(kg, "first"));
}

TEST_CASE("linking without a label index is a configuration error") {
    std::istringstream in(stmt("a", "p", "b"));
    const auto kg = parse_ntriples(in);
    CHECK_THROWS_AS(DictionaryLinker{kg}, ConfigError);
}

TEST_CASE("random texts agree with the brute-force matcher and are deterministic") {
    const std::vector<std::string> vocab = {"red", "river", "red river", "valley", "river valley", "red river valley",
                                            "old", "town", "old town", "the"};
    std::string doc_nt;
    std::string labels;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        doc_nt += stmt("e" + std::to_string(i), "p", "e" + std::to_string((i + 1) % vocab.size()));
        labels += "http://x/e" + std::to_string(i) + "\t" + vocab[i] + "\n";
    }
    const auto kg = kg_from(doc_nt, labels);
    std::map<std::string, EntityId> dict;
    for (std::size_t i = 0; i < vocab.size(); ++i) dict.emplace(vocab[i], ent(kg, "e" + std::to_string(i)));
    const DictionaryLinker linker(kg);

    const std::vector<std::string> words = {"Red", "river", "VALLEY", "old", "town", "the", "riverside", "x", "Town,",
                                            "(old)"};
    std::mt19937_64 rng(3);
    for (int round = 0; round < 300; ++round) {
        std::string doc;
        const auto len = 1 + rng() % 12;
        for (std::size_t w = 0; w < len; ++w) {
            if (w) doc += ' ';
            doc += words[rng() % words.size()];
        }
        const auto got = linker.link({"d", doc, Split::train});
        const auto expected = brute_force_mentions(doc, dict);
        REQUIRE(got.mentions.size() == expected.size());
        const auto cps = text::decode_utf8(doc);
        for (std::size_t k = 0; k < expected.size(); ++k) {
            CHECK(got.mentions[k].begin == cps[expected[k].first].byte_offset);
            CHECK(got.mentions[k].end ==
                  (expected[k].second < cps.size() ? cps[expected[k].second].byte_offset : doc.size()));
            CHECK(got.mentions[k].entity == dict.at(text::fold(doc.substr(got.mentions[k].begin,
                                                                          got.mentions[k].end - got.mentions[k].begin))));
            if (k > 0) CHECK(got.mentions[k - 1].end <= got.mentions[k].begin);
        }
        for (const auto e : got.entities) CHECK(e.value < kg.entity_count());
        const auto again = linker.link({"d", doc, Split::train});
        CHECK(again.entities == got.entities);
    }
}
