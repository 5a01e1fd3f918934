#include "dkgqa/text.hpp"

#include <doctest.h>

using namespace dkgqa;

TEST_CASE("case folding covers Latin-1, Greek and Cyrillic") {
    CHECK(text::fold("Hello WORLD") == "hello world");
    CHECK(text::fold("ÉCOLE") == "école");
    CHECK(text::fold("ΑΘΗΝΑ") == "αθηνα");
    CHECK(text::fold("МОСКВА") == "москва");
    CHECK(text::fold("Łódź") == "łódź");
}

TEST_CASE("diacritic stripping is opt-in") {
    CHECK(text::fold("Zürich") == "zürich");
    CHECK(text::fold("Zürich", {.strip_diacritics = true}) == "zurich");
    CHECK(text::fold("Łódź", {.strip_diacritics = true}) == "lodz");
}

TEST_CASE("normalization collapses whitespace and strips trailing punctuation") {
    CHECK(text::normalize_label("  New \t York\n ") == "new york");
    CHECK(text::normalize_question("Who wrote  X ?") == "who wrote x");
    CHECK(text::normalize_question("Really?!") == "really");
}

TEST_CASE("word tokens and local names") {
    CHECK(text::word_tokens("Who is the author of X?") ==
          std::vector<std::string>{"who", "is", "the", "author", "of", "x"});
    CHECK(text::local_name("http://yago-knowledge.org/resource/Bruce_Willis") == "Bruce_Willis");
    CHECK(text::local_name("http://schema.org/author") == "author");
    CHECK(text::local_name("http://www.w3.org/2000/01/rdf-schema#label") == "label");
    CHECK(text::local_name("_:b0") == "b0");
}

TEST_CASE("invalid UTF-8 decodes to replacement characters") {
    const std::string bad = "a\xC3";
    const auto cps = text::decode_utf8(bad);
    REQUIRE(cps.size() == 2);
    CHECK(cps[1].value == 0xFFFD);
}
