#pragma once

#include "dkgqa/llm_gateway.hpp"
#include "dkgqa/prompts.hpp"
#include "dkgqa/qa_gen.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dkgqa {

/// Recovers the placeholder values a rendered prompt was built from, or
/// nullopt if `prompt` was not rendered from `tmpl`.
std::optional<std::map<std::string, std::string>> extract_placeholders(const PromptTemplate& tmpl,
                                                                       const ChatPrompt& prompt);

/// "(s, p, o)" lines back into triples. Lines that do not split into exactly
/// three parts are skipped.
std::vector<PathTriple> parse_triple_lines(const std::string& text);

struct SyntheticOptions {
    std::size_t max_pairs = 6;
    std::size_t max_hops = 3;
    double fabricate_rate = 0.1;  // supporting path edited so it no longer verifies
    double redundant_rate = 0.1;  // question spells out its answer
    double dissent_rate = 0.03;   // a judge finds the phrasing awkward
};

/// Offline stand-in for the generator and judges. Output depends only on the
/// request (through the MockProvider seed), so runs are reproducible and a
/// new reorder seed or temperature yields different pairs.
///
/// P1: chains of triples followed in presented order, one question per chain.
/// P2: logical structure holds for a capitalised question ending in '?';
///     redundancy is flagged when the question contains ", namely ".
/// P3: supported when the answer is an entity of the supporting facts.
MockProvider::Responder synthetic_responder(PromptSet prompts, SyntheticOptions options = {});

}  // namespace dkgqa
