#include "dkgqa/verifier.hpp"

#include "dkgqa/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <optional>

namespace dkgqa {

namespace {

template <typename Id>
void add_name(std::unordered_map<std::string, std::vector<Id>>& names, const std::string& key, Id id) {
    if (key.empty()) return;
    auto& ids = names[key];
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
}

template <typename Id>
std::vector<Id> lookup(const std::unordered_map<std::string, std::vector<Id>>& names, const std::string& name) {
    std::vector<Id> out;
    for (const auto& key : {text::normalize_label(name), "<iri>" + text::trim(name)}) {
        if (const auto it = names.find(key); it != names.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

std::string to_string(PathFailureReason r) {
    switch (r) {
        case PathFailureReason::unknown_subject: return "unknown_subject";
        case PathFailureReason::unknown_object: return "unknown_object";
        case PathFailureReason::unknown_predicate: return "unknown_predicate";
        case PathFailureReason::triple_absent: return "triple_absent";
    }
    return "unknown";
}

SubgraphIndex::SubgraphIndex(const SeedSubgraph& sub) : sub_(sub) {
    for (const auto& [id, term] : sub.entity_terms) {
        add_name(entity_names_, text::normalize_label(term.display()), id);
        add_name(entity_names_, "<iri>" + term.iri, id);
    }
    for (const auto& [id, term] : sub.predicate_terms) {
        add_name(predicate_names_, text::normalize_label(term.display()), id);
        add_name(predicate_names_, "<iri>" + term.iri, id);
    }
    triples_.insert(sub.triples.begin(), sub.triples.end());
}

std::vector<EntityId> SubgraphIndex::entities_named(const std::string& name) const {
    return lookup(entity_names_, name);
}

std::vector<PredicateId> SubgraphIndex::predicates_named(const std::string& name) const {
    return lookup(predicate_names_, name);
}

VerificationOutcome verify_path(const QaCandidate& c, const SubgraphIndex& index) {
    VerificationOutcome out;
    if (c.supporting_path.empty()) {
        out.failures.push_back({0, PathFailureReason::triple_absent});
        return out;
    }
    for (std::size_t pos = 0; pos < c.supporting_path.size(); ++pos) {
        const auto& step = c.supporting_path[pos];
        const auto subjects = index.entities_named(step.subject);
        const auto predicates = index.predicates_named(step.predicate);
        const auto objects = index.entities_named(step.object);
        bool unknown = false;
        if (subjects.empty()) {
            out.failures.push_back({pos, PathFailureReason::unknown_subject});
            unknown = true;
        }
        if (predicates.empty()) {
            out.failures.push_back({pos, PathFailureReason::unknown_predicate});
            unknown = true;
        }
        if (objects.empty()) {
            out.failures.push_back({pos, PathFailureReason::unknown_object});
            unknown = true;
        }
        if (unknown) continue;

        // Labels may be shared; any stored reading of the step counts. Ids are
        // ascending, so the first hit is the smallest triple.
        std::optional<Triple> hit;
        for (const auto s : subjects) {
            for (const auto p : predicates) {
                for (const auto o : objects) {
                    const Triple t{s, p, o};
                    if (index.contains(t) && (!hit || t < *hit)) hit = t;
                }
            }
        }
        if (hit) {
            out.matched.push_back(*hit);
        } else {
            out.failures.push_back({pos, PathFailureReason::triple_absent});
        }
    }
    out.verified = out.failures.empty();
    if (!out.verified) out.matched.clear();

    if (out.verified) {
        const auto named = index.entities_named(c.answer);
        const auto terminal = out.matched.back().object_entity();
        out.answer_is_terminal = std::find(named.begin(), named.end(), terminal) != named.end();
    } else {
        out.answer_is_terminal =
            text::normalize_label(c.answer) == text::normalize_label(c.supporting_path.back().object);
    }
    if (out.verified && !out.answer_is_terminal) {
        spdlog::warn("{}: answer '{}' is not the terminal entity of its supporting path", c.doc_id, c.answer);
    }
    return out;
}

VerificationOutcome verify_path(const QaCandidate& c, const SeedSubgraph& sub) {
    return verify_path(c, SubgraphIndex(sub));
}

}  // namespace dkgqa
