#pragma once

#include "dkgqa/qa_gen.hpp"
#include "dkgqa/subgraph.hpp"

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dkgqa {

enum class PathFailureReason { unknown_subject, unknown_object, unknown_predicate, triple_absent };

std::string to_string(PathFailureReason r);

struct PathFailure {
    std::size_t position;
    PathFailureReason reason;

    friend bool operator==(const PathFailure&, const PathFailure&) = default;
};

struct VerificationOutcome {
    bool verified = false;
    std::vector<PathFailure> failures;
    /// When verified: the stored triple each path step resolved to.
    std::vector<Triple> matched;
    /// Normalized answer equals the normalized object of the last path step.
    bool answer_is_terminal = false;
};

/// Label lookup over one subgraph. Terms are found by normalized display
/// label (case-folded, whitespace-collapsed) or by exact IRI; a label shared
/// by several terms resolves to all of them.
class SubgraphIndex {
public:
    explicit SubgraphIndex(const SeedSubgraph& sub);

    const SeedSubgraph& subgraph() const noexcept { return sub_; }
    std::vector<EntityId> entities_named(const std::string& name) const;
    std::vector<PredicateId> predicates_named(const std::string& name) const;
    bool contains(const Triple& t) const { return triples_.contains(t); }

private:
    const SeedSubgraph& sub_;
    std::unordered_map<std::string, std::vector<EntityId>> entity_names_;
    std::unordered_map<std::string, std::vector<PredicateId>> predicate_names_;
    std::unordered_set<Triple, TripleHash> triples_;
};

/// Direction-sensitive subset check of the candidate's supporting path
/// against the subgraph's triples. Failure is a value, never an exception.
VerificationOutcome verify_path(const QaCandidate& c, const SubgraphIndex& index);
VerificationOutcome verify_path(const QaCandidate& c, const SeedSubgraph& sub);

}  // namespace dkgqa
