#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dkgqa {

/// Dense handle for an interned entity (subject or IRI/blank-node object).
struct EntityId {
    std::uint32_t value = 0;
    friend auto operator<=>(EntityId, EntityId) = default;
};

struct PredicateId {
    std::uint32_t value = 0;
    friend auto operator<=>(PredicateId, PredicateId) = default;
};

/// Handle into the store's interned literal table.
struct LiteralId {
    std::uint32_t value = 0;
    friend auto operator<=>(LiteralId, LiteralId) = default;
};

struct Literal {
    std::string lexical;
    std::string datatype;  // IRI without brackets, empty for plain literals
    std::string language;  // empty unless language-tagged
    friend bool operator==(const Literal&, const Literal&) = default;
};

using TripleObject = std::variant<EntityId, LiteralId>;

struct Triple {
    EntityId subject;
    PredicateId predicate;
    TripleObject object;

    bool has_entity_object() const noexcept { return std::holds_alternative<EntityId>(object); }
    EntityId object_entity() const { return std::get<EntityId>(object); }

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple& a, const Triple& b) {
        if (auto c = a.subject <=> b.subject; c != 0) return c;
        if (auto c = a.predicate <=> b.predicate; c != 0) return c;
        if (a.object.index() != b.object.index()) return a.object.index() <=> b.object.index();
        if (a.has_entity_object()) return a.object_entity() <=> b.object_entity();
        return std::get<LiteralId>(a.object) <=> std::get<LiteralId>(b.object);
    }
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept;
};

enum class MalformedLinePolicy { skip_and_count, fail_fast };

struct ParseOptions {
    MalformedLinePolicy malformed = MalformedLinePolicy::skip_and_count;
    /// Literal-valued triples with these predicates also populate entity labels
    /// (first seen wins; a label side-file overrides them).
    std::vector<std::string> label_predicates = {
        "http://www.w3.org/2000/01/rdf-schema#label",
        "http://schema.org/name",
        "http://www.w3.org/2004/02/skos/core#prefLabel",
    };
    /// Language tags accepted for label predicates. Empty tag means untagged.
    std::vector<std::string> label_languages = {"", "en"};
};

struct ParseReport {
    std::size_t lines = 0;
    std::size_t statements = 0;
    std::size_t duplicates = 0;
    std::size_t malformed = 0;
    std::size_t first_malformed_line = 0;
    std::string first_malformed_reason;
};

/// Interned, indexed, in-memory triple store. Immutable once built; every
/// const member is safe to call from many threads.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(const KnowledgeGraph&) = delete;
    KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;
    KnowledgeGraph(KnowledgeGraph&&) noexcept;
    KnowledgeGraph& operator=(KnowledgeGraph&&) noexcept;
    ~KnowledgeGraph();

    std::size_t entity_count() const noexcept { return entity_iris_.size(); }
    std::size_t predicate_count() const noexcept { return predicate_iris_.size(); }
    std::size_t literal_count() const noexcept { return literals_.size(); }
    std::size_t triple_count() const noexcept { return triples_.size(); }

    std::span<const Triple> triples() const noexcept { return triples_; }
    const Triple& triple(std::size_t position) const { return triples_.at(position); }

    const std::string& entity_iri(EntityId id) const;
    const std::string& predicate_iri(PredicateId id) const;
    const Literal& literal(LiteralId id) const;

    std::optional<EntityId> find_entity(std::string_view iri) const;
    std::optional<PredicateId> find_predicate(std::string_view iri) const;

    /// Label if one is known, otherwise nullopt.
    std::optional<std::string_view> entity_label(EntityId id) const;
    std::optional<std::string_view> predicate_label(PredicateId id) const;

    /// Label when present, IRI local name otherwise.
    std::string entity_display(EntityId id) const;
    std::string predicate_display(PredicateId id) const;
    /// Lexical form for literals, entity_display for entities.
    std::string object_display(const TripleObject& object) const;

    /// Positions of triples whose subject is `v`, in parse order.
    std::span<const std::uint32_t> subject_positions(EntityId v) const;
    /// Positions of entity-object triples whose object is `v`, in parse order.
    std::span<const std::uint32_t> object_positions(EntityId v) const;

    /// Every triple with `v` as subject or entity object; self-loops once.
    /// Throws LookupError when `v` is not an entity of this store.
    std::vector<Triple> neighbors(EntityId v) const;
    std::size_t degree(EntityId v) const;

    /// Assigns labels from a tab-separated `iri<TAB>label` stream. Returns the
    /// number of labels applied; IRIs absent from the store are ignored.
    std::size_t load_labels(std::istream& in);
    void set_entity_label(EntityId id, std::string label);
    void set_predicate_label(PredicateId id, std::string label);

    /// Builds the case-folded label → entities index used by label lookup and
    /// the dictionary entity linker.
    void enable_label_index();
    bool label_index_enabled() const noexcept { return label_index_enabled_; }
    /// Entities sharing a normalized label, ascending by id.
    std::span<const EntityId> entities_with_label(std::string_view label) const;
    /// Every (normalized label, entity) pair, for building linker dictionaries.
    void for_each_label(const std::function<void(std::string_view label, EntityId)>& fn) const;

    const ParseReport& parse_report() const noexcept { return report_; }

    /// Checks every index invariant; returns a description of each violation.
    std::vector<std::string> audit() const;

private:
    friend class KnowledgeGraphBuilder;

    std::deque<std::string> entity_iris_;
    std::unordered_map<std::string_view, std::uint32_t> entity_by_iri_;
    std::deque<std::string> predicate_iris_;
    std::unordered_map<std::string_view, std::uint32_t> predicate_by_iri_;
    std::vector<Literal> literals_;

    std::vector<Triple> triples_;
    std::vector<std::uint32_t> subject_offsets_;
    std::vector<std::uint32_t> subject_index_;
    std::vector<std::uint32_t> object_offsets_;
    std::vector<std::uint32_t> object_index_;

    std::vector<std::string> entity_labels_;
    std::vector<std::string> predicate_labels_;

    bool label_index_enabled_ = false;
    std::unordered_map<std::string, std::vector<EntityId>> label_index_;

    ParseReport report_;
};

/// Accumulates statements, deduplicates them, and freezes them into an
/// indexed KnowledgeGraph.
class KnowledgeGraphBuilder {
public:
    explicit KnowledgeGraphBuilder(ParseOptions options = {});
    ~KnowledgeGraphBuilder();

    EntityId intern_entity(std::string_view iri);
    PredicateId intern_predicate(std::string_view iri);
    LiteralId intern_literal(Literal literal);

    /// Returns false when the triple was already present.
    bool add(EntityId subject, PredicateId predicate, TripleObject object);

    ParseReport& report() noexcept { return graph_.report_; }
    const ParseOptions& options() const noexcept { return options_; }

    KnowledgeGraph build() &&;

private:
    struct LiteralKeyHash {
        std::size_t operator()(const Literal& l) const noexcept;
    };

    ParseOptions options_;
    KnowledgeGraph graph_;
    std::unordered_map<Literal, std::uint32_t, LiteralKeyHash> literal_ids_;
    std::unordered_map<Triple, char, TripleHash> seen_;
    std::vector<bool> label_predicate_;
};

/// Parses newline-delimited N-Triples. Blank lines and `#` comments are
/// skipped; malformed statements are counted or thrown as ParseError
/// depending on the policy.
KnowledgeGraph parse_ntriples(std::istream& in, const ParseOptions& options = {});
KnowledgeGraph parse_ntriples_file(const std::string& path, const ParseOptions& options = {});

/// Writes every triple in store order as N-Triples.
void write_ntriples(const KnowledgeGraph& kg, std::ostream& out);
std::string format_term(const KnowledgeGraph& kg, const TripleObject& object);
std::string format_literal(const Literal& literal);

/// Exact IRI match (with or without angle brackets) first; then, when the
/// label index is enabled, case-insensitive label match with the smallest
/// EntityId winning ties.
std::optional<EntityId> resolve(const KnowledgeGraph& kg, std::string_view iri_or_label);

}  // namespace dkgqa
