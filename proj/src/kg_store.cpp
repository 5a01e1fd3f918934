#include "dkgqa/kg_store.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace dkgqa {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::string_view strip_brackets(std::string_view s) {
    if (s.size() >= 2 && s.front() == '<' && s.back() == '>') return s.substr(1, s.size() - 2);
    return s;
}

// ---------------------------------------------------------------------------
// N-Triples statement parser

struct Term {
    enum class Kind { iri, blank, literal } kind = Kind::iri;
    std::string value;
    std::string datatype;
    std::string language;
};

class StatementParser {
public:
    explicit StatementParser(std::string_view line) : s_(line) {}

    // Returns false on a blank/comment line; throws std::invalid_argument on
    // malformed input.
    bool parse(Term& subject, Term& predicate, Term& object) {
        skip_ws();
        if (at_end() || peek() == '#') return false;
        subject = term();
        if (subject.kind == Term::Kind::literal) fail("literal in subject position");
        skip_ws();
        predicate = term();
        if (predicate.kind != Term::Kind::iri) fail("predicate must be an IRI");
        skip_ws();
        object = term();
        skip_ws();
        if (at_end() || peek() != '.') fail("missing terminating '.'");
        ++pos_;
        skip_ws();
        if (!at_end() && peek() != '#') fail("trailing characters after '.'");
        return true;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument(why + " at column " + std::to_string(pos_ + 1));
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    Term term() {
        if (at_end()) fail("unexpected end of statement");
        switch (peek()) {
            case '<': return iri();
            case '_': return blank();
            case '"': return literal();
            default: fail(std::string("unexpected character '") + peek() + "'");
        }
    }

    Term iri() {
        ++pos_;
        Term t;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            const char c = peek();
            if (c == '>') {
                ++pos_;
                break;
            }
            if (c == '\\') {
                ++pos_;
                unicode_escape(t.value);
                continue;
            }
            if (c == ' ' || c == '<' || c == '"') fail("invalid character in IRI");
            t.value.push_back(c);
            ++pos_;
        }
        if (t.value.empty()) fail("empty IRI");
        return t;
    }

    Term blank() {
        if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != ':') fail("malformed blank node");
        const auto start = pos_;
        pos_ += 2;
        while (!at_end() && peek() != ' ' && peek() != '\t' && peek() != '\r') ++pos_;
        // A trailing '.' with no separating space terminates the statement.
        if (s_[pos_ - 1] == '.') --pos_;
        if (pos_ - start <= 2) fail("empty blank node label");
        Term t;
        t.kind = Term::Kind::blank;
        t.value = std::string(s_.substr(start, pos_ - start));
        return t;
    }

    Term literal() {
        ++pos_;
        Term t;
        t.kind = Term::Kind::literal;
        while (true) {
            if (at_end()) fail("unterminated literal");
            const char c = peek();
            if (c == '"') {
                ++pos_;
                break;
            }
            if (c == '\\') {
                ++pos_;
                if (at_end()) fail("dangling escape");
                const char e = peek();
                switch (e) {
                    case 't': t.value.push_back('\t'); ++pos_; break;
                    case 'b': t.value.push_back('\b'); ++pos_; break;
                    case 'n': t.value.push_back('\n'); ++pos_; break;
                    case 'r': t.value.push_back('\r'); ++pos_; break;
                    case 'f': t.value.push_back('\f'); ++pos_; break;
                    case '"': t.value.push_back('"'); ++pos_; break;
                    case '\'': t.value.push_back('\''); ++pos_; break;
                    case '\\': t.value.push_back('\\'); ++pos_; break;
                    case 'u':
                    case 'U': unicode_escape(t.value); break;
                    default: fail("unknown escape sequence");
                }
                continue;
            }
            t.value.push_back(c);
            ++pos_;
        }
        if (!at_end() && peek() == '@') {
            ++pos_;
            const auto start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) ++pos_;
            if (pos_ == start) fail("empty language tag");
            t.language = std::string(s_.substr(start, pos_ - start));
        } else if (pos_ + 1 < s_.size() && peek() == '^' && s_[pos_ + 1] == '^') {
            pos_ += 2;
            if (at_end() || peek() != '<') fail("datatype must be an IRI");
            t.datatype = iri().value;
        }
        return t;
    }

    // Positioned on 'u' or 'U'.
    void unicode_escape(std::string& out) {
        if (at_end()) fail("dangling escape");
        const char kind = peek();
        std::size_t digits = 0;
        if (kind == 'u') {
            digits = 4;
        } else if (kind == 'U') {
            digits = 8;
        } else {
            fail("invalid escape in IRI");
        }
        ++pos_;
        if (pos_ + digits > s_.size()) fail("truncated unicode escape");
        char32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            const char h = s_[pos_ + i];
            cp <<= 4;
            if (h >= '0' && h <= '9') {
                cp |= static_cast<char32_t>(h - '0');
            } else if (h >= 'a' && h <= 'f') {
                cp |= static_cast<char32_t>(h - 'a' + 10);
            } else if (h >= 'A' && h <= 'F') {
                cp |= static_cast<char32_t>(h - 'A' + 10);
            } else {
                fail("invalid hex digit in escape");
            }
        }
        pos_ += digits;
        text::append_utf8(out, cp);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

void escape_into(std::string& out, std::string_view s, bool iri) {
    for (const char c : s) {
        switch (c) {
            case '\\': out += iri ? "\\u005C" : "\\\\"; break;
            case '"':
                if (iri) {
                    out += "\\u0022";
                } else {
                    out += "\\\"";
                }
                break;
            case '\n': out += iri ? "\\u000A" : "\\n"; break;
            case '\r': out += iri ? "\\u000D" : "\\r"; break;
            case '\t': out += iri ? "\\u0009" : "\\t"; break;
            case ' ':
                if (iri) {
                    out += "\\u0020";
                } else {
                    out.push_back(c);
                }
                break;
            case '>':
                if (iri) {
                    out += "\\u003E";
                } else {
                    out.push_back(c);
                }
                break;
            default: out.push_back(c);
        }
    }
}

std::string format_entity(const std::string& iri) {
    if (iri.rfind("_:", 0) == 0) return iri;
    std::string out = "<";
    escape_into(out, iri, true);
    out.push_back('>');
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Hashing

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
    std::size_t h = t.subject.value;
    h = mix(h, t.predicate.value);
    if (t.has_entity_object()) {
        h = mix(h, t.object_entity().value);
    } else {
        h = mix(h, 0x8000'0000ULL | std::get<LiteralId>(t.object).value);
    }
    return h;
}

std::size_t KnowledgeGraphBuilder::LiteralKeyHash::operator()(const Literal& l) const noexcept {
    const std::hash<std::string> hs;
    return mix(mix(hs(l.lexical), hs(l.datatype)), hs(l.language));
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph::KnowledgeGraph(KnowledgeGraph&&) noexcept = default;
KnowledgeGraph& KnowledgeGraph::operator=(KnowledgeGraph&&) noexcept = default;
KnowledgeGraph::~KnowledgeGraph() = default;

const std::string& KnowledgeGraph::entity_iri(EntityId id) const {
    if (id.value >= entity_iris_.size()) throw LookupError("unknown entity id " + std::to_string(id.value));
    return entity_iris_[id.value];
}

const std::string& KnowledgeGraph::predicate_iri(PredicateId id) const {
    if (id.value >= predicate_iris_.size()) {
        throw LookupError("unknown predicate id " + std::to_string(id.value));
    }
    return predicate_iris_[id.value];
}

const Literal& KnowledgeGraph::literal(LiteralId id) const {
    if (id.value >= literals_.size()) throw LookupError("unknown literal id " + std::to_string(id.value));
    return literals_[id.value];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view iri) const {
    const auto it = entity_by_iri_.find(strip_brackets(iri));
    if (it == entity_by_iri_.end()) return std::nullopt;
    return EntityId{it->second};
}

std::optional<PredicateId> KnowledgeGraph::find_predicate(std::string_view iri) const {
    const auto it = predicate_by_iri_.find(strip_brackets(iri));
    if (it == predicate_by_iri_.end()) return std::nullopt;
    return PredicateId{it->second};
}

std::optional<std::string_view> KnowledgeGraph::entity_label(EntityId id) const {
    if (id.value >= entity_labels_.size() || entity_labels_[id.value].empty()) return std::nullopt;
    return std::string_view(entity_labels_[id.value]);
}

std::optional<std::string_view> KnowledgeGraph::predicate_label(PredicateId id) const {
    if (id.value >= predicate_labels_.size() || predicate_labels_[id.value].empty()) return std::nullopt;
    return std::string_view(predicate_labels_[id.value]);
}

std::string KnowledgeGraph::entity_display(EntityId id) const {
    if (auto l = entity_label(id)) return std::string(*l);
    return std::string(text::local_name(entity_iri(id)));
}

std::string KnowledgeGraph::predicate_display(PredicateId id) const {
    if (auto l = predicate_label(id)) return std::string(*l);
    return std::string(text::local_name(predicate_iri(id)));
}

std::string KnowledgeGraph::object_display(const TripleObject& object) const {
    if (const auto* e = std::get_if<EntityId>(&object)) return entity_display(*e);
    return literal(std::get<LiteralId>(object)).lexical;
}

std::span<const std::uint32_t> KnowledgeGraph::subject_positions(EntityId v) const {
    if (v.value >= entity_iris_.size()) throw LookupError("unknown entity id " + std::to_string(v.value));
    const auto begin = subject_offsets_[v.value];
    const auto end = subject_offsets_[v.value + 1];
    return std::span<const std::uint32_t>(subject_index_).subspan(begin, end - begin);
}

std::span<const std::uint32_t> KnowledgeGraph::object_positions(EntityId v) const {
    if (v.value >= entity_iris_.size()) throw LookupError("unknown entity id " + std::to_string(v.value));
    const auto begin = object_offsets_[v.value];
    const auto end = object_offsets_[v.value + 1];
    return std::span<const std::uint32_t>(object_index_).subspan(begin, end - begin);
}

std::vector<Triple> KnowledgeGraph::neighbors(EntityId v) const {
    const auto out = subject_positions(v);
    const auto in = object_positions(v);
    std::vector<Triple> result;
    result.reserve(out.size() + in.size());
    for (const auto pos : out) result.push_back(triples_[pos]);
    for (const auto pos : in) {
        const auto& t = triples_[pos];
        if (t.subject != v) result.push_back(t);
    }
    return result;
}

std::size_t KnowledgeGraph::degree(EntityId v) const {
    std::size_t n = subject_positions(v).size();
    for (const auto pos : object_positions(v)) {
        if (triples_[pos].subject != v) ++n;
    }
    return n;
}

std::size_t KnowledgeGraph::load_labels(std::istream& in) {
    std::size_t applied = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        const std::string_view iri = strip_brackets(std::string_view(line).substr(0, tab));
        std::string label = text::trim(std::string_view(line).substr(tab + 1));
        if (label.empty()) continue;
        if (auto e = find_entity(iri)) {
            entity_labels_[e->value] = label;
            ++applied;
        } else if (auto p = find_predicate(iri)) {
            predicate_labels_[p->value] = std::move(label);
            ++applied;
        }
    }
    if (label_index_enabled_) enable_label_index();
    return applied;
}

void KnowledgeGraph::set_entity_label(EntityId id, std::string label) {
    entity_iri(id);
    entity_labels_[id.value] = std::move(label);
    if (label_index_enabled_) enable_label_index();
}

void KnowledgeGraph::set_predicate_label(PredicateId id, std::string label) {
    predicate_iri(id);
    predicate_labels_[id.value] = std::move(label);
}

void KnowledgeGraph::enable_label_index() {
    label_index_.clear();
    for (std::uint32_t i = 0; i < entity_labels_.size(); ++i) {
        if (entity_labels_[i].empty()) continue;
        auto key = text::normalize_label(entity_labels_[i]);
        if (key.empty()) continue;
        label_index_[std::move(key)].push_back(EntityId{i});
    }
    label_index_enabled_ = true;
}

std::span<const EntityId> KnowledgeGraph::entities_with_label(std::string_view label) const {
    const auto it = label_index_.find(text::normalize_label(label));
    if (it == label_index_.end()) return {};
    return it->second;
}

void KnowledgeGraph::for_each_label(const std::function<void(std::string_view, EntityId)>& fn) const {
    for (const auto& [label, ids] : label_index_) {
        for (const auto id : ids) fn(label, id);
    }
}

std::vector<std::string> KnowledgeGraph::audit() const {
    std::vector<std::string> problems;
    const auto n = entity_iris_.size();
    if (subject_offsets_.size() != n + 1 || object_offsets_.size() != n + 1) {
        problems.emplace_back("offset tables do not match entity count");
        return problems;
    }
    std::vector<int> seen_subject(triples_.size(), 0);
    std::vector<int> seen_object(triples_.size(), 0);
    for (std::uint32_t e = 0; e < n; ++e) {
        for (const auto pos : subject_positions(EntityId{e})) {
            if (pos >= triples_.size() || triples_[pos].subject.value != e) {
                problems.push_back("subject index of entity " + std::to_string(e) + " holds a foreign triple");
            } else {
                ++seen_subject[pos];
            }
        }
        for (const auto pos : object_positions(EntityId{e})) {
            if (pos >= triples_.size() || !triples_[pos].has_entity_object() ||
                triples_[pos].object_entity().value != e) {
                problems.push_back("object index of entity " + std::to_string(e) + " holds a foreign triple");
            } else {
                ++seen_object[pos];
            }
        }
    }
    for (std::size_t i = 0; i < triples_.size(); ++i) {
        const auto& t = triples_[i];
        if (t.subject.value >= n || t.predicate.value >= predicate_iris_.size()) {
            problems.push_back("triple " + std::to_string(i) + " has an unresolved term");
        }
        if (t.has_entity_object() ? t.object_entity().value >= n
                                  : std::get<LiteralId>(t.object).value >= literals_.size()) {
            problems.push_back("triple " + std::to_string(i) + " has an unresolved object");
        }
        if (seen_subject[i] != 1) {
            problems.push_back("triple " + std::to_string(i) + " appears " + std::to_string(seen_subject[i]) +
                               " times in the subject index");
        }
        const int expected_object = t.has_entity_object() ? 1 : 0;
        if (seen_object[i] != expected_object) {
            problems.push_back("triple " + std::to_string(i) + " appears " + std::to_string(seen_object[i]) +
                               " times in the object index");
        }
    }
    if (subject_index_.size() != triples_.size()) {
        problems.emplace_back("subject index size differs from triple count");
    }
    for (std::uint32_t e = 0; e < n; ++e) {
        const auto it = entity_by_iri_.find(entity_iris_[e]);
        if (it == entity_by_iri_.end() || it->second != e) {
            problems.push_back("entity interning is not bijective at id " + std::to_string(e));
        }
    }
    return problems;
}

// ---------------------------------------------------------------------------
// Builder

KnowledgeGraphBuilder::KnowledgeGraphBuilder(ParseOptions options) : options_(std::move(options)) {}
KnowledgeGraphBuilder::~KnowledgeGraphBuilder() = default;

EntityId KnowledgeGraphBuilder::intern_entity(std::string_view iri) {
    auto& g = graph_;
    if (const auto it = g.entity_by_iri_.find(iri); it != g.entity_by_iri_.end()) return EntityId{it->second};
    const auto id = static_cast<std::uint32_t>(g.entity_iris_.size());
    g.entity_iris_.emplace_back(iri);
    g.entity_by_iri_.emplace(g.entity_iris_.back(), id);
    g.entity_labels_.emplace_back();
    return EntityId{id};
}

PredicateId KnowledgeGraphBuilder::intern_predicate(std::string_view iri) {
    auto& g = graph_;
    if (const auto it = g.predicate_by_iri_.find(iri); it != g.predicate_by_iri_.end()) {
        return PredicateId{it->second};
    }
    const auto id = static_cast<std::uint32_t>(g.predicate_iris_.size());
    g.predicate_iris_.emplace_back(iri);
    g.predicate_by_iri_.emplace(g.predicate_iris_.back(), id);
    g.predicate_labels_.emplace_back();
    const auto& wanted = options_.label_predicates;
    label_predicate_.push_back(std::find(wanted.begin(), wanted.end(), iri) != wanted.end());
    return PredicateId{id};
}

LiteralId KnowledgeGraphBuilder::intern_literal(Literal literal) {
    if (const auto it = literal_ids_.find(literal); it != literal_ids_.end()) return LiteralId{it->second};
    const auto id = static_cast<std::uint32_t>(graph_.literals_.size());
    graph_.literals_.push_back(literal);
    literal_ids_.emplace(std::move(literal), id);
    return LiteralId{id};
}

bool KnowledgeGraphBuilder::add(EntityId subject, PredicateId predicate, TripleObject object) {
    const Triple t{subject, predicate, object};
    if (!seen_.emplace(t, 0).second) return false;
    graph_.triples_.push_back(t);
    if (!t.has_entity_object() && label_predicate_[predicate.value]) {
        const auto& lit = graph_.literals_[std::get<LiteralId>(object).value];
        const auto& langs = options_.label_languages;
        auto& slot = graph_.entity_labels_[subject.value];
        if (slot.empty() && std::find(langs.begin(), langs.end(), lit.language) != langs.end()) {
            slot = lit.lexical;
        }
    }
    return true;
}

KnowledgeGraph KnowledgeGraphBuilder::build() && {
    auto& g = graph_;
    const auto n = g.entity_iris_.size();
    g.subject_offsets_.assign(n + 1, 0);
    g.object_offsets_.assign(n + 1, 0);
    for (const auto& t : g.triples_) {
        ++g.subject_offsets_[t.subject.value + 1];
        if (t.has_entity_object()) ++g.object_offsets_[t.object_entity().value + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.subject_offsets_[i + 1] += g.subject_offsets_[i];
        g.object_offsets_[i + 1] += g.object_offsets_[i];
    }
    g.subject_index_.assign(g.subject_offsets_[n], 0);
    g.object_index_.assign(g.object_offsets_[n], 0);
    std::vector<std::uint32_t> sfill(g.subject_offsets_.begin(), g.subject_offsets_.end() - 1);
    std::vector<std::uint32_t> ofill(g.object_offsets_.begin(), g.object_offsets_.end() - 1);
    for (std::uint32_t pos = 0; pos < g.triples_.size(); ++pos) {
        const auto& t = g.triples_[pos];
        g.subject_index_[sfill[t.subject.value]++] = pos;
        if (t.has_entity_object()) g.object_index_[ofill[t.object_entity().value]++] = pos;
    }
    seen_.clear();
    literal_ids_.clear();
    return std::move(g);
}

// ---------------------------------------------------------------------------
// Parsing and serialisation

KnowledgeGraph parse_ntriples(std::istream& in, const ParseOptions& options) {
    KnowledgeGraphBuilder builder(options);
    auto& report = builder.report();
    std::string line;
    Term s, p, o;
    while (std::getline(in, line)) {
        ++report.lines;
        bool statement = false;
        try {
            statement = StatementParser(line).parse(s, p, o);
        } catch (const std::invalid_argument& e) {
            if (options.malformed == MalformedLinePolicy::fail_fast) throw ParseError(report.lines, e.what());
            if (report.malformed++ == 0) {
                report.first_malformed_line = report.lines;
                report.first_malformed_reason = e.what();
            }
            continue;
        }
        if (!statement) continue;
        ++report.statements;
        const auto subject = builder.intern_entity(s.value);
        const auto predicate = builder.intern_predicate(p.value);
        TripleObject object;
        if (o.kind == Term::Kind::literal) {
            object = builder.intern_literal(Literal{std::move(o.value), std::move(o.datatype), std::move(o.language)});
        } else {
            object = builder.intern_entity(o.value);
        }
        if (!builder.add(subject, predicate, object)) ++report.duplicates;
    }
    if (in.bad()) throw IoError("read error while parsing N-Triples");
    if (report.malformed > 0) {
        spdlog::warn("skipped {} malformed N-Triples line(s); first at line {}: {}", report.malformed,
                     report.first_malformed_line, report.first_malformed_reason);
    }
    return std::move(builder).build();
}

KnowledgeGraph parse_ntriples_file(const std::string& path, const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open knowledge graph file '" + path + "'");
    return parse_ntriples(in, options);
}

std::string format_literal(const Literal& literal) {
    std::string out = "\"";
    escape_into(out, literal.lexical, false);
    out.push_back('"');
    if (!literal.language.empty()) {
        out += "@" + literal.language;
    } else if (!literal.datatype.empty()) {
        out += "^^<";
        escape_into(out, literal.datatype, true);
        out.push_back('>');
    }
    return out;
}

std::string format_term(const KnowledgeGraph& kg, const TripleObject& object) {
    if (const auto* e = std::get_if<EntityId>(&object)) return format_entity(kg.entity_iri(*e));
    return format_literal(kg.literal(std::get<LiteralId>(object)));
}

void write_ntriples(const KnowledgeGraph& kg, std::ostream& out) {
    std::string line;
    for (const auto& t : kg.triples()) {
        line.clear();
        line += format_entity(kg.entity_iri(t.subject));
        line.push_back(' ');
        line += format_entity(kg.predicate_iri(t.predicate));
        line.push_back(' ');
        line += format_term(kg, t.object);
        line += " .\n";
        out << line;
    }
}

std::optional<EntityId> resolve(const KnowledgeGraph& kg, std::string_view iri_or_label) {
    if (auto e = kg.find_entity(iri_or_label)) return e;
    if (!kg.label_index_enabled()) return std::nullopt;
    const auto hits = kg.entities_with_label(iri_or_label);
    if (hits.empty()) return std::nullopt;
    return *std::min_element(hits.begin(), hits.end());
}

}  // namespace dkgqa
