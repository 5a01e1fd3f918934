#include "dkgqa/stats.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/hashing.hpp"
#include "dkgqa/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

namespace dkgqa::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;

// P(a, x) by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the continued fraction of Γ(a, x) (modified Lentz); x >= a + 1.
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEpsilon;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::size_t display_width(const std::string& s) { return text::decode_utf8(s).size(); }

std::string pad(const std::string& s, std::size_t width) {
    const auto w = display_width(s);
    return w >= width ? s : s + std::string(width - w, ' ');
}

using NormalizedPath = std::vector<std::array<std::string, 3>>;

struct Prepared {
    std::string question;
    std::set<std::string> tokens;
    std::string answer;
    NormalizedPath path;
};

Prepared prepare(const QaCandidate& c) {
    Prepared p;
    p.question = text::normalize_question(c.question);
    const auto toks = text::word_tokens(p.question);
    p.tokens.insert(toks.begin(), toks.end());
    p.answer = text::normalize_label(c.answer);
    for (const auto& step : c.supporting_path) {
        p.path.push_back({text::normalize_label(step.subject), text::normalize_label(step.predicate),
                          text::normalize_label(step.object)});
    }
    return p;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& t : a) common += b.count(t);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::map<std::string, std::vector<Prepared>> by_doc(const RunView& run) {
    std::map<std::string, std::vector<Prepared>> out;
    for (const auto& d : run.doc_ids) out[d];
    for (const auto& c : run.items) {
        const auto it = out.find(c.doc_id);
        if (it == out.end()) {
            throw AlignmentError("run " + run.variant_id + " has an item for document '" + c.doc_id +
                                 "' outside its document set");
        }
        it->second.push_back(prepare(c));
    }
    return out;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi_square_sf(double chi2, double dof) {
    if (chi2 <= 0.0) return 1.0;
    return std::clamp(regularized_gamma_q(dof / 2.0, chi2 / 2.0), 0.0, 1.0);
}

ChiSquareResult chi_square(const std::vector<std::vector<double>>& table) {
    const auto r = table.size();
    if (r < 2) throw DegenerateTableError("contingency table needs at least 2 rows");
    const auto c = table.front().size();
    if (c < 2) throw DegenerateTableError("contingency table needs at least 2 columns");
    std::vector<double> row(r, 0.0), col(c, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        if (table[i].size() != c) throw DegenerateTableError("contingency table rows differ in length");
        for (std::size_t j = 0; j < c; ++j) {
            if (table[i][j] < 0.0) throw DegenerateTableError("contingency table has a negative count");
            row[i] += table[i][j];
            col[j] += table[i][j];
            n += table[i][j];
        }
    }
    for (std::size_t i = 0; i < r; ++i) {
        if (row[i] == 0.0) throw DegenerateTableError("row " + std::to_string(i) + " has a zero total");
    }
    for (std::size_t j = 0; j < c; ++j) {
        if (col[j] == 0.0) throw DegenerateTableError("column " + std::to_string(j) + " has a zero total");
    }
    ChiSquareResult out;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double e = row[i] * col[j] / n;
            const double d = table[i][j] - e;
            out.chi2 += d * d / e;
        }
    }
    out.dof = static_cast<int>((r - 1) * (c - 1));
    out.p_value = chi_square_sf(out.chi2, out.dof);
    return out;
}

double cramers_v(double chi2, double n, int r, int c) {
    if (!(n > 0.0)) throw DegenerateTableError("Cramer's V needs n > 0");
    if (std::min(r, c) < 2) throw DegenerateTableError("Cramer's V needs at least a 2x2 table");
    if (chi2 < 0.0) throw DegenerateTableError("negative chi-square statistic");
    return std::min(1.0, std::sqrt(chi2 / (n * (std::min(r, c) - 1))));
}

// ---------------------------------------------------------------------------

double question_jaccard(const std::string& a, const std::string& b) {
    return jaccard(prepare(QaCandidate{a, "", {}, "", {}}).tokens, prepare(QaCandidate{b, "", {}, "", {}}).tokens);
}

PairCounts classify_pairs(const RunView& a, const RunView& b, const ClassifyOptions& opts) {
    const auto docs_a = by_doc(a);
    const auto docs_b = by_doc(b);
    if (docs_a.size() != docs_b.size() ||
        !std::equal(docs_a.begin(), docs_a.end(), docs_b.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; })) {
        throw AlignmentError("runs " + a.variant_id + " and " + b.variant_id + " cover different documents");
    }

    PairCounts counts;
    for (const auto& [doc, items_a] : docs_a) {
        const auto& items_b = docs_b.at(doc);
        // (rank, similarity, i, j); rank 2 identical, 1 paraphrase.
        std::vector<std::tuple<int, double, std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < items_a.size(); ++i) {
            for (std::size_t j = 0; j < items_b.size(); ++j) {
                const auto& x = items_a[i];
                const auto& y = items_b[j];
                if (x.question == y.question) {
                    edges.emplace_back(2, 1.0, i, j);
                    continue;
                }
                const double sim = jaccard(x.tokens, y.tokens);
                const bool same_grounding = x.answer == y.answer && x.path == y.path;
                if (sim >= opts.jaccard_threshold || same_grounding) edges.emplace_back(1, sim, i, j);
            }
        }
        std::sort(edges.begin(), edges.end(), [](const auto& l, const auto& r) {
            if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
            if (std::get<1>(l) != std::get<1>(r)) return std::get<1>(l) > std::get<1>(r);
            return std::tie(std::get<2>(l), std::get<3>(l)) < std::tie(std::get<2>(r), std::get<3>(r));
        });
        std::vector<bool> used_a(items_a.size()), used_b(items_b.size());
        std::int64_t matched = 0;
        for (const auto& [rank, sim, i, j] : edges) {
            if (used_a[i] || used_b[j]) continue;
            used_a[i] = used_b[j] = true;
            ++matched;
            if (rank == 2) {
                ++counts.identical;
            } else {
                ++counts.paraphrased;
            }
        }
        counts.unique += static_cast<std::int64_t>(std::max(items_a.size(), items_b.size())) - matched;
    }
    return counts;
}

// ---------------------------------------------------------------------------

KeywordTopicLabeler::KeywordTopicLabeler() {
    const std::vector<std::vector<const char*>> words{
        {"sport", "sports", "team", "club", "football", "soccer", "basketball", "baseball", "hockey", "tennis",
         "golf", "olympic", "olympics", "league", "championship", "player", "coach", "stadium", "cup", "athlete",
         "race", "medal", "tournament", "season"},
        {"science", "scientist", "physics", "chemistry", "biology", "species", "genus", "discovered", "theory",
         "element", "planet", "astronomer", "university", "research", "mathematician", "physicist", "chemist",
         "disease", "medicine", "gene", "academic", "doctoral", "nobel"},
        {"finance", "bank", "company", "corporation", "market", "stock", "economy", "economist", "currency",
         "investment", "revenue", "founded", "founder", "business", "industry", "ceo", "trade", "financial",
         "firm", "headquarters", "subsidiary"},
        {"technology", "software", "computer", "programming", "internet", "engineer", "engineering", "device",
         "developer", "developed", "algorithm", "telecommunications", "video", "game", "games", "electronics",
         "network", "operating", "app", "digital", "manufacturer"},
        {"politics", "political", "president", "minister", "party", "election", "elected", "government",
         "senator", "parliament", "politician", "king", "queen", "country", "capital", "state", "mayor",
         "governor", "diplomat", "war", "treaty", "member"},
        {"entertainment", "film", "movie", "actor", "actress", "music", "musician", "album", "song", "band",
         "singer", "television", "series", "novel", "author", "book", "director", "directed", "character",
         "award", "starring", "artist", "painting", "festival", "written", "wrote"},
    };
    for (std::size_t t = 0; t < words.size(); ++t) {
        for (const auto* w : words[t]) keyword_topic_.emplace(w, t);
    }
}

std::string KeywordTopicLabeler::label(const QaCandidate& c) const {
    const auto& topics = labels();
    std::vector<int> hits(topics.size(), 0);
    for (const auto* s : {&c.question, &c.answer}) {
        for (const auto& tok : text::word_tokens(*s)) {
            if (const auto it = keyword_topic_.find(tok); it != keyword_topic_.end()) ++hits[it->second];
        }
    }
    const auto best = std::max_element(hits.begin(), hits.end());
    if (*best > 0) return topics[static_cast<std::size_t>(best - hits.begin())];
    return topics[stable_hash64(text::normalize_question(c.question)) % topics.size()];
}

TableTopicLabeler::TableTopicLabeler(std::map<std::string, std::string> by_question, std::vector<std::string> labels,
                                     std::string fallback)
    : labels_(std::move(labels)), fallback_(std::move(fallback)) {
    if (std::find(labels_.begin(), labels_.end(), fallback_) == labels_.end()) {
        throw ConfigError("fallback topic '" + fallback_ + "' is not a known label");
    }
    for (auto& [q, l] : by_question) {
        if (std::find(labels_.begin(), labels_.end(), l) == labels_.end()) {
            throw ConfigError("topic '" + l + "' is not a known label");
        }
        by_question_.emplace(text::normalize_question(q), std::move(l));
    }
}

TableTopicLabeler TableTopicLabeler::from_tsv(const std::string& path, std::vector<std::string> labels,
                                              std::string fallback) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open topic label file '" + path + "'");
    std::map<std::string, std::string> table;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw ParseError(n, "expected question<TAB>label");
        table[line.substr(0, tab)] = text::trim(line.substr(tab + 1));
    }
    return TableTopicLabeler(std::move(table), std::move(labels), std::move(fallback));
}

std::string TableTopicLabeler::label(const QaCandidate& c) const {
    const auto it = by_question_.find(text::normalize_question(c.question));
    return it == by_question_.end() ? fallback_ : it->second;
}

CallbackTopicLabeler::CallbackTopicLabeler(Fn fn, std::vector<std::string> labels)
    : fn_(std::move(fn)), labels_(std::move(labels)) {}

std::string CallbackTopicLabeler::label(const QaCandidate& c) const {
    auto l = fn_(c);
    if (std::find(labels_.begin(), labels_.end(), l) == labels_.end()) {
        throw ConfigError("topic labeler returned unknown label '" + l + "'");
    }
    return l;
}

TopicDistribution topic_distribution(std::span<const QaCandidate> items, const TopicLabeler& labeler) {
    TopicDistribution d;
    d.labels = labeler.labels();
    d.counts.assign(d.labels.size(), 0);
    for (const auto& c : items) {
        const auto l = labeler.label(c);
        const auto it = std::find(d.labels.begin(), d.labels.end(), l);
        if (it == d.labels.end()) throw ConfigError("topic labeler returned unknown label '" + l + "'");
        ++d.counts[static_cast<std::size_t>(it - d.labels.begin())];
        ++d.total;
    }
    return d;
}

// ---------------------------------------------------------------------------

RunComparison compare_runs(const RunView& a, const RunView& b, const TopicLabeler& labeler,
                           const ClassifyOptions& opts) {
    RunComparison out;
    out.run_a = a.variant_id;
    out.run_b = b.variant_id;
    out.label = a.variant_id + " vs " + b.variant_id;
    const auto counts = classify_pairs(a, b, opts);
    out.identical = counts.identical;
    out.paraphrased = counts.paraphrased;
    out.unique = counts.unique;

    out.topics_a = topic_distribution(a.items, labeler);
    out.topics_b = topic_distribution(b.items, labeler);
    std::vector<std::vector<double>> table(2);
    for (std::size_t j = 0; j < out.topics_a.labels.size(); ++j) {
        if (out.topics_a.counts[j] + out.topics_b.counts[j] == 0) continue;
        table[0].push_back(static_cast<double>(out.topics_a.counts[j]));
        table[1].push_back(static_cast<double>(out.topics_b.counts[j]));
    }
    if (table[0].size() < 2) {
        if (out.topics_a.total == 0 || out.topics_b.total == 0) {
            throw DegenerateTableError("run " + (out.topics_a.total == 0 ? a.variant_id : b.variant_id) +
                                       " has no QA items to compare");
        }
        return out;  // one shared topic: nothing to test
    }
    const auto test = chi_square(table);
    out.chi2 = test.chi2;
    out.dof = test.dof;
    out.p_value = test.p_value;
    out.cramers_v = cramers_v(test.chi2, static_cast<double>(out.topics_a.total + out.topics_b.total), 2,
                              static_cast<int>(table[0].size()));
    return out;
}

nlohmann::ordered_json to_json(const RunComparison& r) {
    nlohmann::ordered_json j;
    j["run_a"] = r.run_a;
    j["run_b"] = r.run_b;
    j["label"] = r.label;
    j["identical"] = r.identical;
    j["paraphrased"] = r.paraphrased;
    j["unique"] = r.unique;
    j["chi2"] = r.chi2;
    j["dof"] = r.dof;
    j["p_value"] = r.p_value;
    j["cramers_v"] = r.cramers_v;
    for (const auto& [key, d] : {std::pair{"topics_a", &r.topics_a}, std::pair{"topics_b", &r.topics_b}}) {
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < d->labels.size(); ++i) t[d->labels[i]] = d->counts[i];
        j[key] = t;
    }
    return j;
}

RunComparison comparison_from_json(const nlohmann::json& j) {
    RunComparison r;
    r.run_a = j.at("run_a").get<std::string>();
    r.run_b = j.at("run_b").get<std::string>();
    r.label = j.value("label", r.run_a + " vs " + r.run_b);
    r.identical = j.at("identical").get<std::int64_t>();
    r.paraphrased = j.at("paraphrased").get<std::int64_t>();
    r.unique = j.at("unique").get<std::int64_t>();
    r.chi2 = j.at("chi2").get<double>();
    r.dof = j.value("dof", 0);
    r.p_value = j.at("p_value").get<double>();
    r.cramers_v = j.at("cramers_v").get<double>();
    return r;
}

std::string render_table(std::span<const RunComparison> rows) {
    const std::vector<std::string> header{"Comparison", "Identical", "Paraphrased", "Unique", "χ²", "p-value", "φc"};
    std::vector<std::vector<std::string>> cells{header};
    for (const auto& r : rows) {
        cells.push_back({r.label, std::to_string(r.identical), std::to_string(r.paraphrased), std::to_string(r.unique),
                         fixed(r.chi2, 2), fixed(r.p_value, 4), fixed(r.cramers_v, 4)});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
    }
    std::string out;
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += i + 1 == row.size() ? row[i] : pad(row[i], width[i] + 2);
        }
        out += line + '\n';
    }
    return out;
}

std::string summary_line(const RunComparison& r) {
    return r.label + ": " + std::to_string(r.identical) + " / " + std::to_string(r.paraphrased) + " / " +
           std::to_string(r.unique) + ", χ²=" + fixed(r.chi2, 2) + ", p=" + fixed(r.p_value, 4) +
           ", φc=" + fixed(r.cramers_v, 4);
}

}  // namespace dkgqa::stats
