#pragma once

#include "dkgqa/qa_gen.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dkgqa::stats {

/// P(X >= x) for X ~ Gamma(a, 1), regularized: Q(a, x) = Γ(a, x) / Γ(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double chi2, double dof);

struct ChiSquareResult {
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson test of independence on an r x c table of counts. Throws
/// DegenerateTableError on a ragged table, fewer than 2 rows or columns, or
/// any zero row/column total.
ChiSquareResult chi_square(const std::vector<std::vector<double>>& table);

/// sqrt(chi2 / (n * min(r-1, c-1))). Throws DegenerateTableError unless
/// n > 0 and min(r, c) >= 2.
double cramers_v(double chi2, double n, int r, int c);

// ---------------------------------------------------------------------------

/// One dynamic variant as seen by the consistency analysis.
struct RunView {
    std::string variant_id;
    std::vector<std::string> doc_ids;  // every document the run was generated from
    std::vector<QaCandidate> items;
};

struct ClassifyOptions {
    double jaccard_threshold = 0.6;
};

struct PairCounts {
    std::int64_t identical = 0;
    std::int64_t paraphrased = 0;
    std::int64_t unique = 0;

    std::int64_t total() const noexcept { return identical + paraphrased + unique; }
    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

/// Token Jaccard similarity of two normalized questions.
double question_jaccard(const std::string& a, const std::string& b);

/// Greedy best matching of questions per document. Identical pairs are taken
/// first, then paraphrases by descending Jaccard. Each document contributes
/// max(|a_d|, |b_d|) pairable items; whatever is not matched is unique.
/// Throws AlignmentError if the runs cover different documents or an item
/// names a document outside its run.
PairCounts classify_pairs(const RunView& a, const RunView& b, const ClassifyOptions& opts = {});

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& default_topics() {
    static const std::vector<std::string> topics{"sports",   "science",  "finance",
                                                 "technology", "politics", "entertainment"};
    return topics;
}

class TopicLabeler {
public:
    virtual ~TopicLabeler() = default;
    virtual const std::vector<std::string>& labels() const = 0;
    virtual std::string label(const QaCandidate& c) const = 0;
};

/// Keyword rules over the question and answer tokens. The label with the most
/// hits wins, ties to the earlier label; with no hits the label is picked by a
/// stable hash of the normalized question.
class KeywordTopicLabeler final : public TopicLabeler {
public:
    KeywordTopicLabeler();
    const std::vector<std::string>& labels() const override { return default_topics(); }
    std::string label(const QaCandidate& c) const override;

private:
    std::map<std::string, std::size_t> keyword_topic_;
};

/// Labels produced elsewhere (e.g. by a zero-shot classifier): TSV lines of
/// `question<TAB>label`, matched on the normalized question.
class TableTopicLabeler final : public TopicLabeler {
public:
    TableTopicLabeler(std::map<std::string, std::string> by_question, std::vector<std::string> labels,
                      std::string fallback);
    static TableTopicLabeler from_tsv(const std::string& path, std::vector<std::string> labels = default_topics(),
                                      std::string fallback = "entertainment");
    const std::vector<std::string>& labels() const override { return labels_; }
    std::string label(const QaCandidate& c) const override;

private:
    std::map<std::string, std::string> by_question_;
    std::vector<std::string> labels_;
    std::string fallback_;
};

/// Adapter for a callable, used by the Python bindings.
class CallbackTopicLabeler final : public TopicLabeler {
public:
    using Fn = std::function<std::string(const QaCandidate&)>;
    CallbackTopicLabeler(Fn fn, std::vector<std::string> labels = default_topics());
    const std::vector<std::string>& labels() const override { return labels_; }
    std::string label(const QaCandidate& c) const override;

private:
    Fn fn_;
    std::vector<std::string> labels_;
};

struct TopicDistribution {
    std::vector<std::string> labels;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
};

TopicDistribution topic_distribution(std::span<const QaCandidate> items, const TopicLabeler& labeler);

// ---------------------------------------------------------------------------

struct RunComparison {
    std::string run_a;
    std::string run_b;
    std::int64_t identical = 0;
    std::int64_t paraphrased = 0;
    std::int64_t unique = 0;
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
    double cramers_v = 0.0;
    TopicDistribution topics_a;
    TopicDistribution topics_b;

    /// "Run 1 vs 2" style row heading.
    std::string label;
};

/// Builds the run-by-topic table, drops topics neither run used, and tests
/// it. With fewer than two topics left the runs cannot differ: chi2 = 0,
/// dof = 0, p = 1, V = 0.
RunComparison compare_runs(const RunView& a, const RunView& b, const TopicLabeler& labeler,
                           const ClassifyOptions& opts = {});

nlohmann::ordered_json to_json(const RunComparison& r);
RunComparison comparison_from_json(const nlohmann::json& j);

/// Plain-text table with the columns Comparison, Identical, Paraphrased,
/// Unique, χ², p-value, φc (χ² to 2 places, p and φc to 4).
std::string render_table(std::span<const RunComparison> rows);
/// "Run 1 vs 2: 8 / 308 / 1684, χ²=3.33, p=0.6489, φc=0.0288"
std::string summary_line(const RunComparison& r);

}  // namespace dkgqa::stats
