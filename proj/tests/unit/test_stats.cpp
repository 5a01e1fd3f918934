#include "dkgqa/errors.hpp"
#include "dkgqa/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace dkgqa;
using namespace dkgqa::stats;

namespace {

// Closed forms of the chi-square upper tail for integer k, in long double:
//   even k: e^{-x/2} Σ_{i<k/2} (x/2)^i / i!
//   odd k:  erfc(sqrt(x/2)) + e^{-x/2} Σ_{i=0}^{(k-3)/2} (x/2)^{i+1/2} / Γ(i+3/2)
long double closed_form_sf(int k, long double x) {
    const long double h = x / 2.0L;
    if (k % 2 == 0) {
        long double term = 1.0L, sum = 1.0L;
        for (int i = 1; i < k / 2; ++i) {
            term *= h / i;
            sum += term;
        }
        return std::exp(-h) * sum;
    }
    long double sum = std::erfc(std::sqrt(h));
    long double term = std::sqrt(h) / std::tgamma(1.5L);  // i = 0
    for (int i = 0; i <= (k - 3) / 2; ++i) {
        sum += std::exp(-h) * term;
        term *= h / (i + 1.5L);
    }
    return sum;
}

QaCandidate qa(std::string doc, std::string q, std::string a = "ans", std::vector<PathTriple> path = {{"s", "p", "o"}}) {
    QaCandidate c;
    c.doc_id = std::move(doc);
    c.question = std::move(q);
    c.answer = std::move(a);
    c.supporting_path = std::move(path);
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("chi_square examples") {
    const auto even = chi_square({{15, 15}, {15, 15}});
    CHECK(even.chi2 == 0.0);
    CHECK(even.dof == 1);
    CHECK(even.p_value == 1.0);

    // E = 15 in every cell, each |O - E| = 5: 4 * 25 / 15 = 20/3.
    const auto skew = chi_square({{10, 20}, {20, 10}});
    CHECK(std::fabs(skew.chi2 - 20.0 / 3.0) < 1e-12);
    CHECK(skew.dof == 1);
    CHECK(std::fabs(skew.p_value - static_cast<double>(closed_form_sf(1, 20.0L / 3.0L))) < 1e-12);

    const auto same_rows = chi_square({{3, 5, 9}, {3, 5, 9}});
    CHECK(same_rows.chi2 == 0.0);
    CHECK(same_rows.dof == 2);
    CHECK(same_rows.p_value == 1.0);
}

TEST_CASE("chi_square rejects degenerate tables") {
    CHECK_THROWS_AS(chi_square({{0, 0}, {1, 2}}), DegenerateTableError);
    CHECK_THROWS_AS(chi_square({{0, 1}, {0, 2}}), DegenerateTableError);
    CHECK_THROWS_AS(chi_square({{1, 2}}), DegenerateTableError);
    CHECK_THROWS_AS(chi_square({{1}, {2}}), DegenerateTableError);
    CHECK_THROWS_AS(chi_square({{1, 2}, {3}}), DegenerateTableError);
    CHECK_THROWS_AS(chi_square({{1, -2}, {3, 4}}), DegenerateTableError);
}

TEST_CASE("p-values match the closed-form tail for dof 1..10, chi2 in [0, 50]") {
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) {
        for (int step = 0; step <= 500; ++step) {
            const double x = step * 0.1;
            const double got = chi_square_sf(x, k);
            worst = std::max(worst, std::fabs(got - static_cast<double>(closed_form_sf(k, x))));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("regularized_gamma_q edge cases") {
    CHECK(regularized_gamma_q(2.5, 0.0) == 1.0);
    CHECK(std::isnan(regularized_gamma_q(0.0, 1.0)));
    CHECK(std::isnan(regularized_gamma_q(1.0, -1.0)));
    CHECK(regularized_gamma_q(1.0, 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
    CHECK(regularized_gamma_q(3.0, 1e6) == 0.0);
}

TEST_CASE("cramers_v examples") {
    CHECK(cramers_v(0.0, 60, 2, 2) == 0.0);
    CHECK(std::fabs(cramers_v(20.0 / 3.0, 60, 2, 2) - 1.0 / 3.0) < 1e-12);
    CHECK(cramers_v(80.0, 80, 2, 2) == 1.0);
    CHECK_THROWS_AS(cramers_v(1.0, 0, 2, 2), DegenerateTableError);
    CHECK_THROWS_AS(cramers_v(1.0, 10, 1, 5), DegenerateTableError);
}

TEST_CASE("published consistency rows are reproducible from a 2x6 table") {
    // Each row prints chi2 to 2 places and p, V to 4. Search chi2 within the
    // rounding interval and n = |run a| + |run b| near 2 x 2000 for a pair
    // that reproduces all three printed values under dof = 5.
    struct Row {
        double chi2, p, v;
    };
    auto rounds_to = [](double x, double printed, double scale) {
        return std::fabs(std::round(x * scale) - std::round(printed * scale)) < 0.5;
    };
    for (const auto& r : {Row{3.33, 0.6489, 0.0288}, Row{1.86, 0.8679, 0.0216}, Row{3.45, 0.6311, 0.0293}}) {
        bool reproducible = false;
        int smallest_n = 0;
        for (int n = 4000; n <= 4050 && !reproducible; ++n) {
            for (int k = -500; k < 500 && !reproducible; ++k) {
                const double x = r.chi2 + k * 1e-5;
                if (rounds_to(chi_square_sf(x, 5), r.p, 1e4) && rounds_to(cramers_v(x, n, 2, 6), r.v, 1e4)) {
                    reproducible = true;
                    smallest_n = n;
                }
            }
        }
        CHECK_MESSAGE(reproducible, "chi2=" << r.chi2);
        CHECK(smallest_n <= 4010);
    }
}

TEST_CASE("classify_pairs: self, disjoint, paraphrase rules") {
    const RunView a{"A", {"d1", "d2"},
                    {qa("d1", "Who wrote Hamlet?", "Shakespeare"), qa("d1", "Where was he born?", "Stratford"),
                     qa("d2", "Which team won in 1999?", "Spurs")}};
    const auto self = classify_pairs(a, a);
    CHECK(self == PairCounts{3, 0, 0});

    const RunView disjoint{"B", {"d1", "d2"},
                           {qa("d1", "Name a river in Peru", "Amazon", {{"x", "y", "z"}}),
                            qa("d2", "What colour is snow", "white", {{"q", "r", "t"}})}};
    const auto d = classify_pairs(a, disjoint);
    CHECK(d == PairCounts{0, 0, 3});  // d1: max(2,1) = 2, d2: 1

    // Jaccard({who, wrote, x}, {who, is, the, author, of, x}) = 2/7, but the
    // answer and path agree.
    const std::vector<PathTriple> path{{"X", "author", "Jane"}};
    const RunView w1{"1", {"d"}, {qa("d", "Who wrote X?", "Jane", path)}};
    const RunView w2{"2", {"d"}, {qa("d", "Who is the author of X?", "jane", path)}};
    CHECK(question_jaccard("Who wrote X?", "Who is the author of X?") == doctest::Approx(2.0 / 7.0));
    CHECK(classify_pairs(w1, w2) == PairCounts{0, 1, 0});
    const RunView w3{"3", {"d"}, {qa("d", "Who is the author of X?", "Jane", {{"X", "author", "Bob"}})}};
    CHECK(classify_pairs(w1, w3) == PairCounts{0, 0, 1});

    // {a b c} vs {a b c d e}: 3/5, exactly at the threshold.
    const RunView t1{"1", {"d"}, {qa("d", "alpha beta gamma", "x", {{"1", "2", "3"}})}};
    const RunView t2{"2", {"d"}, {qa("d", "alpha beta gamma delta epsilon", "y", {{"4", "5", "6"}})}};
    CHECK(classify_pairs(t1, t2) == PairCounts{0, 1, 0});
    CHECK(classify_pairs(t1, t2, ClassifyOptions{0.61}) == PairCounts{0, 0, 1});

    // Normalization: case, whitespace, trailing punctuation.
    const RunView n1{"1", {"d"}, {qa("d", "Who  WROTE hamlet?!")}};
    const RunView n2{"2", {"d"}, {qa("d", "who wrote Hamlet")}};
    CHECK(classify_pairs(n1, n2) == PairCounts{1, 0, 0});
}

TEST_CASE("classify_pairs: identical matches are preferred over paraphrases") {
    const RunView a{"A", {"d"}, {qa("d", "alpha beta gamma delta"), qa("d", "alpha beta gamma")}};
    const RunView b{"B", {"d"}, {qa("d", "alpha beta gamma")}};
    CHECK(classify_pairs(a, b) == PairCounts{1, 0, 1});
}

TEST_CASE("classify_pairs: alignment errors") {
    const RunView a{"A", {"d1"}, {qa("d1", "q")}};
    const RunView b{"B", {"d2"}, {qa("d2", "q")}};
    CHECK_THROWS_AS(classify_pairs(a, b), AlignmentError);
    const RunView stray{"C", {"d1"}, {qa("d9", "q")}};
    CHECK_THROWS_AS(classify_pairs(a, stray), AlignmentError);
    const RunView empty_doc{"D", {"d1"}, {}};
    CHECK(classify_pairs(a, empty_doc) == PairCounts{0, 0, 1});
}

TEST_CASE("classify_pairs partitions the pairable set on random runs") {
    std::mt19937_64 rng(8);
    const std::vector<std::string> vocab{"who", "what", "film", "river", "born", "team", "city", "wrote", "x", "y"};
    for (int trial = 0; trial < 50; ++trial) {
        RunView a{"A", {}, {}}, b{"B", {}, {}};
        std::int64_t pairable = 0;
        for (int d = 0; d < 8; ++d) {
            const auto doc = "d" + std::to_string(d);
            a.doc_ids.push_back(doc);
            b.doc_ids.push_back(doc);
            const auto na = rng() % 5, nb = rng() % 5;
            pairable += static_cast<std::int64_t>(std::max(na, nb));
            for (auto* run : {&a, &b}) {
                for (std::uint64_t i = 0; i < (run == &a ? na : nb); ++i) {
                    std::string q;
                    for (int w = 0; w < 4; ++w) q += vocab[rng() % vocab.size()] + " ";
                    run->items.push_back(qa(doc, q, vocab[rng() % 3]));
                }
            }
        }
        const auto c = classify_pairs(a, b);
        CHECK(c.total() == pairable);
        CHECK(c.identical >= 0);
        CHECK(c.paraphrased >= 0);
        CHECK(c.unique >= 0);
    }
}

TEST_CASE("topic labelers") {
    const KeywordTopicLabeler k;
    CHECK(k.label(qa("d", "Which club did the striker join before the championship?")) == "sports");
    CHECK(k.label(qa("d", "Who directed the film starring Bruce Willis?")) == "entertainment");
    CHECK(k.label(qa("d", "Which party did the president belong to?")) == "politics");
    const auto fallback = k.label(qa("d", "Zyx qwv?"));
    CHECK(fallback == k.label(qa("d", "zyx   QWV")));

    const TableTopicLabeler t({{"Who wrote X?", "science"}}, default_topics(), "finance");
    CHECK(t.label(qa("d", "who wrote x")) == "science");
    CHECK(t.label(qa("d", "other")) == "finance");
    CHECK_THROWS_AS(TableTopicLabeler({{"q", "cooking"}}, default_topics(), "finance"), ConfigError);

    const CallbackTopicLabeler bad([](const QaCandidate&) { return std::string("cooking"); });
    CHECK_THROWS_AS(bad.label(qa("d", "q")), ConfigError);
}

TEST_CASE("compare_runs: identical runs and symmetry") {
    const RunView a{"Run 1", {"d1", "d2"},
                    {qa("d1", "Which club won the league?"), qa("d1", "Who directed the film?"),
                     qa("d2", "Which party won the election?")}};
    const KeywordTopicLabeler k;
    const auto same = compare_runs(a, a, k);
    CHECK(same.chi2 == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(same.cramers_v == 0.0);
    CHECK(same.identical == 3);

    const RunView b{"Run 2", {"d1", "d2"},
                    {qa("d1", "Which club won the cup?"), qa("d2", "Which team won the league?"),
                     qa("d2", "Which stadium hosted the final?"), qa("d2", "Which film won the award?")}};
    const auto ab = compare_runs(a, b, k);
    const auto ba = compare_runs(b, a, k);
    CHECK(ab.chi2 == doctest::Approx(ba.chi2).epsilon(1e-12));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    CHECK(ab.cramers_v == doctest::Approx(ba.cramers_v).epsilon(1e-12));
    CHECK(ab.dof == 2);  // three topics used
    CHECK(ab.label == "Run 1 vs Run 2");

    const RunView none{"Run 3", {"d1", "d2"}, {}};
    CHECK_THROWS_AS(compare_runs(a, none, k), DegenerateTableError);
}

TEST_CASE("runs drawn from one topic mix are judged similar at least 90% of the time") {
    const CallbackTopicLabeler by_prefix([](const QaCandidate& c) { return c.question.substr(0, c.question.find(':')); });
    const std::vector<double> weights{0.3, 0.25, 0.15, 0.12, 0.1, 0.08};
    int similar = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(1000 + trial);
        std::discrete_distribution<int> topic(weights.begin(), weights.end());
        RunView runs[2] = {{"a", {"d"}, {}}, {"b", {"d"}, {}}};
        for (auto& run : runs) {
            for (int i = 0; i < 300; ++i) {
                run.items.push_back(qa("d", default_topics()[static_cast<std::size_t>(topic(rng))] + ": q" +
                                                std::to_string(i) + run.variant_id));
            }
        }
        if (compare_runs(runs[0], runs[1], by_prefix).p_value > 0.05) ++similar;
    }
    CHECK(similar >= 90);
}

TEST_CASE("report: published row golden rendering and JSON round trip") {
    RunComparison r;
    r.label = "Run 1 vs 2";
    r.run_a = "run1";
    r.run_b = "run2";
    r.identical = 8;
    r.paraphrased = 308;
    r.unique = 1684;
    r.chi2 = 3.33;
    r.dof = 5;
    r.p_value = 0.6489;
    r.cramers_v = 0.0288;
    const std::vector<RunComparison> rows{r};
    CHECK(render_table(rows) == slurp(std::string(DKGQA_TEST_DATA_DIR) + "/table3_golden.txt"));
    CHECK(summary_line(r) == "Run 1 vs 2: 8 / 308 / 1684, χ²=3.33, p=0.6489, φc=0.0288");

    const auto back = comparison_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(back.label == r.label);
    CHECK(back.unique == 1684);
    CHECK(back.p_value == 0.6489);
}
