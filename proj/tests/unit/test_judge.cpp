#include "dkgqa/errors.hpp"
#include "dkgqa/judge.hpp"

#include <doctest.h>

#include <atomic>
#include <bitset>

using namespace dkgqa;

namespace {

const char* kGoodQuestion = R"({"question": "q", "logical_structure_flag": true, "logical_structure_reasoning": "fine",
  "redundancy_flag": false, "redundancy_reasoning": "answer not given away"})";
const char* kGoodAnswer = R"({"answer_support_flag": true, "answer_support_reasoning": "facts entail it",
  "answer_adequacy_flag": true, "answer_adequacy_reasoning": "direct"})";

QaCandidate candidate() {
    QaCandidate c;
    c.question = "Who directed the film featuring John McClane?";
    c.answer = "John McTiernan";
    c.supporting_path = {{"John McClane", "featured in", "Die Hard"}, {"Die Hard", "directed by", "John McTiernan"}};
    c.doc_id = "d";
    return c;
}

JudgeVerdicts verdicts(const std::string& id, std::bitset<4> f) {
    JudgeVerdicts v;
    v.judge_id = id;
    v.question = QuestionVerdict{f[0], "r", f[1], "r", id};
    v.answer = AnswerVerdict{f[2], "r", f[3], "r", id};
    return v;
}

// Replies to P2/P3 by looking at the prompt; records temperatures seen.
class PanelProvider final : public ChatProvider {
public:
    ChatResponse send(const ChatRequest& r) override {
        if (r.temperature != 0.0) nonzero_temperature = true;
        if (r.model_id == "broken") return ChatResponse{"I cannot comply.", {}, {}, 1};
        if (r.model_id == "offline") throw ProviderError("auth", false, 401);
        const bool p2 = r.system_prompt.rfind("As an expert evaluator, your role is to assess the quality", 0) == 0;
        if (p2) {
            const bool redundant = r.user_prompt.find("John McTiernan") != std::string::npos;
            return ChatResponse{redundant ? R"({"logical_structure_flag": True, "logical_structure_reasoning": "ok",
                                  "redundancy_flag": True, "redundancy_reasoning": "names the answer"})"
                                          : kGoodQuestion,
                                {}, {}, 1};
        }
        return ChatResponse{kGoodAnswer, {}, {}, 1};
    }
    std::string name() const override { return "panel"; }
    std::atomic<bool> nonzero_temperature{false};
};

}  // namespace

TEST_CASE("parse P2 and P3 replies") {
    const auto q = parse_question_verdict(kGoodQuestion, "j1");
    CHECK(q.logical_structure_flag);
    CHECK_FALSE(q.redundancy_flag);
    CHECK(q.judge_id == "j1");
    const auto a = parse_answer_verdict(kGoodAnswer, "j1");
    CHECK(a.answer_support_flag);
    CHECK(a.answer_adequacy_flag);
    CHECK(favorable(q, a));

    const auto unsupported = parse_answer_verdict(
        R"(```json
{"answer_support_flag": "False", "answer_support_reasoning": "facts do not mention him",
 "answer_adequacy_flag": true, "answer_adequacy_reasoning": "direct"}
```)",
        "j2");
    CHECK_FALSE(unsupported.answer_support_flag);
    CHECK_FALSE(favorable(q, unsupported));

    const auto partial = parse_answer_verdict(
        R"({"answer_support_flag": true, "answer_support_reasoning": "ok", "answer_adequacy_flag": false,
            "answer_adequacy_reasoning": "only half the answer"})",
        "j3");
    CHECK_FALSE(partial.answer_adequacy_flag);
}

TEST_CASE("malformed judge replies make the judge unavailable") {
    CHECK_THROWS_AS(parse_question_verdict("The question looks fine to me.", "j"), JudgeUnavailableError);
    CHECK_THROWS_AS(parse_question_verdict(R"({"logical_structure_flag": true})", "j"), JudgeUnavailableError);
    CHECK_THROWS_AS(parse_question_verdict(R"({"logical_structure_flag": 1, "logical_structure_reasoning": "x",
        "redundancy_flag": false, "redundancy_reasoning": "y"})", "j"),
                    JudgeUnavailableError);
    CHECK_THROWS_AS(parse_answer_verdict(R"({"answer_support_flag": true, "answer_support_reasoning": "",
        "answer_adequacy_flag": true, "answer_adequacy_reasoning": "y"})", "j"),
                    JudgeUnavailableError);
}

TEST_CASE("decide: unanimity examples") {
    CHECK(decide({verdicts("a", 0b1101), verdicts("b", 0b1101), verdicts("c", 0b1101)}, 3).accepted);

    const auto one_redundant = decide({verdicts("a", 0b1101), verdicts("b", 0b1101), verdicts("c", 0b1111)}, 3);
    CHECK_FALSE(one_redundant.accepted);
    REQUIRE(one_redundant.rejection_causes.size() == 1);
    CHECK(one_redundant.rejection_causes[0] == "judge 3 (c): redundancy_flag=true");

    auto missing = verdicts("c", 0b1101);
    missing.answer.reset();
    missing.error = "timeout";
    const auto m = decide({verdicts("a", 0b1101), verdicts("b", 0b1101), missing}, 3);
    CHECK_FALSE(m.accepted);
    CHECK(m.rejection_causes[0] == "judge 3 (c) unavailable: timeout");

    CHECK_FALSE(decide({verdicts("a", 0b1101), verdicts("b", 0b1101)}, 3).accepted);
    CHECK_FALSE(decide({}, 0).accepted);
}

TEST_CASE("decide equals the 4-flag conjunction on all 2^12 matrices") {
    int mismatches = 0;
    for (std::uint32_t m = 0; m < (1u << 12); ++m) {
        std::vector<JudgeVerdicts> v;
        bool expected = true;
        for (int j = 0; j < 3; ++j) {
            const std::bitset<4> f((m >> (4 * j)) & 0xF);
            expected = expected && f[0] && !f[1] && f[2] && f[3];
            v.push_back(verdicts("j" + std::to_string(j), f));
        }
        const auto d = decide(v, 3);
        if (d.accepted != expected) ++mismatches;
        CHECK(d.accepted == d.rejection_causes.empty());
    }
    CHECK(mismatches == 0);
}

TEST_CASE("panel runs P2/P3 at temperature 0 and fails closed") {
    const auto prompts = PromptSet::embedded();
    auto provider = std::make_shared<PanelProvider>();
    GatewayConfig cfg;
    cfg.retry.max_retries = 0;
    LlmGateway gw(provider, cfg);

    auto c = candidate();
    c.question = "Who directed the film featuring John McClane?";
    const JudgePanel good(gw, {"j1", "j2", "j3"}, prompts);
    const auto d = good.evaluate(c);
    CHECK(d.accepted);
    REQUIRE(d.verdicts.size() == 3);
    CHECK(d.verdicts[1].judge_id == "j2");
    CHECK_FALSE(provider->nonzero_temperature);

    c.question = "Was it John McTiernan who directed Die Hard?";
    const auto redundant = good.evaluate(c);
    CHECK_FALSE(redundant.accepted);
    CHECK(redundant.verdicts[0].question->redundancy_flag);
    CHECK(redundant.rejection_causes.size() == 3);

    c = candidate();
    const JudgePanel with_broken(gw, {"j1", "broken", "offline"}, prompts);
    const auto b = with_broken.evaluate(c);
    CHECK_FALSE(b.accepted);
    CHECK_FALSE(b.verdicts[1].question.has_value());
    CHECK_FALSE(b.verdicts[2].question.has_value());
    CHECK(b.rejection_causes.size() == 2);
}

TEST_CASE("judge calls surface provider failures as judge-unavailable") {
    auto provider = std::make_shared<PanelProvider>();
    LlmGateway gw(provider);
    CHECK_THROWS_AS(judge_question(candidate(), gw, "offline", PromptSet::embedded()), JudgeUnavailableError);
    CHECK_THROWS_AS(judge_answer(candidate(), gw, "broken", PromptSet::embedded()), JudgeUnavailableError);
}
