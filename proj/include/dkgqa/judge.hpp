#pragma once

#include "dkgqa/llm_gateway.hpp"
#include "dkgqa/prompts.hpp"
#include "dkgqa/qa_gen.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dkgqa {

struct QuestionVerdict {
    bool logical_structure_flag = false;
    std::string logical_structure_reasoning;
    bool redundancy_flag = true;
    std::string redundancy_reasoning;
    std::string judge_id;

    friend bool operator==(const QuestionVerdict&, const QuestionVerdict&) = default;
};

struct AnswerVerdict {
    bool answer_support_flag = false;
    std::string answer_support_reasoning;
    bool answer_adequacy_flag = false;
    std::string answer_adequacy_reasoning;
    std::string judge_id;

    friend bool operator==(const AnswerVerdict&, const AnswerVerdict&) = default;
};

/// What one judge said about one candidate. A missing verdict means the judge
/// was unavailable; `error` says why.
struct JudgeVerdicts {
    std::string judge_id;
    std::optional<QuestionVerdict> question;
    std::optional<AnswerVerdict> answer;
    std::string error;
};

struct PanelDecision {
    std::vector<JudgeVerdicts> verdicts;  // panel-configuration order
    bool accepted = false;
    /// Empty iff accepted.
    std::vector<std::string> rejection_causes;
};

/// Parse P2/P3 replies. Both flags and non-empty reasonings are required;
/// anything else throws JudgeUnavailableError.
QuestionVerdict parse_question_verdict(const std::string& text, const std::string& judge_id);
AnswerVerdict parse_answer_verdict(const std::string& text, const std::string& judge_id);

/// P2 at temperature 0. Gateway and parse failures surface as
/// JudgeUnavailableError.
QuestionVerdict judge_question(const QaCandidate& c, LlmGateway& gateway, const std::string& judge_model,
                               const PromptSet& prompts, int max_output_tokens = 1024);
/// P3 at temperature 0 with the supporting path serialized one triple per line.
AnswerVerdict judge_answer(const QaCandidate& c, LlmGateway& gateway, const std::string& judge_model,
                           const PromptSet& prompts, int max_output_tokens = 1024);

/// True iff logical structure holds, the question is not redundant, and the
/// answer is supported and adequate.
bool favorable(const QuestionVerdict& q, const AnswerVerdict& a);

/// Unanimity over `panel_size` judges. Fewer verdict sets than judges, or any
/// judge missing either verdict, rejects.
PanelDecision decide(std::vector<JudgeVerdicts> verdicts, std::size_t panel_size);

/// Runs every judge of the panel on a candidate concurrently, then decides.
class JudgePanel {
public:
    JudgePanel(LlmGateway& gateway, std::vector<std::string> judge_models, const PromptSet& prompts,
               int max_output_tokens = 1024);

    const std::vector<std::string>& judges() const noexcept { return judges_; }
    PanelDecision evaluate(const QaCandidate& c) const;

private:
    LlmGateway& gateway_;
    std::vector<std::string> judges_;
    const PromptSet& prompts_;
    int max_output_tokens_;
};

}  // namespace dkgqa
