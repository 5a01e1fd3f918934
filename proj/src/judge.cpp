#include "dkgqa/judge.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/llm_json.hpp"

#include <future>

namespace dkgqa {

namespace {

using nlohmann::json;

json parse_reply(const std::string& text, const std::string& judge_id) {
    auto doc = parse_llm_object(text);
    if (!doc) throw JudgeUnavailableError("judge " + judge_id + " returned no parseable JSON object");
    return std::move(*doc);
}

bool flag(const json& doc, const char* key, const std::string& judge_id) {
    const auto it = doc.find(key);
    const auto v = it == doc.end() ? std::nullopt : json_flag(*it);
    if (!v) throw JudgeUnavailableError("judge " + judge_id + ": missing or non-boolean \"" + key + "\"");
    return *v;
}

std::string reasoning(const json& doc, const char* key, const std::string& judge_id) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw JudgeUnavailableError("judge " + judge_id + ": missing \"" + key + "\"");
    }
    return it->get<std::string>();
}

std::string complete(LlmGateway& gateway, const ChatPrompt& prompt, const std::string& judge_model,
                     int max_output_tokens) {
    try {
        return gateway.complete(ChatRequest{prompt.system, prompt.user, 0.0, max_output_tokens, judge_model}).text;
    } catch (const JudgeUnavailableError&) {
        throw;
    } catch (const Error& e) {
        throw JudgeUnavailableError("judge " + judge_model + " failed: " + e.what());
    }
}

}  // namespace

QuestionVerdict parse_question_verdict(const std::string& text, const std::string& judge_id) {
    const auto doc = parse_reply(text, judge_id);
    QuestionVerdict v;
    v.judge_id = judge_id;
    v.logical_structure_flag = flag(doc, "logical_structure_flag", judge_id);
    v.logical_structure_reasoning = reasoning(doc, "logical_structure_reasoning", judge_id);
    v.redundancy_flag = flag(doc, "redundancy_flag", judge_id);
    v.redundancy_reasoning = reasoning(doc, "redundancy_reasoning", judge_id);
    return v;
}

AnswerVerdict parse_answer_verdict(const std::string& text, const std::string& judge_id) {
    const auto doc = parse_reply(text, judge_id);
    AnswerVerdict v;
    v.judge_id = judge_id;
    v.answer_support_flag = flag(doc, "answer_support_flag", judge_id);
    v.answer_support_reasoning = reasoning(doc, "answer_support_reasoning", judge_id);
    v.answer_adequacy_flag = flag(doc, "answer_adequacy_flag", judge_id);
    v.answer_adequacy_reasoning = reasoning(doc, "answer_adequacy_reasoning", judge_id);
    return v;
}

QuestionVerdict judge_question(const QaCandidate& c, LlmGateway& gateway, const std::string& judge_model,
                               const PromptSet& prompts, int max_output_tokens) {
    const auto prompt = prompts.judge_question.render({{"question", c.question}});
    return parse_question_verdict(complete(gateway, prompt, judge_model, max_output_tokens), judge_model);
}

AnswerVerdict judge_answer(const QaCandidate& c, LlmGateway& gateway, const std::string& judge_model,
                           const PromptSet& prompts, int max_output_tokens) {
    const auto prompt = prompts.judge_answer.render(
        {{"question", c.question}, {"answer", c.answer}, {"supporting_facts", serialize_path(c.supporting_path)}});
    return parse_answer_verdict(complete(gateway, prompt, judge_model, max_output_tokens), judge_model);
}

bool favorable(const QuestionVerdict& q, const AnswerVerdict& a) {
    return q.logical_structure_flag && !q.redundancy_flag && a.answer_support_flag && a.answer_adequacy_flag;
}

PanelDecision decide(std::vector<JudgeVerdicts> verdicts, std::size_t panel_size) {
    PanelDecision d;
    d.verdicts = std::move(verdicts);
    if (panel_size == 0) d.rejection_causes.push_back("empty judge panel");
    if (d.verdicts.size() < panel_size) {
        d.rejection_causes.push_back(std::to_string(panel_size - d.verdicts.size()) + " judge(s) returned nothing");
    }
    for (std::size_t i = 0; i < d.verdicts.size(); ++i) {
        const auto& v = d.verdicts[i];
        const auto who = "judge " + std::to_string(i + 1) + " (" + v.judge_id + ")";
        if (!v.question || !v.answer) {
            d.rejection_causes.push_back(who + " unavailable" + (v.error.empty() ? "" : ": " + v.error));
            continue;
        }
        if (!v.question->logical_structure_flag) d.rejection_causes.push_back(who + ": logical_structure_flag=false");
        if (v.question->redundancy_flag) d.rejection_causes.push_back(who + ": redundancy_flag=true");
        if (!v.answer->answer_support_flag) d.rejection_causes.push_back(who + ": answer_support_flag=false");
        if (!v.answer->answer_adequacy_flag) d.rejection_causes.push_back(who + ": answer_adequacy_flag=false");
    }
    d.accepted = d.rejection_causes.empty();
    return d;
}

JudgePanel::JudgePanel(LlmGateway& gateway, std::vector<std::string> judge_models, const PromptSet& prompts,
                       int max_output_tokens)
    : gateway_(gateway), judges_(std::move(judge_models)), prompts_(prompts), max_output_tokens_(max_output_tokens) {}

PanelDecision JudgePanel::evaluate(const QaCandidate& c) const {
    auto one = [this, &c](const std::string& judge) {
        JudgeVerdicts v;
        v.judge_id = judge;
        try {
            v.question = judge_question(c, gateway_, judge, prompts_, max_output_tokens_);
            v.answer = judge_answer(c, gateway_, judge, prompts_, max_output_tokens_);
        } catch (const JudgeUnavailableError& e) {
            v.error = e.what();
        }
        return v;
    };
    std::vector<JudgeVerdicts> verdicts;
    if (judges_.size() <= 1) {
        for (const auto& j : judges_) verdicts.push_back(one(j));
    } else {
        std::vector<std::future<JudgeVerdicts>> pending;
        for (const auto& j : judges_) pending.push_back(std::async(std::launch::async, one, j));
        for (auto& f : pending) verdicts.push_back(f.get());
    }
    return decide(std::move(verdicts), judges_.size());
}

}  // namespace dkgqa
