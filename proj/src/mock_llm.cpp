#include "dkgqa/mock_llm.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/text.hpp"

#include <nlohmann/json.hpp>

#include <random>
#include <set>

namespace dkgqa {

namespace {

using nlohmann::json;

constexpr char kSentinel = '\x1f';

struct Layout {
    std::vector<std::string> literals;  // size = names.size() + 1
    std::vector<std::string> names;
};

Layout layout_of(const PromptTemplate& tmpl) {
    std::map<std::string, std::string> marks;
    for (const auto& name : tmpl.placeholders()) marks[name] = std::string(1, kSentinel) + name + kSentinel;
    const auto rendered = tmpl.render(marks).user;
    Layout out;
    std::size_t pos = 0;
    while (true) {
        const auto open = rendered.find(kSentinel, pos);
        if (open == std::string::npos) {
            out.literals.push_back(rendered.substr(pos));
            break;
        }
        const auto close = rendered.find(kSentinel, open + 1);
        out.literals.push_back(rendered.substr(pos, open - pos));
        out.names.push_back(rendered.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    return out;
}

std::string system_of(const PromptTemplate& tmpl) {
    return tmpl.text().substr(0, tmpl.text().find("\n\n"));
}

bool bernoulli(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::string py_bool(bool b) { return b ? "True" : "False"; }

std::string generate(const std::string& triples_str, std::mt19937_64& rng, const SyntheticOptions& opt) {
    const auto triples = parse_triple_lines(triples_str);
    json pairs = json::array();

    std::set<std::string> entities;
    for (const auto& t : triples) {
        entities.insert(t.subject);
        entities.insert(t.object);
    }
    const std::vector<std::string> pool(entities.begin(), entities.end());

    const std::size_t wanted = std::min(opt.max_pairs, triples.size());
    for (std::size_t start = 0; start < triples.size() && pairs.size() < wanted; ++start) {
        std::vector<PathTriple> path{triples[start]};
        std::set<std::string> visited{triples[start].subject, triples[start].object};
        while (path.size() < opt.max_hops) {
            const auto& cur = path.back().object;
            const PathTriple* next = nullptr;
            for (const auto& t : triples) {
                if (t.subject == cur && !visited.contains(t.object)) {
                    next = &t;
                    break;
                }
            }
            if (next == nullptr) break;
            visited.insert(next->object);
            path.push_back(*next);
        }
        // Single facts only now and then, as the prompt discourages them.
        if (path.size() == 1 && !bernoulli(rng, 0.3)) continue;

        std::string question;
        const auto& first = path.front();
        if (path.size() == 1) {
            static const char* forms[] = {"What is the %p of %s?", "Which entity is the %p of %s?"};
            question = forms[rng() % 2];
        } else {
            static const char* forms[] = {"Starting from %s, which entity is reached by following %p?",
                                          "Which entity do you reach from %s via %p?",
                                          "Following %p from %s, where does the chain end?"};
            question = forms[rng() % 3];
        }
        std::string chain = first.predicate;
        for (std::size_t i = 1; i < path.size(); ++i) chain += ", then " + path[i].predicate;
        const auto put = [&question](const std::string& key, const std::string& value) {
            const auto at = question.find(key);
            if (at != std::string::npos) question.replace(at, key.size(), value);
        };
        put("%s", first.subject);
        put("%p", chain);
        std::string answer = path.back().object;

        if (bernoulli(rng, opt.redundant_rate)) {
            question.pop_back();
            question += ", namely " + answer + "?";
        }
        if (bernoulli(rng, opt.fabricate_rate)) {
            auto& step = path[rng() % path.size()];
            if (rng() % 2 == 0 || pool.size() < 3) {
                std::swap(step.subject, step.object);
            } else {
                step.object = pool[rng() % pool.size()] + " II";
            }
        }

        json steps = json::array();
        for (const auto& s : path) steps.push_back({{"subject", s.subject}, {"predicate", s.predicate}, {"object", s.object}});
        pairs.push_back({{"question", question}, {"answer", answer}, {"supporting_path", steps}});
    }

    json doc = {{"valid_qa_pairs", !pairs.empty()}, {"number_of_qa_pairs", pairs.size()}, {"qa_pairs", pairs}};
    auto body = doc.dump(2);
    // Some replies arrive fenced, as real models often do.
    if (rng() % 4 == 0) body = "```json\n" + body + "\n```";
    return body;
}

std::string judge_question(const std::string& question, std::mt19937_64& rng, const SyntheticOptions& opt) {
    const auto q = text::trim(question);
    bool logical = !q.empty() && q.back() == '?' && !(q[0] >= 'a' && q[0] <= 'z');
    std::string logical_why = logical ? "Well-formed interrogative sentence." : "Not a well-formed question.";
    if (logical && bernoulli(rng, opt.dissent_rate)) {
        logical = false;
        logical_why = "The chained phrasing reads awkwardly.";
    }
    const bool redundant = q.find(", namely ") != std::string::npos;
    const auto redundant_why =
        redundant ? "The question names its own answer." : "The answer does not appear in the question.";
    return "{\n  \"question\": " + json(q).dump() + ",\n  \"logical_structure_flag\": " + py_bool(logical) +
           ",\n  \"logical_structure_reasoning\": " + json(logical_why).dump() +
           ",\n  \"redundancy_flag\": " + py_bool(redundant) +
           ",\n  \"redundancy_reasoning\": " + json(redundant_why).dump() + "\n}";
}

std::string judge_answer(const std::string& answer, const std::string& facts) {
    const auto a = text::normalize_label(answer);
    bool supported = false;
    for (const auto& t : parse_triple_lines(facts)) {
        if (text::normalize_label(t.object) == a || text::normalize_label(t.subject) == a) supported = true;
    }
    const bool adequate = supported && !a.empty();
    json out;
    out["answer_support_flag"] = supported;
    out["answer_support_reasoning"] =
        supported ? "The answer is an entity of the supporting facts." : "No supporting fact mentions the answer.";
    out["answer_adequacy_flag"] = adequate;
    out["answer_adequacy_reasoning"] = adequate ? "A single entity directly answers the question."
                                                : "The answer does not resolve the question.";
    return out.dump(2);
}

}  // namespace

std::optional<std::map<std::string, std::string>> extract_placeholders(const PromptTemplate& tmpl,
                                                                       const ChatPrompt& prompt) {
    if (prompt.system != system_of(tmpl)) return std::nullopt;
    const auto layout = layout_of(tmpl);
    const auto& user = prompt.user;
    if (!user.starts_with(layout.literals.front())) return std::nullopt;
    std::map<std::string, std::string> out;
    std::size_t pos = layout.literals.front().size();
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        const auto& lit = layout.literals[i + 1];
        std::size_t end;
        if (i + 1 == layout.names.size()) {
            if (user.size() < pos + lit.size() || !user.ends_with(lit)) return std::nullopt;
            end = user.size() - lit.size();
        } else {
            end = user.find(lit, pos);
            if (end == std::string::npos) return std::nullopt;
        }
        out[layout.names[i]] = user.substr(pos, end - pos);
        pos = end + lit.size();
    }
    return out;
}

std::vector<PathTriple> parse_triple_lines(const std::string& text) {
    std::vector<PathTriple> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        auto line = text::trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        if (line.size() < 2 || line.front() != '(' || line.back() != ')') continue;
        line = line.substr(1, line.size() - 2);
        std::vector<std::string> parts;
        std::size_t p = 0;
        while (true) {
            const auto comma = line.find(", ", p);
            parts.push_back(line.substr(p, comma == std::string::npos ? std::string::npos : comma - p));
            if (comma == std::string::npos) break;
            p = comma + 2;
        }
        if (parts.size() == 3) out.push_back({parts[0], parts[1], parts[2]});
    }
    return out;
}

MockProvider::Responder synthetic_responder(PromptSet prompts, SyntheticOptions options) {
    return [prompts = std::move(prompts), options](const ChatRequest& request, std::uint64_t seed) -> std::string {
        std::mt19937_64 rng(seed);
        const ChatPrompt prompt{request.system_prompt, request.user_prompt};
        if (const auto v = extract_placeholders(prompts.generate, prompt)) {
            return generate(v->at("triples_str"), rng, options);
        }
        if (const auto v = extract_placeholders(prompts.judge_question, prompt)) {
            return judge_question(v->at("question"), rng, options);
        }
        if (const auto v = extract_placeholders(prompts.judge_answer, prompt)) {
            return judge_answer(v->at("answer"), v->at("supporting_facts"));
        }
        throw ProviderError("synthetic mock does not recognise the prompt", false);
    };
}

}  // namespace dkgqa
