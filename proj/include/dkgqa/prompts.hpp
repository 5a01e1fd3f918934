#pragma once

#include <map>
#include <string>
#include <vector>

namespace dkgqa {

struct ChatPrompt {
    std::string system;
    std::string user;
};

/// One of the shipped prompt templates. The first paragraph becomes the system
/// message; the rest, with `{name}` placeholders substituted, the user message.
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(std::string name, std::string text);

    const std::string& name() const noexcept { return name_; }
    const std::string& text() const noexcept { return text_; }
    std::string sha256() const;
    /// Placeholder names in order of first appearance.
    std::vector<std::string> placeholders() const;

    /// Single-pass substitution: values are inserted verbatim and never
    /// rescanned. Throws ConfigError if a placeholder has no value.
    ChatPrompt render(const std::map<std::string, std::string>& values) const;

private:
    std::string name_;
    std::string text_;
};

struct PromptSet {
    PromptTemplate generate;          // P1: {triples_str}
    PromptTemplate judge_question;    // P2: {question}
    PromptTemplate judge_answer;      // P3: {question}, {answer}, {supporting_facts}

    /// Copies compiled in from prompts/*.txt at build time.
    static PromptSet embedded();
    /// Reads p1.txt, p2.txt, p3.txt from `dir`; checks each template has
    /// exactly its expected placeholders.
    static PromptSet load(const std::string& dir);

    /// name -> sha256, for manifests.
    std::map<std::string, std::string> hashes() const;
};

}  // namespace dkgqa
