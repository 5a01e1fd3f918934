#include "dkgqa/prompts.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/hashing.hpp"
#include "embedded_prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dkgqa {

namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Length of the `{name}` token starting at `i`, or 0 if there is none.
std::size_t placeholder_at(const std::string& s, std::size_t i) {
    if (s[i] != '{') return 0;
    std::size_t j = i + 1;
    while (j < s.size() && is_placeholder_char(s[j])) ++j;
    if (j == i + 1 || j >= s.size() || s[j] != '}') return 0;
    return j - i + 1;
}

PromptTemplate checked(std::string name, std::string text, std::vector<std::string> expected) {
    PromptTemplate t(std::move(name), std::move(text));
    auto got = t.placeholders();
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    if (got != expected) throw ConfigError("prompt template " + t.name() + " has unexpected placeholders");
    if (t.text().find("\n\n") == std::string::npos) {
        throw ConfigError("prompt template " + t.name() + " has no leading system paragraph");
    }
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prompt template '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {}

std::string PromptTemplate::sha256() const { return sha256_hex(text_); }

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text_.size(); ++i) {
        if (const auto n = placeholder_at(text_, i); n != 0) {
            auto name = text_.substr(i + 1, n - 2);
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
            i += n - 1;
        }
    }
    return out;
}

ChatPrompt PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    const auto split = text_.find("\n\n");
    ChatPrompt out;
    out.system = text_.substr(0, split);
    const auto body = split == std::string::npos ? std::string() : text_.substr(split + 2);
    out.user.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (const auto n = placeholder_at(body, i); n != 0) {
            const auto key = body.substr(i + 1, n - 2);
            const auto it = values.find(key);
            if (it == values.end()) throw ConfigError("no value for placeholder {" + key + "} in " + name_);
            out.user += it->second;
            i += n - 1;
        } else {
            out.user += body[i];
        }
    }
    // Trailing newline of the file is not part of the message.
    while (!out.user.empty() && out.user.back() == '\n') out.user.pop_back();
    return out;
}

PromptSet PromptSet::embedded() {
    return PromptSet{checked("P1", std::string(embedded::p1), {"triples_str"}),
                     checked("P2", std::string(embedded::p2), {"question"}),
                     checked("P3", std::string(embedded::p3), {"question", "answer", "supporting_facts"})};
}

PromptSet PromptSet::load(const std::string& dir) {
    return PromptSet{checked("P1", read_file(dir + "/p1.txt"), {"triples_str"}),
                     checked("P2", read_file(dir + "/p2.txt"), {"question"}),
                     checked("P3", read_file(dir + "/p3.txt"), {"question", "answer", "supporting_facts"})};
}

std::map<std::string, std::string> PromptSet::hashes() const {
    return {{generate.name(), generate.sha256()},
            {judge_question.name(), judge_question.sha256()},
            {judge_answer.name(), judge_answer.sha256()}};
}

}  // namespace dkgqa
