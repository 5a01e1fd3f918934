#include "dkgqa/text.hpp"

#include <algorithm>
#include <array>

namespace dkgqa::text {

std::vector<CodePoint> decode_utf8(std::string_view s) {
    std::vector<CodePoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
        } else {
            len = 0;
        }
        if (len > 1) {
            bool ok = i + len <= s.size();
            char32_t v = b0 & (0x7F >> len);
            for (std::size_t k = 1; ok && k < len; ++k) {
                const auto b = static_cast<unsigned char>(s[i + k]);
                if ((b & 0xC0) != 0x80) {
                    ok = false;
                } else {
                    v = (v << 6) | (b & 0x3F);
                }
            }
            if (ok) {
                cp = v;
            } else {
                len = 1;
            }
        } else if (len == 0) {
            len = 1;
        }
        out.push_back({cp, i, len});
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

char32_t fold_case(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp < 0x80) return cp;
    // Latin-1 supplement, except the multiplication sign.
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    // Latin Extended-A: alternating upper/lower pairs.
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    // Greek.
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
    if (cp == 0x3C2) return 0x3C3;
    // Cyrillic.
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

char32_t strip_diacritic(char32_t cp) {
    if (cp < 0xC0 || cp > 0x17F) return cp;
    if (cp <= 0xFF) {
        // Indexed from U+00C0.
        static constexpr std::array<char32_t, 64> latin1 = {
            U'A', U'A', U'A', U'A', U'A', U'A', 0xC6, U'C', U'E', U'E', U'E', U'E', U'I', U'I', U'I', U'I',
            0xD0, U'N', U'O', U'O', U'O', U'O', U'O', 0xD7, U'O', U'U', U'U', U'U', U'U', U'Y', 0xDE, 0xDF,
            U'a', U'a', U'a', U'a', U'a', U'a', 0xE6, U'c', U'e', U'e', U'e', U'e', U'i', U'i', U'i', U'i',
            0xF0, U'n', U'o', U'o', U'o', U'o', U'o', 0xF7, U'o', U'u', U'u', U'u', U'u', U'y', 0xFE, U'y'};
        return latin1[cp - 0xC0];
    }
    struct Range {
        char32_t first, last;
        char32_t upper, lower;
    };
    static constexpr std::array<Range, 20> ranges = {{
        {0x100, 0x105, U'A', U'a'}, {0x106, 0x10D, U'C', U'c'}, {0x10E, 0x111, U'D', U'd'},
        {0x112, 0x11B, U'E', U'e'}, {0x11C, 0x123, U'G', U'g'}, {0x124, 0x127, U'H', U'h'},
        {0x128, 0x131, U'I', U'i'}, {0x134, 0x135, U'J', U'j'}, {0x136, 0x137, U'K', U'k'},
        {0x139, 0x142, U'L', U'l'}, {0x143, 0x148, U'N', U'n'}, {0x14C, 0x151, U'O', U'o'},
        {0x154, 0x159, U'R', U'r'}, {0x15A, 0x161, U'S', U's'}, {0x162, 0x167, U'T', U't'},
        {0x168, 0x173, U'U', U'u'}, {0x174, 0x175, U'W', U'w'}, {0x176, 0x178, U'Y', U'y'},
        {0x179, 0x17E, U'Z', U'z'}, {0x17F, 0x17F, U's', U's'},
    }};
    for (const auto& r : ranges) {
        if (cp >= r.first && cp <= r.last) {
            return (fold_case(cp) == cp) ? r.lower : r.upper;
        }
    }
    return cp;
}

bool is_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
           cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000;
}

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
    }
    if (is_space(cp)) return false;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0xA1 && cp <= 0xBF) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp == 0xFFFD) return false;
    return true;
}

std::string fold(std::string_view s, FoldOptions opts) {
    std::string out;
    out.reserve(s.size());
    for (const auto& c : decode_utf8(s)) {
        char32_t cp = c.value;
        if (opts.strip_diacritics) cp = strip_diacritic(cp);
        append_utf8(out, fold_case(cp));
    }
    return out;
}

std::string normalize_label(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (const auto& c : decode_utf8(s)) {
        if (is_space(c.value)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, fold_case(c.value));
    }
    return out;
}

std::string normalize_question(std::string_view s) {
    std::string out = normalize_label(s);
    auto is_trailing = [](char ch) {
        return ch == '?' || ch == '.' || ch == '!' || ch == ',' || ch == ';' || ch == ':' || ch == ' ';
    };
    while (!out.empty() && is_trailing(out.back())) out.pop_back();
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (const auto& c : decode_utf8(s)) {
        if (is_word_char(c.value)) {
            append_utf8(current, fold_case(c.value));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string_view local_name(std::string_view iri) {
    const auto pos = iri.find_last_of("/#:");
    if (pos == std::string_view::npos || pos + 1 >= iri.size()) return iri;
    return iri.substr(pos + 1);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace dkgqa::text
