#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dkgqa::text {

/// One decoded code point and the byte range it occupies in the source.
struct CodePoint {
    char32_t value;
    std::size_t byte_offset;
    std::size_t byte_length;
};

/// Decodes UTF-8. Invalid bytes decode to U+FFFD and consume one byte.
std::vector<CodePoint> decode_utf8(std::string_view s);

void append_utf8(std::string& out, char32_t cp);

/// Simple (one-to-one) case folding for Latin, Greek, and Cyrillic blocks.
char32_t fold_case(char32_t cp);

/// Maps precomposed Latin letters with diacritics to their base letter.
char32_t strip_diacritic(char32_t cp);

/// Letters, digits, and every non-ASCII code point outside the general
/// punctuation and space ranges.
bool is_word_char(char32_t cp);

bool is_space(char32_t cp);

struct FoldOptions {
    bool strip_diacritics = false;
};

std::string fold(std::string_view s, FoldOptions opts = {});

/// Case-folds and collapses whitespace runs to one space; trims both ends.
std::string normalize_label(std::string_view s);

/// normalize_label plus removal of trailing punctuation (`?`, `.`, `!`, ...).
std::string normalize_question(std::string_view s);

/// Lower-cased word tokens (runs of word characters).
std::vector<std::string> word_tokens(std::string_view s);

/// The segment after the last '/', '#', or ':' of an IRI.
std::string_view local_name(std::string_view iri);

std::string trim(std::string_view s);

}  // namespace dkgqa::text
