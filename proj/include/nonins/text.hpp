#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace nonins::text {

/// Byte range [begin, end) of one word inside a UTF-8 string.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

bool is_valid_utf8(std::string_view s);

/// Decodes the code point starting at `pos` and advances `pos` past it.
/// Malformed sequences decode as a single byte and yield U+FFFD.
char32_t decode_next(std::string_view s, std::size_t& pos);

/// Unicode White_Space property.
bool is_whitespace(char32_t cp);

/// General_Category == Lu.
bool is_uppercase_letter(char32_t cp);

/// Words are maximal runs of non-whitespace code points.
std::vector<Span> word_spans(std::string_view s);
std::size_t count_words(std::string_view s);

std::optional<char32_t> first_non_whitespace(std::string_view s);

}  // namespace nonins::text
