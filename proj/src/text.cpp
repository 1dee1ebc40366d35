#include "nonins/text.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace nonins::text {
namespace {

struct Range {
    char32_t lo;
    char32_t hi;
};

constexpr Range kUpper[] = {
#include "unicode_upper_table.inc"
};

// Continuation byte count for a lead byte, or -1 when the byte cannot start a sequence.
int trailing_bytes(unsigned char lead) {
    if (lead < 0x80) return 0;
    if (lead >= 0xC2 && lead <= 0xDF) return 1;
    if (lead >= 0xE0 && lead <= 0xEF) return 2;
    if (lead >= 0xF0 && lead <= 0xF4) return 3;
    return -1;
}

// Returns the decoded code point, or nullopt for malformed input. Rejects
// overlong forms, surrogates and values above U+10FFFF.
std::optional<char32_t> decode_strict(std::string_view s, std::size_t pos, std::size_t& len) {
    const auto lead = static_cast<unsigned char>(s[pos]);
    const int n = trailing_bytes(lead);
    if (n < 0 || pos + static_cast<std::size_t>(n) >= s.size()) return std::nullopt;
    if (n == 0) {
        len = 1;
        return lead;
    }
    char32_t cp = lead & (0x3F >> n);
    for (int i = 1; i <= n; ++i) {
        const auto c = static_cast<unsigned char>(s[pos + i]);
        if ((c & 0xC0) != 0x80) return std::nullopt;
        cp = (cp << 6) | (c & 0x3F);
    }
    constexpr std::array<char32_t, 4> min_for_len{0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[n] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
    len = static_cast<std::size_t>(n) + 1;
    return cp;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t len = 0;
        if (!decode_strict(s, pos, len)) return false;
        pos += len;
    }
    return true;
}

char32_t decode_next(std::string_view s, std::size_t& pos) {
    std::size_t len = 0;
    if (auto cp = decode_strict(s, pos, len)) {
        pos += len;
        return *cp;
    }
    ++pos;
    return 0xFFFD;
}

bool is_whitespace(char32_t cp) {
    switch (cp) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_uppercase_letter(char32_t cp) {
    const auto it = std::upper_bound(std::begin(kUpper), std::end(kUpper), cp,
                                     [](char32_t v, const Range& r) { return v < r.lo; });
    if (it == std::begin(kUpper)) return false;
    return cp <= std::prev(it)->hi;
}

std::vector<Span> word_spans(std::string_view s) {
    std::vector<Span> spans;
    std::size_t pos = 0;
    bool in_word = false;
    Span current;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_next(s, pos);
        if (is_whitespace(cp)) {
            if (in_word) {
                current.end = start;
                spans.push_back(current);
                in_word = false;
            }
        } else if (!in_word) {
            current.begin = start;
            in_word = true;
        }
    }
    if (in_word) {
        current.end = s.size();
        spans.push_back(current);
    }
    return spans;
}

std::size_t count_words(std::string_view s) {
    std::size_t count = 0;
    std::size_t pos = 0;
    bool in_word = false;
    while (pos < s.size()) {
        const bool ws = is_whitespace(decode_next(s, pos));
        if (!ws && !in_word) ++count;
        in_word = !ws;
    }
    return count;
}

std::optional<char32_t> first_non_whitespace(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        const char32_t cp = decode_next(s, pos);
        if (!is_whitespace(cp)) return cp;
    }
    return std::nullopt;
}

}  // namespace nonins::text
