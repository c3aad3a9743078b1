#include "narratopo/text.hpp"

#include <cctype>

namespace ntp {
namespace {

bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes the code point at `pos`, advancing `pos`. Malformed bytes are
// passed through one at a time so counting never throws.
uint32_t next_cp(std::string_view s, size_t& pos) {
    unsigned char c = static_cast<unsigned char>(s[pos]);
    if (c < 0x80) {
        ++pos;
        return c;
    }
    int extra = 0;
    uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) { extra = 1; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { extra = 2; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { extra = 3; cp = c & 0x07; }
    else { ++pos; return c; }
    if (pos + 1 + extra > s.size()) {
        ++pos;
        return c;
    }
    for (int i = 1; i <= extra; ++i) {
        unsigned char cc = static_cast<unsigned char>(s[pos + i]);
        if ((cc & 0xC0) != 0x80) { ++pos; return c; }
        cp = (cp << 6) | (cc & 0x3F);
    }
    pos += 1 + extra;
    return cp;
}

} // namespace

std::vector<WordSpan> word_spans(std::string_view text) {
    std::vector<WordSpan> spans;
    size_t pos = 0;
    bool in_word = false;
    size_t word_begin = 0;
    while (pos < text.size()) {
        size_t cp_begin = pos;
        uint32_t cp = next_cp(text, pos);
        if (is_space_cp(cp)) {
            if (in_word) {
                spans.push_back({word_begin, cp_begin});
                in_word = false;
            }
        } else if (!in_word) {
            in_word = true;
            word_begin = cp_begin;
        }
    }
    if (in_word) spans.push_back({word_begin, text.size()});
    return spans;
}

int count_words(std::string_view text) {
    size_t pos = 0;
    bool in_word = false;
    int n = 0;
    while (pos < text.size()) {
        uint32_t cp = next_cp(text, pos);
        if (is_space_cp(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

bool ends_sentence(std::string_view word) {
    if (word.empty()) return false;
    char c = word.back();
    return c == '.' || c == '!' || c == '?';
}

std::string normalize_token(std::string_view word) {
    size_t b = 0;
    size_t e = word.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    for (size_t i = b; i < e; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for (const WordSpan& span : word_spans(text)) {
        std::string tok = normalize_token(text.substr(span.begin, span.end - span.begin));
        if (!tok.empty()) tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::string trim(std::string_view s) {
    auto spans = word_spans(s);
    if (spans.empty()) return "";
    return std::string(s.substr(spans.front().begin, spans.back().end - spans.front().begin));
}

} // namespace ntp
