#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ntp {

// Byte range [begin, end) of one word run inside a larger string.
struct WordSpan {
    size_t begin = 0;
    size_t end = 0;
};

// Maximal non-whitespace runs, in order. Whitespace covers the ASCII set
// plus the Unicode space separators (NBSP, en/em spaces, line/paragraph
// separators, ideographic space). Canonical normalization cannot move a
// whitespace boundary, so runs are taken on the raw code points.
std::vector<WordSpan> word_spans(std::string_view text);

// Number of word runs; 0 for empty or whitespace-only text.
int count_words(std::string_view text);

// True when the run ends with terminal punctuation (. ! ?), i.e. the run
// closes a sentence once followed by whitespace.
bool ends_sentence(std::string_view word);

// Lowercased run with ASCII punctuation stripped from both edges.
// Interior punctuation stays. Empty result means the run was punctuation only.
std::string normalize_token(std::string_view word);

// normalize_token over every run, empties dropped.
std::vector<std::string> tokenize(std::string_view text);

// Strip leading/trailing whitespace (same whitespace set as word_spans).
std::string trim(std::string_view s);

} // namespace ntp
