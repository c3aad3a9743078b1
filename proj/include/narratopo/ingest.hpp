#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "narratopo/transcript.hpp"

namespace ntp {

enum class InputFormat { jsonl, plain_qa };

InputFormat input_format_from_string(const std::string& s);

struct IngestConfig {
    int min_words = 200;
    int max_words = 450;
    bool drop_questions = false;
};

struct ParseIssue {
    std::string source; // file name
    int line = 0;       // 1-based line (jsonl) or 0 (file-level)
    std::string message;
};

struct ParseResult {
    std::vector<RawTranscript> transcripts;
    std::vector<ParseIssue> issues;
};

// Reads a JSONL corpus file or a directory of "Q: / A:" plain files with
// .meta.json sidecars. Malformed records are collected in `issues`, never
// silently dropped. Unreadable path or duplicate testimony ids -> UserError.
ParseResult parse_transcripts(const std::filesystem::path& path, InputFormat format);

// One section per interviewer turn plus the subject turns that follow it;
// a leading run of subject turns becomes a section of its own.
std::vector<Section> pair_turns(const RawTranscript& transcript, bool drop_questions = false);

// Forward-greedy merge: accumulate consecutive sections until the running
// word total reaches min_words, then emit. A trailing group below the
// threshold folds into the previously emitted section when one exists.
std::vector<Section> merge_short_sections(std::vector<Section> sections, int min_words = 200);

// Splits sections above max_words into ceil(wc/max_words) near-equal chunks.
// Cut points snap to the nearest sentence boundary within +-30 words of the
// target, constrained so every chunk stays inside [min_words, max_words]
// (keeps the merge/split pipeline idempotent); exact word position otherwise.
std::vector<Section> split_long_sections(std::vector<Section> sections, int max_words = 450,
                                         int min_words = 200);

// Sections from raw transcripts via pair_turns, plus the metadata index.
Corpus build_corpus(const std::vector<RawTranscript>& transcripts, const IngestConfig& cfg);

// merge -> split -> renumber per testimony. Testimonies whose total words
// stay below min_words are kept as one flagged section.
Corpus preprocess(const Corpus& corpus, const IngestConfig& cfg);

// sections.jsonl round-trip (metadata travels in the provenance file).
std::string sections_to_jsonl(const Corpus& corpus);
void load_sections_jsonl(const std::filesystem::path& path, Corpus& corpus);

} // namespace ntp
