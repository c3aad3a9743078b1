#pragma once

// Shared construction helpers for the test suites.

#include <string>
#include <vector>

#include "narratopo/ingest.hpp"
#include "narratopo/rng.hpp"
#include "narratopo/text.hpp"
#include "narratopo/transcript.hpp"

namespace testutil {

// Corpus with one testimony per text list; each text becomes one section.
inline ntp::Corpus corpus_from_sections(const std::vector<std::vector<std::string>>& testimonies) {
    ntp::Corpus corpus;
    for (size_t t = 0; t < testimonies.size(); ++t) {
        std::string id = "T" + std::to_string(t);
        corpus.testimony_order.push_back(id);
        corpus.transcripts[id] = {};
        for (size_t i = 0; i < testimonies[t].size(); ++i) {
            ntp::Section s;
            s.testimony_id = id;
            s.index = static_cast<int>(i);
            s.text = testimonies[t][i];
            s.word_count = ntp::count_words(s.text);
            s.origin.push_back({static_cast<int>(i), static_cast<int>(i) + 1});
            corpus.sections.push_back(std::move(s));
        }
    }
    return corpus;
}

// "w0 w1 ... w{n-1}", with a sentence-ending period after roughly
// every`sentence_every`-th word (0 = none).
inline std::string words_text(int n, int sentence_every = 0, const std::string& stem = "w") {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += stem + std::to_string(i);
        if (sentence_every > 0 && (i + 1) % sentence_every == 0) out += '.';
    }
    return out;
}

// Random transcript for property tests: 1..max_turns turns, each 1..max_words
// words, random speakers, periods sprinkled at word ends.
inline ntp::RawTranscript random_transcript(ntp::Rng& rng, const std::string& id,
                                            int max_turns = 16, int max_words = 600) {
    ntp::RawTranscript t;
    t.testimony_id = id;
    const int n_turns = static_cast<int>(rng.range(1, max_turns));
    for (int i = 0; i < n_turns; ++i) {
        ntp::Turn turn;
        turn.speaker = rng.uniform() < 0.5 ? ntp::Speaker::interviewer : ntp::Speaker::subject;
        const int n_words = static_cast<int>(rng.range(1, max_words));
        std::string text;
        for (int w = 0; w < n_words; ++w) {
            if (!text.empty()) text += ' ';
            text += "w" + std::to_string(rng.below(500));
            if (rng.uniform() < 0.2) text += '.';
        }
        turn.text = std::move(text);
        t.turns.push_back(std::move(turn));
    }
    return t;
}

inline std::vector<int> word_counts(const std::vector<ntp::Section>& sections) {
    std::vector<int> counts;
    counts.reserve(sections.size());
    for (const ntp::Section& s : sections) counts.push_back(s.word_count);
    return counts;
}

// Whitespace-normalized concatenation of section texts; merge joins and
// split cuts only move whitespace, so this is the order-preservation key.
inline std::string normalized_concat(const std::vector<ntp::Section>& sections) {
    std::string joined;
    for (const ntp::Section& s : sections) {
        for (const ntp::WordSpan& span : ntp::word_spans(s.text)) {
            if (!joined.empty()) joined += ' ';
            joined += s.text.substr(span.begin, span.end - span.begin);
        }
    }
    return joined;
}

} // namespace testutil
