#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "narratopo/transcript.hpp"

namespace ntp {

struct WeightedWord {
    std::string word;
    double weight = 0.0;
};

// The stop-word list compiled into the library; identical to
// data/stopwords.txt.
const std::set<std::string>& builtin_stopwords();
std::set<std::string> load_stopwords(const std::string& path); // one word per line, # comments

// Class-based TF-IDF over the concatenated sections of each class:
//   W(w, c) = tf(w, c) * ln(1 + A / f(w))
// with tf the in-class count, f the corpus count and A the average token
// count per class. Tokens are lowercased runs with edge punctuation
// stripped; stop-words are removed before counting. The noise class (-1)
// is reported like any other. Within a class, ties are broken
// lexicographically.
std::map<int, std::vector<WeightedWord>> ctfidf(const Corpus& corpus,
                                                const std::vector<int>& labels, int top_k = 15,
                                                const std::set<std::string>* stopwords = nullptr);

} // namespace ntp
