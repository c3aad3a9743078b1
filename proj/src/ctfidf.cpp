#include "narratopo/ctfidf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "narratopo/errors.hpp"
#include "narratopo/io.hpp"
#include "narratopo/text.hpp"

namespace ntp {
namespace {

const char* kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "arent", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "cant", "cannot", "could", "couldnt", "did", "didnt", "do", "does", "doesnt",
    "doing", "dont", "down", "during", "each", "few", "for", "from", "further", "had", "hadnt",
    "has", "hasnt", "have", "havent", "having", "he", "hed", "hell", "hes", "her", "here",
    "heres", "hers", "herself", "him", "himself", "his", "how", "hows", "i", "id", "ill", "im",
    "ive", "if", "in", "into", "is", "isnt", "it", "its", "itself", "lets", "me", "more", "most",
    "mustnt", "my", "myself", "no", "nor", "not", "of", "off", "on", "once", "only", "or",
    "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "shant", "she",
    "shed", "shell", "shes", "should", "shouldnt", "so", "some", "such", "than", "that", "thats",
    "the", "their", "theirs", "them", "themselves", "then", "there", "theres", "these", "they",
    "theyd", "theyll", "theyre", "theyve", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "wasnt", "we", "wed", "well", "were", "weve", "werent", "what",
    "whats", "when", "whens", "where", "wheres", "which", "while", "who", "whos", "whom", "why",
    "whys", "with", "wont", "would", "wouldnt", "you", "youd", "youll", "youre", "youve", "your",
    "yours", "yourself", "yourselves",
};

} // namespace

const std::set<std::string>& builtin_stopwords() {
    static const std::set<std::string> words(std::begin(kStopwords), std::end(kStopwords));
    return words;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::set<std::string> words;
    for (const std::string& line : split_lines(read_file(path))) {
        std::string w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        words.insert(w);
    }
    return words;
}

std::map<int, std::vector<WeightedWord>> ctfidf(const Corpus& corpus,
                                                const std::vector<int>& labels, int top_k,
                                                const std::set<std::string>* stopwords) {
    if (labels.size() != corpus.sections.size()) {
        throw InternalError("ctfidf: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(corpus.sections.size()) + " sections");
    }
    const std::set<std::string>& stop = stopwords ? *stopwords : builtin_stopwords();

    // tf per class, f over the whole corpus
    std::map<int, std::unordered_map<std::string, long>> class_tf;
    std::unordered_map<std::string, long> corpus_tf;
    std::map<int, long> class_tokens;
    for (size_t i = 0; i < corpus.sections.size(); ++i) {
        auto& tf = class_tf[labels[i]];
        long& tokens = class_tokens[labels[i]];
        for (const std::string& tok : tokenize(corpus.sections[i].text)) {
            if (stop.count(tok)) continue;
            ++tf[tok];
            ++corpus_tf[tok];
            ++tokens;
        }
    }
    if (class_tf.empty()) return {};

    long total_tokens = 0;
    for (const auto& [c, t] : class_tokens) total_tokens += t;
    const double avg_class_tokens =
        static_cast<double>(total_tokens) / static_cast<double>(class_tf.size());

    std::map<int, std::vector<WeightedWord>> result;
    for (const auto& [label, tf] : class_tf) {
        std::vector<WeightedWord> scored;
        scored.reserve(tf.size());
        for (const auto& [word, count] : tf) {
            const double f = static_cast<double>(corpus_tf.at(word));
            scored.push_back(
                {word, static_cast<double>(count) * std::log1p(avg_class_tokens / f)});
        }
        std::sort(scored.begin(), scored.end(), [](const WeightedWord& x, const WeightedWord& y) {
            if (x.weight != y.weight) return x.weight > y.weight;
            return x.word < y.word;
        });
        if (static_cast<int>(scored.size()) > top_k) scored.resize(static_cast<size_t>(top_k));
        if (scored.empty()) {
            std::cerr << "warning: class " << label << " has an empty vocabulary after stop-word removal\n";
        }
        result[label] = std::move(scored);
    }
    return result;
}

} // namespace ntp
