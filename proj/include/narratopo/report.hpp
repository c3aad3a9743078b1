#pragma once

#include <string>
#include <vector>

#include "narratopo/stats.hpp"
#include "narratopo/topics.hpp"
#include "narratopo/transcript.hpp"

namespace ntp {

// Per-testimony word and section counts (testimony_id, words, sections).
std::string corpus_summary_csv(const Corpus& corpus, const std::string& config_hash);

// Equal-width histogram tables for per-testimony words and section counts
// (metric, bin, lo, hi, count).
std::string corpus_histogram_csv(const Corpus& corpus, int bins, const std::string& config_hash);

// topic_id, title, size, share sorted by size descending; the outlier topic
// participates like any other. Shares sum to 1.
std::string topic_histogram_csv(const TopicModel& model, const std::string& config_hash);

// Long-form contrast grid (part, topic_id, t, p, significant) for external
// heatmap rendering; significant = membership in either characteristic set.
std::string contrast_heatmap_csv(const std::vector<TTestResult>& results,
                                 const CharacteristicSet& c_a, const CharacteristicSet& c_b,
                                 const std::string& config_hash);

} // namespace ntp
