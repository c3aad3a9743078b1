#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "narratopo/cluster.hpp"
#include "narratopo/ctfidf.hpp"
#include "narratopo/embedding.hpp"
#include "narratopo/reduce.hpp"
#include "narratopo/transcript.hpp"

namespace ntp {

struct TopicInfo {
    int id = 0;
    std::string title;
    long size = 0;
    std::vector<WeightedWord> words;
};

struct TopicModel {
    static constexpr int kOutlierId = -1;

    std::vector<TopicInfo> topics; // ids contiguous from 0, sizes non-increasing
    std::vector<WeightedWord> outlier_words;
    std::string outlier_title = "Unknown";
    std::vector<SectionKey> keys;  // corpus order
    std::vector<int> assignments;  // parallel to keys, -1 for outliers
    double outlier_fraction = 0.0;
    std::map<std::string, std::string> config_snapshot;

    int topic_count() const { return static_cast<int>(topics.size()); }
    std::string title_of(int topic_id) const;
    int assignment_of(const std::string& testimony_id, int section_index) const;
};

struct TopicConfig {
    ReduceConfig reduce;
    ClusterConfig cluster;
    int top_k = 15;
    std::string stopwords_path; // empty -> builtin list
};

// reduce -> density-cluster -> c-TF-IDF representation -> assignments.
// Topic count is emergent from min_cluster_size, never configured.
TopicModel fit_topics(const Corpus& corpus, const EmbeddingMatrix& emb, const TopicConfig& cfg);

// Titles from a JSON map of topic id or top-word signature to title;
// unmapped topics keep their top word. Unknown ids warn and are ignored.
void apply_label_map(TopicModel& model, const std::filesystem::path& label_file);

// model JSON + assignments CSV (schemas shared with the CLI artifacts).
std::string model_to_json(const TopicModel& model, const std::string& config_hash);
std::string assignments_to_csv(const TopicModel& model, const std::string& config_hash);
TopicModel load_model(const std::filesystem::path& model_path,
                      const std::filesystem::path& assignments_path);

} // namespace ntp
