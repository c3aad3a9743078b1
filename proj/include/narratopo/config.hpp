#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ntp {

// Flat dotted-key configuration driving the whole pipeline. Values keep
// their canonical serialization; the hash of that form is embedded in
// every artifact.
struct RunConfig {
    std::string corpus_path;
    std::string output_path = "out";
    std::string cache_path; // empty -> <output>/cache; NARRATOPO_CACHE wins

    std::string corpus_format = "jsonl";
    int min_words = 200;
    int max_words = 450;
    bool drop_questions = false;

    std::string embedder_id = "all-MiniLM-L6-v2";
    int embedder_dim = 384;
    uint64_t embedder_seed = 0; // 0 -> forked from the root seed
    int batch_size = 64;

    std::string reduce_method = "umap";
    int target_dim = 5;
    int n_neighbors = 15;
    int reduce_epochs = 0;

    int min_cluster_size = 50;
    int min_samples = 0;
    int top_k = 15;
    std::string stopwords_path;
    std::string labels_path;

    int parts = 15;

    double t_threshold = 3.5;
    double p_threshold = 0.01;
    bool include_outlier = true;
    double mean_diff_threshold = 0.0;

    std::string group_key;
    std::string group_a;
    std::string group_b;

    int report_bins = 20;
    int top_divergent = 5;

    uint64_t seed = 42;
};

// Parse "key = value" lines (# comments allowed), then apply overrides of
// the same form. Unknown keys and malformed values are user errors.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});
RunConfig config_from_overrides(const std::vector<std::string>& overrides);

// Sorted key=value lines covering every effective key.
std::string canonical_config(const RunConfig& cfg);

// First 16 hex chars of sha256(canonical form).
std::string config_hash(const RunConfig& cfg);

// Effective cache directory (explicit key, else <output>/cache), after the
// NARRATOPO_CACHE environment override.
std::filesystem::path effective_cache_dir(const RunConfig& cfg);

} // namespace ntp
