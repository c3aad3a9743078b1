#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "narratopo/transcript.hpp"

namespace ntp {

// Generator spec for corpora with planted topic vocabularies, planted
// group schemas and planted divergent testimonies.
struct PlantedSpec {
    int n_topics = 8;
    int vocab_per_topic = 150;
    int n_group_a = 100;
    int n_group_b = 100;
    int min_sections = 30;
    int max_sections = 40;
    int parts = 15;
    int min_section_words = 200;
    int max_section_words = 450;
    double swap_fraction = 0.0; // of group A, generated from schema_b
    double noise_rate = 0.1;    // shared background words
    int noise_vocab = 150;
    uint64_t seed = 1;
    // parts x n_topics row-stochastic matrices; empty -> uniform rows.
    std::vector<double> schema_a;
    std::vector<double> schema_b;
};

PlantedSpec load_planted_spec(const std::filesystem::path& path);
void validate_spec(const PlantedSpec& spec);

struct GroundTruthRow {
    std::string testimony_id;
    int section_index = 0;
    int planted_topic = 0;
    std::string group;
    bool is_swap = false;
};

struct SynthResult {
    std::vector<RawTranscript> transcripts;
    std::vector<GroundTruthRow> truth;
};

// Deterministic for a fixed seed. Every planted section becomes one
// question/answer turn pair with an in-band word count, so ingest
// preprocessing preserves the planted section boundaries.
SynthResult generate_corpus(const PlantedSpec& spec);

std::string synth_to_jsonl(const SynthResult& result);
std::string truth_to_csv(const SynthResult& result, const std::string& config_hash);

// Fraction of sections whose cluster majority-matches their planted class;
// noise (-1) counts as one cluster of its own.
double purity(std::span<const int> labels, std::span<const int> planted);

// Vocabulary token for planted topic t, word w ("t03_w117").
std::string planted_token(int topic, int word);

} // namespace ntp
