#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "narratopo/config.hpp"
#include "narratopo/divergence.hpp"
#include "narratopo/stats.hpp"
#include "narratopo/synthlab.hpp"
#include "narratopo/topics.hpp"

namespace ntp::pipeline {

// Artifact names inside the output directory.
inline constexpr const char* kSectionsFile = "sections.jsonl";
inline constexpr const char* kProvenanceFile = "provenance.json";
inline constexpr const char* kModelFile = "model.json";
inline constexpr const char* kAssignmentsFile = "assignments.csv";
inline constexpr const char* kMatricesFile = "matrices.csv";
inline constexpr const char* kSchemaFile = "schema.csv";
inline constexpr const char* kProfileFile = "profile.csv";
inline constexpr const char* kTTestsFile = "ttests.csv";
inline constexpr const char* kCharsetAFile = "charset_a.json";
inline constexpr const char* kCharsetBFile = "charset_b.json";
inline constexpr const char* kScoresFile = "scores.csv";
inline constexpr const char* kScoresHistFile = "scores_hist.csv";
inline constexpr const char* kTopDivergentFile = "top_divergent.csv";
inline constexpr const char* kCorpusSummaryFile = "corpus_summary.csv";
inline constexpr const char* kCorpusHistFile = "corpus_hist.csv";
inline constexpr const char* kTopicHistFile = "topic_histogram.csv";
inline constexpr const char* kHeatmapFile = "heatmap.csv";
inline constexpr const char* kSynthCorpusFile = "corpus.jsonl";
inline constexpr const char* kGroundTruthFile = "ground_truth.csv";

std::filesystem::path artifact(const RunConfig& cfg, const char* name);

// Stages. Each writes its artifacts atomically and returns what downstream
// code usually needs next. Individual commands always execute; only `run`
// consults stamps.
Corpus ingest_stage(const RunConfig& cfg);
Corpus load_ingested(const RunConfig& cfg);
TopicModel fit_stage(const RunConfig& cfg);
void align_stage(const RunConfig& cfg);
void compare_stage(const RunConfig& cfg);
void diverge_stage(const RunConfig& cfg);
void report_stage(const RunConfig& cfg);
void synth_stage(const RunConfig& cfg, const std::filesystem::path& spec_path);

// Full chain with per-stage stamps: a stage is skipped when its inputs and
// the config hash are unchanged and its outputs exist.
void run_all(const RunConfig& cfg);

// Schema validation of every known artifact present in the output
// directory; returns problems (empty means pass).
std::vector<std::string> validate_outputs(const RunConfig& cfg);

// Shared artifact readers.
std::vector<NarrativeMatrix> load_matrices(const std::filesystem::path& path);
CharacteristicSet load_charset(const std::filesystem::path& path);
GroupRule group_rule_from_config(const RunConfig& cfg);

} // namespace ntp::pipeline
