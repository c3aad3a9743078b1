#include "narratopo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <functional>
#include <iostream>
#include <set>

#include <json.hpp>

#include "narratopo/embedding.hpp"
#include "narratopo/errors.hpp"
#include "narratopo/hash.hpp"
#include "narratopo/ingest.hpp"
#include "narratopo/io.hpp"
#include "narratopo/report.hpp"
#include "narratopo/rng.hpp"
#include "narratopo/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace ntp::pipeline {
namespace {

std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

ordered_json metadata_to_json(const Metadata& m) {
    ordered_json j;
    j["gender"] = to_string(m.gender);
    if (m.birth_year) j["birth_year"] = *m.birth_year;
    if (m.interview_year) j["interview_year"] = *m.interview_year;
    if (!m.country.empty()) j["country"] = m.country;
    for (const auto& [k, v] : m.extras) j[k] = v;
    return j;
}

Metadata metadata_from_json(const json& j) {
    Metadata m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "gender") m.gender = gender_from_string(it.value().get<std::string>());
        else if (key == "birth_year") m.birth_year = it.value().get<int>();
        else if (key == "interview_year") m.interview_year = it.value().get<int>();
        else if (key == "country") m.country = it.value().get<std::string>();
        else m.extras[key] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    return m;
}

void write_provenance(const RunConfig& cfg, const Corpus& corpus,
                      const std::vector<ParseIssue>& issues) {
    ordered_json j;
    j["config_hash"] = config_hash(cfg);
    j["created_at"] = now_iso8601();
    j["n_transcripts"] = corpus.testimony_order.size();
    j["n_sections"] = corpus.sections.size();
    j["total_turns"] = corpus.provenance.total_turns;
    ordered_json errors = ordered_json::array();
    for (const ParseIssue& issue : issues) {
        errors.push_back({{"source", issue.source}, {"line", issue.line}, {"message", issue.message}});
    }
    j["parse_errors"] = std::move(errors);
    j["flagged_short"] = corpus.provenance.flagged_short;
    j["testimony_order"] = corpus.testimony_order;
    ordered_json transcripts;
    for (const std::string& id : corpus.testimony_order) {
        transcripts[id] = metadata_to_json(corpus.transcripts.at(id));
    }
    j["transcripts"] = std::move(transcripts);
    atomic_write_file(artifact(cfg, kProvenanceFile), j.dump(2) + "\n");
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg) {
    if (cfg.embedder_id == "hashed-bow" || cfg.embedder_id == "hashed" ||
        cfg.embedder_id.rfind("hashed-bow-", 0) == 0) {
        const uint64_t seed =
            cfg.embedder_seed != 0 ? cfg.embedder_seed : fork_seed(cfg.seed, "embed");
        return hashed_bow_embedder(cfg.embedder_dim, seed);
    }
    return cache_only_embedder(cfg.embedder_id, cfg.embedder_dim);
}

std::string active_stopwords_hash(const RunConfig& cfg) {
    std::string joined;
    if (cfg.stopwords_path.empty()) {
        for (const std::string& w : builtin_stopwords()) {
            joined += w;
            joined += '\n';
        }
    } else {
        for (const std::string& w : load_stopwords(cfg.stopwords_path)) {
            joined += w;
            joined += '\n';
        }
    }
    return sha256_hex(joined).substr(0, 16);
}

// Ordered per-testimony assignments from the model (model.keys are in
// corpus order).
std::vector<NarrativeMatrix> build_matrices(const TopicModel& model, int parts) {
    std::vector<NarrativeMatrix> matrices;
    const int k = model.topic_count();
    size_t i = 0;
    while (i < model.keys.size()) {
        const std::string& id = model.keys[i].testimony_id;
        size_t begin = i;
        while (i < model.keys.size() && model.keys[i].testimony_id == id) ++i;
        matrices.push_back(narrative_matrix(
            id, std::span<const int>(model.assignments.data() + begin, i - begin), parts, k));
    }
    return matrices;
}

std::string matrices_to_csv(const std::vector<NarrativeMatrix>& matrices,
                            const std::string& hash) {
    CsvBuilder csv({"testimony_id", "part", "topic_id", "share", "section_count"});
    csv.set_config_hash(hash);
    for (const NarrativeMatrix& m : matrices) {
        for (int part = 0; part < m.parts; ++part) {
            for (int c = 0; c < m.cols(); ++c) {
                const int topic_id = c == m.n_topics ? -1 : c;
                csv.add_row({m.testimony_id, std::to_string(part), std::to_string(topic_id),
                             format_double(m.at(part, c)),
                             std::to_string(m.section_counts[static_cast<size_t>(part)])});
            }
        }
    }
    return csv.str();
}

std::string schema_to_csv(const std::vector<GroupSchema>& schemas, const std::string& hash) {
    CsvBuilder csv({"group_id", "part", "topic_id", "mean_share"});
    csv.set_config_hash(hash);
    for (const GroupSchema& s : schemas) {
        for (int part = 0; part < s.parts; ++part) {
            for (int c = 0; c < s.cols(); ++c) {
                const int topic_id = c == s.n_topics ? -1 : c;
                csv.add_row({s.group_id, std::to_string(part), std::to_string(topic_id),
                             format_double(s.at(part, c))});
            }
        }
    }
    return csv.str();
}

std::string profile_to_csv(const std::vector<std::pair<GroupSchema, PartProfile>>& profiles,
                           const std::string& hash) {
    CsvBuilder csv({"group_id", "part", "rank", "topic_id", "share", "diversity", "dispersion"});
    csv.set_config_hash(hash);
    for (const auto& [schema, profile] : profiles) {
        for (const PartProfileEntry& e : profile.entries) {
            csv.add_row({schema.group_id, std::to_string(e.part), std::to_string(e.rank),
                         std::to_string(e.topic_id), format_double(e.share),
                         format_double(profile.diversity[static_cast<size_t>(e.part)]),
                         format_double(profile.dispersion[static_cast<size_t>(e.part)])});
        }
    }
    return csv.str();
}

std::string ttests_to_csv(const std::vector<TTestResult>& results, const std::string& hash) {
    CsvBuilder csv({"part", "topic_id", "t", "p", "mean_a", "mean_b", "n_a", "n_b", "degenerate"});
    csv.set_config_hash(hash);
    for (const TTestResult& r : results) {
        csv.add_row({std::to_string(r.part), std::to_string(r.topic), format_double(r.t),
                     format_double(r.p), format_double(r.mean_a), format_double(r.mean_b),
                     std::to_string(r.n_a), std::to_string(r.n_b), r.degenerate ? "1" : "0"});
    }
    return csv.str();
}

std::string charset_to_json(const CharacteristicSet& cset, const std::string& hash) {
    ordered_json j;
    j["config_hash"] = hash;
    j["group_id"] = cset.group_id;
    j["thresholds"] = {{"t", cset.t_threshold}, {"p", cset.p_threshold}};
    j["has_degenerate"] = cset.has_degenerate;
    ordered_json pairs = ordered_json::array();
    for (const CharacteristicPair& p : cset.pairs) {
        pairs.push_back({{"part", p.part}, {"topic", p.topic}, {"abs_t", p.abs_t}});
    }
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

std::vector<NarrativeMatrix> select_matrices(const std::vector<NarrativeMatrix>& all,
                                             const std::vector<std::string>& ids) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<NarrativeMatrix> out;
    for (const NarrativeMatrix& m : all) {
        if (wanted.count(m.testimony_id)) out.push_back(m);
    }
    return out;
}

Corpus load_corpus_with_metadata(const RunConfig& cfg) {
    Corpus corpus;
    fs::path prov_path = artifact(cfg, kProvenanceFile);
    if (!fs::exists(prov_path)) {
        throw UserError("missing " + prov_path.string() + "; run the ingest stage first");
    }
    json j = json::parse(read_file(prov_path));
    if (j.contains("testimony_order")) {
        corpus.testimony_order = j["testimony_order"].get<std::vector<std::string>>();
    }
    if (j.contains("flagged_short")) {
        corpus.provenance.flagged_short = j["flagged_short"].get<std::vector<std::string>>();
    }
    if (j.contains("transcripts")) {
        for (auto it = j["transcripts"].begin(); it != j["transcripts"].end(); ++it) {
            corpus.transcripts[it.key()] = metadata_from_json(it.value());
        }
    }
    load_sections_jsonl(artifact(cfg, kSectionsFile), corpus);
    return corpus;
}

std::string file_hash(const fs::path& p) {
    return sha256_hex(read_file(p)).substr(0, 16);
}

// run_all stamps: a stage is current when config and inputs are unchanged
// and its outputs exist.
struct StageSpec {
    const char* name;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
};

bool stage_is_current(const RunConfig& cfg, const StageSpec& stage) {
    fs::path stamp = fs::path(cfg.output_path) / (std::string(".stamp_") + stage.name);
    if (!fs::exists(stamp)) return false;
    for (const fs::path& out : stage.outputs) {
        if (!fs::exists(out)) return false;
    }
    std::string want = config_hash(cfg);
    for (const fs::path& in : stage.inputs) {
        if (!fs::exists(in)) return false;
        want += ":" + file_hash(in);
    }
    return read_file(stamp) == want;
}

void write_stamp(const RunConfig& cfg, const StageSpec& stage) {
    std::string content = config_hash(cfg);
    for (const fs::path& in : stage.inputs) content += ":" + file_hash(in);
    atomic_write_file(fs::path(cfg.output_path) / (std::string(".stamp_") + stage.name), content);
}

} // namespace

fs::path artifact(const RunConfig& cfg, const char* name) {
    return fs::path(cfg.output_path) / name;
}

GroupRule group_rule_from_config(const RunConfig& cfg) {
    if (cfg.group_key.empty()) throw UserError("group.key is not configured");
    GroupRule rule;
    rule.key = cfg.group_key;
    rule.a = parse_predicate(cfg.group_a);
    rule.b = parse_predicate(cfg.group_b);
    return rule;
}

Corpus ingest_stage(const RunConfig& cfg) {
    if (cfg.corpus_path.empty()) throw UserError("paths.corpus is not configured");
    ParseResult parsed =
        parse_transcripts(cfg.corpus_path, input_format_from_string(cfg.corpus_format));
    for (const ParseIssue& issue : parsed.issues) {
        std::cerr << "parse error at " << issue.source << ":" << issue.line << ": "
                  << issue.message << "\n";
    }
    if (parsed.transcripts.empty()) {
        std::cerr << "warning: corpus '" << cfg.corpus_path << "' produced no transcripts\n";
    }
    IngestConfig icfg{cfg.min_words, cfg.max_words, cfg.drop_questions};
    Corpus corpus = build_corpus(parsed.transcripts, icfg);
    corpus.provenance.parse_error_count = static_cast<int>(parsed.issues.size());
    corpus = preprocess(corpus, icfg);
    atomic_write_file(artifact(cfg, kSectionsFile), sections_to_jsonl(corpus));
    write_provenance(cfg, corpus, parsed.issues);
    return corpus;
}

Corpus load_ingested(const RunConfig& cfg) {
    return load_corpus_with_metadata(cfg);
}

TopicModel fit_stage(const RunConfig& cfg) {
    Corpus corpus = load_ingested(cfg);
    auto embedder = make_embedder(cfg);
    EmbedOptions opts;
    opts.cache_dir = effective_cache_dir(cfg);
    opts.batch_size = cfg.batch_size;
    EmbeddingMatrix emb = embed_corpus(corpus, *embedder, opts);

    TopicConfig tcfg;
    tcfg.reduce.method = cfg.reduce_method;
    tcfg.reduce.target_dim = cfg.target_dim;
    tcfg.reduce.n_neighbors = cfg.n_neighbors;
    tcfg.reduce.epochs = cfg.reduce_epochs;
    tcfg.reduce.seed = fork_seed(cfg.seed, "reduce");
    tcfg.cluster.min_cluster_size = cfg.min_cluster_size;
    tcfg.cluster.min_samples = cfg.min_samples;
    tcfg.top_k = cfg.top_k;
    tcfg.stopwords_path = cfg.stopwords_path;
    TopicModel model = fit_topics(corpus, emb, tcfg);
    model.config_snapshot["stopwords_hash"] = active_stopwords_hash(cfg);
    if (!cfg.labels_path.empty()) apply_label_map(model, cfg.labels_path);

    const std::string hash = config_hash(cfg);
    atomic_write_file(artifact(cfg, kModelFile), model_to_json(model, hash));
    atomic_write_file(artifact(cfg, kAssignmentsFile), assignments_to_csv(model, hash));
    return model;
}

void align_stage(const RunConfig& cfg) {
    TopicModel model = load_model(artifact(cfg, kModelFile), artifact(cfg, kAssignmentsFile));
    const std::string hash = config_hash(cfg);
    std::vector<NarrativeMatrix> matrices = build_matrices(model, cfg.parts);
    atomic_write_file(artifact(cfg, kMatricesFile), matrices_to_csv(matrices, hash));

    std::vector<GroupSchema> schemas;
    std::vector<std::pair<GroupSchema, PartProfile>> profiles;
    if (!cfg.group_key.empty()) {
        Corpus corpus = load_ingested(cfg);
        GroupSplit split = split_by_metadata(corpus, group_rule_from_config(cfg));
        GroupSchema sa = group_schema(select_matrices(matrices, split.a_ids), "A");
        GroupSchema sb = group_schema(select_matrices(matrices, split.b_ids), "B");
        profiles.emplace_back(sa, part_profile(sa));
        profiles.emplace_back(sb, part_profile(sb));
        schemas.push_back(std::move(sa));
        schemas.push_back(std::move(sb));
    } else if (matrices.size() >= 2) {
        GroupSchema all = group_schema(matrices, "all");
        profiles.emplace_back(all, part_profile(all));
        schemas.push_back(std::move(all));
    } else {
        std::cerr << "notice: fewer than 2 testimonies, no schema emitted\n";
    }
    if (!schemas.empty()) {
        atomic_write_file(artifact(cfg, kSchemaFile), schema_to_csv(schemas, hash));
        atomic_write_file(artifact(cfg, kProfileFile), profile_to_csv(profiles, hash));
    }
}

void compare_stage(const RunConfig& cfg) {
    Corpus corpus = load_ingested(cfg);
    GroupSplit split = split_by_metadata(corpus, group_rule_from_config(cfg));
    std::vector<NarrativeMatrix> matrices = load_matrices(artifact(cfg, kMatricesFile));
    std::vector<NarrativeMatrix> a = select_matrices(matrices, split.a_ids);
    std::vector<NarrativeMatrix> b = select_matrices(matrices, split.b_ids);

    std::vector<TTestResult> results = compare_groups(a, b, cfg.include_outlier);
    auto [ca, cb] = characteristic_pairs(results, cfg.t_threshold, cfg.p_threshold,
                                         cfg.mean_diff_threshold);
    ca.group_id = "A";
    cb.group_id = "B";

    const std::string hash = config_hash(cfg);
    atomic_write_file(artifact(cfg, kTTestsFile), ttests_to_csv(results, hash));
    atomic_write_file(artifact(cfg, kCharsetAFile), charset_to_json(ca, hash));
    atomic_write_file(artifact(cfg, kCharsetBFile), charset_to_json(cb, hash));
}

void diverge_stage(const RunConfig& cfg) {
    Corpus corpus = load_ingested(cfg);
    GroupSplit split = split_by_metadata(corpus, group_rule_from_config(cfg));
    std::vector<NarrativeMatrix> matrices = load_matrices(artifact(cfg, kMatricesFile));
    CharacteristicSet ca = load_charset(artifact(cfg, kCharsetAFile));
    CharacteristicSet cb = load_charset(artifact(cfg, kCharsetBFile));

    std::vector<NarrativeMatrix> a = select_matrices(matrices, split.a_ids);
    std::vector<NarrativeMatrix> b = select_matrices(matrices, split.b_ids);
    std::vector<DivergenceScore> ranked_a = rank_divergent(a, ca, cb);
    std::vector<DivergenceScore> ranked_b = rank_divergent(b, cb, ca);

    const std::string hash = config_hash(cfg);
    CsvBuilder csv({"testimony_id", "home_group", "r_home", "r_other", "s", "rank",
                    "degenerate_inputs"});
    csv.set_config_hash(hash);
    auto add_rows = [&](const std::vector<DivergenceScore>& scores) {
        for (size_t i = 0; i < scores.size(); ++i) {
            const DivergenceScore& s = scores[i];
            csv.add_row({s.testimony_id, s.home_group, format_double(s.r_home),
                         format_double(s.r_other), format_double(s.s), std::to_string(i + 1),
                         s.degenerate_inputs ? "1" : "0"});
        }
    };
    add_rows(ranked_a);
    add_rows(ranked_b);
    csv.write(artifact(cfg, kScoresFile));

    std::vector<DivergenceScore> all_scores = ranked_a;
    all_scores.insert(all_scores.end(), ranked_b.begin(), ranked_b.end());
    ScoreHistogram hist = score_histogram(all_scores, cfg.report_bins);
    CsvBuilder hist_csv({"bin", "lo", "hi", "count"});
    hist_csv.set_config_hash(hash);
    for (size_t i = 0; i < hist.counts.size(); ++i) {
        const double lo = hist.lo + hist.width * static_cast<double>(i);
        const double hi = hist.width == 0.0 ? hist.hi : lo + hist.width;
        hist_csv.add_row({std::to_string(i), format_double(lo), format_double(hi),
                          std::to_string(hist.counts[i])});
    }
    hist_csv.write(artifact(cfg, kScoresHistFile));

    // Full matrices of the most divergent testimonies plus the
    // characteristic cells they scored on.
    std::set<std::pair<int, int>> in_a, in_b;
    std::map<std::pair<int, int>, double> abs_t;
    for (const CharacteristicPair& p : ca.pairs) {
        in_a.insert({p.part, p.topic});
        abs_t[{p.part, p.topic}] = p.abs_t;
    }
    for (const CharacteristicPair& p : cb.pairs) {
        in_b.insert({p.part, p.topic});
        abs_t[{p.part, p.topic}] = p.abs_t;
    }
    std::map<std::string, const NarrativeMatrix*> by_id;
    for (const NarrativeMatrix& m : matrices) by_id[m.testimony_id] = &m;

    CsvBuilder top_csv({"testimony_id", "home_group", "s", "part", "topic_id", "share",
                        "section_count", "cset", "abs_t"});
    top_csv.set_config_hash(hash);
    auto add_top = [&](const std::vector<DivergenceScore>& scores, const std::set<std::pair<int, int>>& home_cells,
                       const std::set<std::pair<int, int>>& other_cells) {
        const size_t top_n = std::min<size_t>(scores.size(), static_cast<size_t>(cfg.top_divergent));
        for (size_t i = 0; i < top_n; ++i) {
            const NarrativeMatrix& m = *by_id.at(scores[i].testimony_id);
            for (int part = 0; part < m.parts; ++part) {
                for (int c = 0; c < m.cols(); ++c) {
                    const int topic_id = c == m.n_topics ? -1 : c;
                    const std::pair<int, int> cell{part, topic_id};
                    std::string cset = "none";
                    if (home_cells.count(cell)) cset = "home";
                    else if (other_cells.count(cell)) cset = "other";
                    auto t_it = abs_t.find(cell);
                    top_csv.add_row({m.testimony_id, scores[i].home_group,
                                     format_double(scores[i].s), std::to_string(part),
                                     std::to_string(topic_id), format_double(m.at(part, c)),
                                     std::to_string(m.section_counts[static_cast<size_t>(part)]),
                                     cset,
                                     t_it == abs_t.end() ? "" : format_double(t_it->second)});
                }
            }
        }
    };
    add_top(ranked_a, in_a, in_b);
    add_top(ranked_b, in_b, in_a);
    top_csv.write(artifact(cfg, kTopDivergentFile));
}

void report_stage(const RunConfig& cfg) {
    Corpus corpus = load_ingested(cfg);
    const std::string hash = config_hash(cfg);
    atomic_write_file(artifact(cfg, kCorpusSummaryFile), corpus_summary_csv(corpus, hash));
    atomic_write_file(artifact(cfg, kCorpusHistFile),
                      corpus_histogram_csv(corpus, cfg.report_bins, hash));

    if (fs::exists(artifact(cfg, kModelFile))) {
        TopicModel model = load_model(artifact(cfg, kModelFile), artifact(cfg, kAssignmentsFile));
        atomic_write_file(artifact(cfg, kTopicHistFile), topic_histogram_csv(model, hash));
    }
    if (fs::exists(artifact(cfg, kTTestsFile))) {
        CsvFile ttests = read_csv(artifact(cfg, kTTestsFile));
        std::vector<TTestResult> results;
        const int part_col = ttests.column("part");
        const int topic_col = ttests.column("topic_id");
        const int t_col = ttests.column("t");
        const int p_col = ttests.column("p");
        for (const auto& row : ttests.rows) {
            TTestResult r;
            r.part = std::stoi(row[static_cast<size_t>(part_col)]);
            r.topic = std::stoi(row[static_cast<size_t>(topic_col)]);
            r.t = std::stod(row[static_cast<size_t>(t_col)]);
            r.p = std::stod(row[static_cast<size_t>(p_col)]);
            results.push_back(r);
        }
        CharacteristicSet ca = load_charset(artifact(cfg, kCharsetAFile));
        CharacteristicSet cb = load_charset(artifact(cfg, kCharsetBFile));
        atomic_write_file(artifact(cfg, kHeatmapFile),
                          contrast_heatmap_csv(results, ca, cb, hash));
    }
}

void synth_stage(const RunConfig& cfg, const fs::path& spec_path) {
    PlantedSpec spec = load_planted_spec(spec_path);
    SynthResult result = generate_corpus(spec);
    const std::string spec_hash = sha256_hex(read_file(spec_path)).substr(0, 16);
    atomic_write_file(artifact(cfg, kSynthCorpusFile), synth_to_jsonl(result));
    atomic_write_file(artifact(cfg, kGroundTruthFile), truth_to_csv(result, spec_hash));
}

void run_all(const RunConfig& cfg) {
    const fs::path out(cfg.output_path);
    const bool grouped = !cfg.group_key.empty();

    std::vector<std::pair<StageSpec, std::function<void()>>> stages;
    stages.push_back({{"ingest",
                       {fs::path(cfg.corpus_path)},
                       {artifact(cfg, kSectionsFile), artifact(cfg, kProvenanceFile)}},
                      [&] { ingest_stage(cfg); }});
    stages.push_back({{"fit",
                       {artifact(cfg, kSectionsFile)},
                       {artifact(cfg, kModelFile), artifact(cfg, kAssignmentsFile)}},
                      [&] { fit_stage(cfg); }});
    stages.push_back({{"align",
                       {artifact(cfg, kAssignmentsFile), artifact(cfg, kModelFile),
                        artifact(cfg, kProvenanceFile)},
                       {artifact(cfg, kMatricesFile)}},
                      [&] { align_stage(cfg); }});
    if (grouped) {
        stages.push_back({{"compare",
                           {artifact(cfg, kMatricesFile), artifact(cfg, kProvenanceFile)},
                           {artifact(cfg, kTTestsFile), artifact(cfg, kCharsetAFile),
                            artifact(cfg, kCharsetBFile)}},
                          [&] { compare_stage(cfg); }});
        stages.push_back({{"diverge",
                           {artifact(cfg, kMatricesFile), artifact(cfg, kCharsetAFile),
                            artifact(cfg, kCharsetBFile)},
                           {artifact(cfg, kScoresFile), artifact(cfg, kScoresHistFile),
                            artifact(cfg, kTopDivergentFile)}},
                          [&] { diverge_stage(cfg); }});
    } else {
        std::cerr << "notice: no group rule configured; compare/diverge stages skipped\n";
    }
    {
        std::vector<fs::path> report_inputs = {artifact(cfg, kSectionsFile),
                                               artifact(cfg, kModelFile)};
        std::vector<fs::path> report_outputs = {artifact(cfg, kCorpusSummaryFile),
                                                artifact(cfg, kCorpusHistFile),
                                                artifact(cfg, kTopicHistFile)};
        if (grouped) {
            report_inputs.push_back(artifact(cfg, kTTestsFile));
            report_outputs.push_back(artifact(cfg, kHeatmapFile));
        }
        stages.push_back({{"report", report_inputs, report_outputs}, [&] { report_stage(cfg); }});
    }

    for (auto& [stage, fn] : stages) {
        if (stage_is_current(cfg, stage)) {
            std::cerr << "stage " << stage.name << ": up to date, skipped\n";
            continue;
        }
        fn();
        write_stamp(cfg, stage);
        std::cerr << "stage " << stage.name << ": done\n";
    }
}

std::vector<NarrativeMatrix> load_matrices(const fs::path& path) {
    CsvFile csv = read_csv(path);
    const int id_col = csv.column("testimony_id");
    const int part_col = csv.column("part");
    const int topic_col = csv.column("topic_id");
    const int share_col = csv.column("share");
    const int count_col = csv.column("section_count");
    if (id_col < 0 || part_col < 0 || topic_col < 0 || share_col < 0 || count_col < 0) {
        throw UserError("matrices file missing required columns: " + path.string());
    }
    int parts = 0;
    int n_topics = 0;
    for (const auto& row : csv.rows) {
        parts = std::max(parts, std::stoi(row[static_cast<size_t>(part_col)]) + 1);
        n_topics = std::max(n_topics, std::stoi(row[static_cast<size_t>(topic_col)]) + 1);
    }
    std::vector<NarrativeMatrix> matrices;
    std::map<std::string, size_t> index;
    for (const auto& row : csv.rows) {
        const std::string& id = row[static_cast<size_t>(id_col)];
        auto [it, inserted] = index.try_emplace(id, matrices.size());
        if (inserted) {
            NarrativeMatrix m;
            m.testimony_id = id;
            m.parts = parts;
            m.n_topics = n_topics;
            m.shares.assign(static_cast<size_t>(parts) * (n_topics + 1), 0.0);
            m.section_counts.assign(static_cast<size_t>(parts), 0);
            matrices.push_back(std::move(m));
        }
        NarrativeMatrix& m = matrices[it->second];
        const int part = std::stoi(row[static_cast<size_t>(part_col)]);
        const int topic = std::stoi(row[static_cast<size_t>(topic_col)]);
        m.at(part, topic < 0 ? n_topics : topic) = std::stod(row[static_cast<size_t>(share_col)]);
        m.section_counts[static_cast<size_t>(part)] =
            std::stoi(row[static_cast<size_t>(count_col)]);
    }
    return matrices;
}

CharacteristicSet load_charset(const fs::path& path) {
    json j = json::parse(read_file(path));
    CharacteristicSet cset;
    cset.group_id = j.at("group_id").get<std::string>();
    cset.t_threshold = j.at("thresholds").at("t").get<double>();
    cset.p_threshold = j.at("thresholds").at("p").get<double>();
    cset.has_degenerate = j.value("has_degenerate", false);
    for (const auto& jp : j.at("pairs")) {
        cset.pairs.push_back({jp.at("part").get<int>(), jp.at("topic").get<int>(),
                              jp.at("abs_t").get<double>()});
    }
    return cset;
}

namespace {

void check_columns(const CsvFile& csv, const std::vector<std::string>& expected,
                   const std::string& name, std::vector<std::string>& problems) {
    if (csv.header != expected) {
        std::string want;
        for (const std::string& c : expected) want += c + ",";
        std::string got;
        for (const std::string& c : csv.header) got += c + ",";
        problems.push_back(name + ": header [" + got + "] != expected [" + want + "]");
    }
}

void check_hash(const std::string& embedded, const std::string& want, const std::string& name,
                std::vector<std::string>& problems) {
    if (embedded.empty()) problems.push_back(name + ": missing config hash");
    else if (embedded != want) {
        problems.push_back(name + ": config hash " + embedded + " != current " + want);
    }
}

} // namespace

std::vector<std::string> validate_outputs(const RunConfig& cfg) {
    std::vector<std::string> problems;
    const std::string want_hash = config_hash(cfg);
    const fs::path out(cfg.output_path);
    if (!fs::exists(out)) return {"output directory does not exist: " + out.string()};

    auto present = [&](const char* name) { return fs::exists(artifact(cfg, name)); };

    size_t n_sections = 0;
    if (present(kSectionsFile)) {
        try {
            std::map<std::string, int> next_index;
            for (const std::string& line : split_lines(read_file(artifact(cfg, kSectionsFile)))) {
                if (trim(line).empty()) continue;
                json j = json::parse(line);
                const std::string id = j.at("testimony_id").get<std::string>();
                const int index = j.at("index").get<int>();
                const int wc = j.at("word_count").get<int>();
                const std::string text = j.at("text").get<std::string>();
                if (count_words(text) != wc) {
                    problems.push_back("sections.jsonl: " + id + "#" + std::to_string(index) +
                                       " word_count " + std::to_string(wc) + " != actual " +
                                       std::to_string(count_words(text)));
                }
                auto [it, inserted] = next_index.try_emplace(id, 0);
                if (index != it->second) {
                    problems.push_back("sections.jsonl: " + id + " index " +
                                       std::to_string(index) + " not consecutive");
                }
                ++it->second;
                ++n_sections;
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("sections.jsonl: ") + e.what());
        }
    }

    if (present(kProvenanceFile)) {
        try {
            json j = json::parse(read_file(artifact(cfg, kProvenanceFile)));
            check_hash(j.value("config_hash", ""), want_hash, "provenance.json", problems);
            if (!j.contains("created_at")) problems.push_back("provenance.json: missing created_at");
            if (!j.contains("transcripts")) problems.push_back("provenance.json: missing transcripts");
            if (j.contains("n_sections") && j["n_sections"].get<size_t>() != n_sections &&
                present(kSectionsFile)) {
                problems.push_back("provenance.json: n_sections mismatch with sections.jsonl");
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("provenance.json: ") + e.what());
        }
    }

    int n_topics = -1;
    if (present(kModelFile)) {
        try {
            json j = json::parse(read_file(artifact(cfg, kModelFile)));
            check_hash(j.value("config_hash", ""), want_hash, "model.json", problems);
            long size_sum = 0;
            long prev_size = -1;
            int expect_id = 0;
            for (const auto& jt : j.at("topics")) {
                if (jt.at("id").get<int>() != expect_id) {
                    problems.push_back("model.json: topic ids not contiguous at " +
                                       std::to_string(expect_id));
                    break;
                }
                const long size = jt.at("size").get<long>();
                if (prev_size >= 0 && size > prev_size) {
                    problems.push_back("model.json: topic sizes not non-increasing at id " +
                                       std::to_string(expect_id));
                }
                double prev_w = -1.0;
                for (const auto& jw : jt.at("words")) {
                    const double w = jw.at(1).get<double>();
                    if (w < 0.0) problems.push_back("model.json: negative word weight");
                    if (prev_w >= 0.0 && w > prev_w) {
                        problems.push_back("model.json: word weights not sorted in topic " +
                                           std::to_string(expect_id));
                        break;
                    }
                    prev_w = w;
                }
                size_sum += size;
                prev_size = size;
                ++expect_id;
            }
            n_topics = expect_id;
            size_sum += j.at("outlier").at("size").get<long>();
            if (present(kSectionsFile) && size_sum != static_cast<long>(n_sections)) {
                problems.push_back("model.json: topic sizes + outliers = " +
                                   std::to_string(size_sum) + " != sections " +
                                   std::to_string(n_sections));
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("model.json: ") + e.what());
        }
    }

    if (present(kAssignmentsFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kAssignmentsFile));
            check_columns(csv, {"testimony_id", "section_index", "topic_id"}, "assignments.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "assignments.csv", problems);
            if (present(kSectionsFile) && csv.rows.size() != n_sections) {
                problems.push_back("assignments.csv: " + std::to_string(csv.rows.size()) +
                                   " rows != " + std::to_string(n_sections) + " sections");
            }
            for (const auto& row : csv.rows) {
                const int t = std::stoi(row[2]);
                if (t < -1 || (n_topics >= 0 && t >= n_topics)) {
                    problems.push_back("assignments.csv: topic id " + std::to_string(t) +
                                       " out of range");
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("assignments.csv: ") + e.what());
        }
    }

    if (present(kMatricesFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kMatricesFile));
            check_columns(csv, {"testimony_id", "part", "topic_id", "share", "section_count"},
                          "matrices.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "matrices.csv", problems);
            std::map<std::pair<std::string, int>, std::pair<double, int>> row_sums;
            for (const auto& row : csv.rows) {
                const double share = std::stod(row[3]);
                if (share < -1e-12 || share > 1.0 + 1e-12) {
                    problems.push_back("matrices.csv: share " + row[3] + " outside [0,1]");
                    break;
                }
                auto& [sum, count] = row_sums[{row[0], std::stoi(row[1])}];
                sum += share;
                count = std::stoi(row[4]);
            }
            for (const auto& [key, sc] : row_sums) {
                const auto& [sum, count] = sc;
                const bool zero_row = std::abs(sum) < 1e-9;
                if (!zero_row && std::abs(sum - 1.0) > 1e-9) {
                    problems.push_back("matrices.csv: " + key.first + " part " +
                                       std::to_string(key.second) + " shares sum to " +
                                       format_double(sum));
                    break;
                }
                if (zero_row && count != 0) {
                    problems.push_back("matrices.csv: " + key.first + " part " +
                                       std::to_string(key.second) +
                                       " is a zero row with nonzero section_count");
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("matrices.csv: ") + e.what());
        }
    }

    if (present(kSchemaFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kSchemaFile));
            check_columns(csv, {"group_id", "part", "topic_id", "mean_share"}, "schema.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "schema.csv", problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("schema.csv: ") + e.what());
        }
    }
    if (present(kProfileFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kProfileFile));
            check_columns(csv,
                          {"group_id", "part", "rank", "topic_id", "share", "diversity",
                           "dispersion"},
                          "profile.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "profile.csv", problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("profile.csv: ") + e.what());
        }
    }

    size_t ttest_rows = 0;
    if (present(kTTestsFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kTTestsFile));
            check_columns(csv,
                          {"part", "topic_id", "t", "p", "mean_a", "mean_b", "n_a", "n_b",
                           "degenerate"},
                          "ttests.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "ttests.csv", problems);
            ttest_rows = csv.rows.size();
            if (ttest_rows % static_cast<size_t>(cfg.parts) != 0) {
                problems.push_back("ttests.csv: row count " + std::to_string(ttest_rows) +
                                   " is not a multiple of parts " + std::to_string(cfg.parts));
            }
            for (const auto& row : csv.rows) {
                const double t = std::stod(row[2]);
                const double p = std::stod(row[3]);
                const double diff = std::stod(row[4]) - std::stod(row[5]);
                if (p < 0.0 || p > 1.0) {
                    problems.push_back("ttests.csv: p outside [0,1]");
                    break;
                }
                if (t != 0.0 && !std::isnan(t) && diff != 0.0 &&
                    std::signbit(t) != std::signbit(diff)) {
                    problems.push_back("ttests.csv: sign(t) != sign(mean_a - mean_b) at part " +
                                       row[0] + " topic " + row[1]);
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("ttests.csv: ") + e.what());
        }
    }

    for (const char* name : {kCharsetAFile, kCharsetBFile}) {
        if (!present(name)) continue;
        try {
            json j = json::parse(read_file(artifact(cfg, name)));
            check_hash(j.value("config_hash", ""), want_hash, name, problems);
            const double t_thr = j.at("thresholds").at("t").get<double>();
            std::set<std::pair<int, int>> seen;
            for (const auto& jp : j.at("pairs")) {
                const double abs_t = jp.at("abs_t").get<double>();
                if (!(abs_t > t_thr)) {
                    problems.push_back(std::string(name) + ": pair abs_t " +
                                       format_double(abs_t) + " <= threshold");
                    break;
                }
                if (!seen.insert({jp.at("part").get<int>(), jp.at("topic").get<int>()}).second) {
                    problems.push_back(std::string(name) + ": duplicate (part, topic) pair");
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string(name) + ": " + e.what());
        }
    }

    size_t score_rows = 0;
    if (present(kScoresFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kScoresFile));
            check_columns(csv,
                          {"testimony_id", "home_group", "r_home", "r_other", "s", "rank",
                           "degenerate_inputs"},
                          "scores.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "scores.csv", problems);
            score_rows = csv.rows.size();
            std::map<std::string, double> prev_s;
            for (const auto& row : csv.rows) {
                const double r_home = std::stod(row[2]);
                const double r_other = std::stod(row[3]);
                const double s = std::stod(row[4]);
                if (std::abs(s - (r_other - r_home)) > 1e-12) {
                    problems.push_back("scores.csv: s != r_other - r_home for " + row[0]);
                    break;
                }
                auto it = prev_s.find(row[1]);
                if (it != prev_s.end() && s > it->second + 1e-15) {
                    problems.push_back("scores.csv: not sorted by s within group " + row[1]);
                    break;
                }
                prev_s[row[1]] = s;
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("scores.csv: ") + e.what());
        }
    }

    if (present(kScoresHistFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kScoresHistFile));
            check_columns(csv, {"bin", "lo", "hi", "count"}, "scores_hist.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "scores_hist.csv", problems);
            long total = 0;
            for (const auto& row : csv.rows) total += std::stol(row[3]);
            if (present(kScoresFile) && total != static_cast<long>(score_rows)) {
                problems.push_back("scores_hist.csv: counts sum " + std::to_string(total) +
                                   " != score rows " + std::to_string(score_rows));
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("scores_hist.csv: ") + e.what());
        }
    }

    if (present(kTopDivergentFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kTopDivergentFile));
            check_columns(csv,
                          {"testimony_id", "home_group", "s", "part", "topic_id", "share",
                           "section_count", "cset", "abs_t"},
                          "top_divergent.csv", problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "top_divergent.csv",
                       problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("top_divergent.csv: ") + e.what());
        }
    }

    if (present(kCorpusSummaryFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kCorpusSummaryFile));
            check_columns(csv, {"testimony_id", "words", "sections"}, "corpus_summary.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "corpus_summary.csv",
                       problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("corpus_summary.csv: ") + e.what());
        }
    }
    if (present(kCorpusHistFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kCorpusHistFile));
            check_columns(csv, {"metric", "bin", "lo", "hi", "count"}, "corpus_hist.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "corpus_hist.csv", problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("corpus_hist.csv: ") + e.what());
        }
    }
    if (present(kTopicHistFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kTopicHistFile));
            check_columns(csv, {"topic_id", "title", "size", "share"}, "topic_histogram.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "topic_histogram.csv",
                       problems);
            double share_sum = 0.0;
            long prev_size = -1;
            bool first = true;
            for (const auto& row : csv.rows) {
                share_sum += std::stod(row[3]);
                const long size = std::stol(row[2]);
                if (!first && size > prev_size) {
                    problems.push_back("topic_histogram.csv: not sorted by size");
                    break;
                }
                prev_size = size;
                first = false;
            }
            if (!csv.rows.empty() && std::abs(share_sum - 1.0) > 1e-9) {
                problems.push_back("topic_histogram.csv: shares sum to " +
                                   format_double(share_sum));
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("topic_histogram.csv: ") + e.what());
        }
    }
    if (present(kHeatmapFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kHeatmapFile));
            check_columns(csv, {"part", "topic_id", "t", "p", "significant"}, "heatmap.csv",
                          problems);
            check_hash(csv.comment_value("config_hash"), want_hash, "heatmap.csv", problems);
            if (present(kTTestsFile) && csv.rows.size() != ttest_rows) {
                problems.push_back("heatmap.csv: row count != ttests.csv row count");
            }
            for (const auto& row : csv.rows) {
                if (row[4] != "0" && row[4] != "1") {
                    problems.push_back("heatmap.csv: significant flag must be 0/1");
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("heatmap.csv: ") + e.what());
        }
    }

    if (present(kGroundTruthFile)) {
        try {
            CsvFile csv = read_csv(artifact(cfg, kGroundTruthFile));
            check_columns(csv, {"testimony_id", "section_index", "planted_topic", "group",
                                "is_swap"},
                          "ground_truth.csv", problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("ground_truth.csv: ") + e.what());
        }
    }
    if (present(kSynthCorpusFile)) {
        try {
            for (const std::string& line : split_lines(read_file(artifact(cfg, kSynthCorpusFile)))) {
                if (trim(line).empty()) continue;
                json j = json::parse(line);
                if (!j.contains("testimony_id") || !j.contains("turns")) {
                    problems.push_back("corpus.jsonl: record missing testimony_id or turns");
                    break;
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("corpus.jsonl: ") + e.what());
        }
    }
    return problems;
}

} // namespace ntp::pipeline
