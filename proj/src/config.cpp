#include "narratopo/config.hpp"

#include <cstdlib>
#include <functional>

#include "narratopo/errors.hpp"
#include "narratopo/hash.hpp"
#include "narratopo/io.hpp"
#include "narratopo/text.hpp"

namespace fs = std::filesystem;

namespace ntp {
namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UserError("config key " + key + " expects a boolean, got '" + v + "'");
}

long parse_int(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UserError("config key " + key + " expects an integer, got '" + v + "'");
    }
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UserError("config key " + key + " expects a number, got '" + v + "'");
    }
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "paths.corpus") cfg.corpus_path = value;
    else if (key == "paths.output") cfg.output_path = value;
    else if (key == "paths.cache") cfg.cache_path = value;
    else if (key == "corpus.format") cfg.corpus_format = value;
    else if (key == "ingest.min_words") cfg.min_words = static_cast<int>(parse_int(value, key));
    else if (key == "ingest.max_words") cfg.max_words = static_cast<int>(parse_int(value, key));
    else if (key == "ingest.drop_questions") cfg.drop_questions = parse_bool(value, key);
    else if (key == "embedder.id") cfg.embedder_id = value;
    else if (key == "embedder.dim") cfg.embedder_dim = static_cast<int>(parse_int(value, key));
    else if (key == "embedder.seed") cfg.embedder_seed = static_cast<uint64_t>(parse_int(value, key));
    else if (key == "embedder.batch_size") cfg.batch_size = static_cast<int>(parse_int(value, key));
    else if (key == "reduce.method") cfg.reduce_method = value;
    else if (key == "reduce.target_dim") cfg.target_dim = static_cast<int>(parse_int(value, key));
    else if (key == "reduce.n_neighbors") cfg.n_neighbors = static_cast<int>(parse_int(value, key));
    else if (key == "reduce.epochs") cfg.reduce_epochs = static_cast<int>(parse_int(value, key));
    else if (key == "topics.min_cluster_size") cfg.min_cluster_size = static_cast<int>(parse_int(value, key));
    else if (key == "topics.min_samples") cfg.min_samples = static_cast<int>(parse_int(value, key));
    else if (key == "topics.top_k") cfg.top_k = static_cast<int>(parse_int(value, key));
    else if (key == "topics.stopwords") cfg.stopwords_path = value;
    else if (key == "topics.labels") cfg.labels_path = value;
    else if (key == "narrative.parts") cfg.parts = static_cast<int>(parse_int(value, key));
    else if (key == "stats.t_threshold") cfg.t_threshold = parse_real(value, key);
    else if (key == "stats.p_threshold") cfg.p_threshold = parse_real(value, key);
    else if (key == "stats.include_outlier") cfg.include_outlier = parse_bool(value, key);
    else if (key == "stats.mean_diff_threshold") cfg.mean_diff_threshold = parse_real(value, key);
    else if (key == "group.key") cfg.group_key = value;
    else if (key == "group.a") cfg.group_a = value;
    else if (key == "group.b") cfg.group_b = value;
    else if (key == "report.bins") cfg.report_bins = static_cast<int>(parse_int(value, key));
    else if (key == "report.top_divergent") cfg.top_divergent = static_cast<int>(parse_int(value, key));
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(value, key));
    else throw UserError("unknown config key: " + key);
}

void apply_line(RunConfig& cfg, const std::string& raw, const std::string& where) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw UserError(where + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    apply_key(cfg, key, value);
}

void validate(const RunConfig& cfg) {
    if (cfg.min_words <= 0 || cfg.max_words <= 0) throw UserError("word thresholds must be positive");
    if (cfg.min_words >= cfg.max_words) throw UserError("ingest.min_words must be below ingest.max_words");
    if (cfg.parts < 2) throw UserError("narrative.parts must be >= 2");
    if (cfg.t_threshold <= 0.0) throw UserError("stats.t_threshold must be positive");
    if (cfg.p_threshold <= 0.0 || cfg.p_threshold > 1.0) throw UserError("stats.p_threshold must be in (0, 1]");
    if (cfg.min_cluster_size < 2) throw UserError("topics.min_cluster_size must be >= 2");
    if (cfg.top_k < 1) throw UserError("topics.top_k must be >= 1");
    if (cfg.target_dim < 1) throw UserError("reduce.target_dim must be >= 1");
    if (cfg.n_neighbors < 2) throw UserError("reduce.n_neighbors must be >= 2");
    if (cfg.report_bins < 1) throw UserError("report.bins must be >= 1");
    if (cfg.embedder_dim < 1) throw UserError("embedder.dim must be >= 1");
}

} // namespace

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    int line_no = 0;
    for (const std::string& line : split_lines(read_file(path))) {
        ++line_no;
        apply_line(cfg, line, path.string() + ":" + std::to_string(line_no));
    }
    for (const std::string& o : overrides) apply_line(cfg, o, "--set " + o);
    validate(cfg);
    return cfg;
}

RunConfig config_from_overrides(const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const std::string& o : overrides) apply_line(cfg, o, "--set " + o);
    validate(cfg);
    return cfg;
}

// Filesystem locations stay out of the canonical form: the hash pins the
// analysis parameters, so equal configs in different directories produce
// byte-identical artifacts.
std::string canonical_config(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["corpus.format"] = cfg.corpus_format;
    kv["ingest.min_words"] = std::to_string(cfg.min_words);
    kv["ingest.max_words"] = std::to_string(cfg.max_words);
    kv["ingest.drop_questions"] = cfg.drop_questions ? "true" : "false";
    kv["embedder.id"] = cfg.embedder_id;
    kv["embedder.dim"] = std::to_string(cfg.embedder_dim);
    kv["embedder.seed"] = std::to_string(cfg.embedder_seed);
    kv["embedder.batch_size"] = std::to_string(cfg.batch_size);
    kv["reduce.method"] = cfg.reduce_method;
    kv["reduce.target_dim"] = std::to_string(cfg.target_dim);
    kv["reduce.n_neighbors"] = std::to_string(cfg.n_neighbors);
    kv["reduce.epochs"] = std::to_string(cfg.reduce_epochs);
    kv["topics.min_cluster_size"] = std::to_string(cfg.min_cluster_size);
    kv["topics.min_samples"] = std::to_string(cfg.min_samples);
    kv["topics.top_k"] = std::to_string(cfg.top_k);
    kv["topics.stopwords"] = cfg.stopwords_path;
    kv["topics.labels"] = cfg.labels_path;
    kv["narrative.parts"] = std::to_string(cfg.parts);
    kv["stats.t_threshold"] = format_double(cfg.t_threshold);
    kv["stats.p_threshold"] = format_double(cfg.p_threshold);
    kv["stats.include_outlier"] = cfg.include_outlier ? "true" : "false";
    kv["stats.mean_diff_threshold"] = format_double(cfg.mean_diff_threshold);
    kv["group.key"] = cfg.group_key;
    kv["group.a"] = cfg.group_a;
    kv["group.b"] = cfg.group_b;
    kv["report.bins"] = std::to_string(cfg.report_bins);
    kv["report.top_divergent"] = std::to_string(cfg.top_divergent);
    kv["seed"] = std::to_string(cfg.seed);

    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    return sha256_hex(canonical_config(cfg)).substr(0, 16);
}

fs::path effective_cache_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("NARRATOPO_CACHE"); env && *env) return fs::path(env);
    if (!cfg.cache_path.empty()) return fs::path(cfg.cache_path);
    return fs::path(cfg.output_path) / "cache";
}

} // namespace ntp
