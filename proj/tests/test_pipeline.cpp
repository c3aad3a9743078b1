#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "narratopo/config.hpp"
#include "narratopo/errors.hpp"
#include "narratopo/io.hpp"
#include "narratopo/pipeline.hpp"
#include "narratopo/synthlab.hpp"

namespace fs = std::filesystem;
using namespace ntp;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NARRATOPO_BIN) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Planted two-group spec small enough for quick CLI runs.
void write_small_spec(const fs::path& path, uint64_t seed = 5) {
    std::string spec = R"({
  "n_topics": 4, "vocab_per_topic": 40,
  "n_group_a": 12, "n_group_b": 12,
  "min_sections": 16, "max_sections": 20,
  "parts": 4, "noise_rate": 0.1,
  "swap_fraction": 0.0, "seed": )" + std::to_string(seed) + "}";
    atomic_write_file(path, spec);
}

std::string write_config(const fs::path& dir, const fs::path& out,
                         const std::map<std::string, std::string>& extra = {}) {
    std::map<std::string, std::string> kv = {
        {"paths.corpus", (out / "corpus.jsonl").string()},
        {"paths.output", out.string()},
        {"embedder.id", "hashed-bow"},
        {"embedder.dim", "64"},
        {"reduce.target_dim", "3"},
        {"reduce.n_neighbors", "10"},
        {"reduce.epochs", "80"},
        {"topics.min_cluster_size", "30"},
        {"narrative.parts", "4"},
        {"group.key", "group"},
        {"group.a", "A"},
        {"group.b", "B"},
        {"seed", "11"},
    };
    for (const auto& [k, v] : extra) kv[k] = v;
    std::string content;
    for (const auto& [k, v] : kv) content += k + " = " + v + "\n";
    fs::path cfg_path = dir / "run.cfg";
    atomic_write_file(cfg_path, content);
    return cfg_path.string();
}

} // namespace

TEST_CASE("config parsing, overrides and canonical hash") {
    fs::path dir = fresh_dir("ntp_cfg");
    fs::path p = dir / "a.cfg";
    atomic_write_file(p, "# comment\nseed = 7\ntopics.min_cluster_size=40\n\n");
    RunConfig cfg = load_config(p, {"narrative.parts=10"});
    CHECK(cfg.seed == 7);
    CHECK(cfg.min_cluster_size == 40);
    CHECK(cfg.parts == 10);

    // canonical form is stable and covers overrides
    RunConfig direct = config_from_overrides(
        {"seed=7", "topics.min_cluster_size=40", "narrative.parts=10"});
    CHECK(canonical_config(cfg) == canonical_config(direct));
    CHECK(config_hash(cfg) == config_hash(direct));
    CHECK(config_hash(cfg).size() == 16);

    // unknown keys and invalid values are user errors
    CHECK_THROWS_AS(load_config(p, {"topics.minClusterSize=40"}), UserError);
    CHECK_THROWS_AS(load_config(p, {"narrative.parts=one"}), UserError);
    CHECK_THROWS_AS(load_config(p, {"narrative.parts=1"}), UserError);
    CHECK_THROWS_AS(load_config(p, {"ingest.min_words=500"}), UserError);
}

TEST_CASE("predicate parsing") {
    auto range = parse_predicate("1925..1940");
    CHECK(range.matches("1930"));
    CHECK(range.matches("1925"));
    CHECK(range.matches("1940"));
    CHECK_FALSE(range.matches("1941"));
    CHECK_FALSE(range.matches("abc"));

    auto values = parse_predicate("male,other");
    CHECK(values.matches("male"));
    CHECK(values.matches("other"));
    CHECK_FALSE(values.matches("female"));

    CHECK_THROWS_AS(parse_predicate(""), UserError);
    CHECK_THROWS_AS(parse_predicate("9..1"), UserError);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.0, 1.0, -1.5, 0.1, 1e-12, 3.141592653589793}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("atomic write leaves no temp file") {
    fs::path dir = fresh_dir("ntp_atomic");
    atomic_write_file(dir / "x.txt", "payload");
    CHECK(read_file(dir / "x.txt") == "payload");
    CHECK_FALSE(fs::exists(dir / "x.txt.tmp"));
}

TEST_CASE("full cli pipeline on a synthetic corpus") {
    fs::path out = fresh_dir("ntp_e2e");
    write_small_spec(out / "spec.json");
    std::string cfg = write_config(out, out);

    REQUIRE(run_cli("synth --config " + cfg + " --spec " + (out / "spec.json").string()) == 0);
    REQUIRE(fs::exists(out / "corpus.jsonl"));
    REQUIRE(run_cli("run --config " + cfg) == 0);

    for (const char* name :
         {"sections.jsonl", "provenance.json", "model.json", "assignments.csv", "matrices.csv",
          "schema.csv", "profile.csv", "ttests.csv", "charset_a.json", "charset_b.json",
          "scores.csv", "scores_hist.csv", "top_divergent.csv", "corpus_summary.csv",
          "corpus_hist.csv", "topic_histogram.csv", "heatmap.csv"}) {
        INFO(name);
        CHECK(fs::exists(out / name));
    }

    CHECK(run_cli("validate --config " + cfg) == 0);

    SUBCASE("validate fails after tampering") {
        std::string scores = read_file(out / "scores.csv");
        const size_t pos = scores.find("\nA", 20);
        REQUIRE(pos != std::string::npos);
        scores.insert(pos + 1, "tampered_id_with_wrong_s,A,9,9,9,0,0\n");
        atomic_write_file(out / "scores.csv", scores);
        CHECK(run_cli("validate --config " + cfg) == 1);
    }
}

TEST_CASE("run is resumable: unchanged stages are skipped") {
    fs::path out = fresh_dir("ntp_resume");
    write_small_spec(out / "spec.json");
    std::string cfg = write_config(out, out);
    REQUIRE(run_cli("synth --config " + cfg + " --spec " + (out / "spec.json").string()) == 0);
    REQUIRE(run_cli("run --config " + cfg) == 0);

    const auto mtime_before = fs::last_write_time(out / "model.json");
    REQUIRE(run_cli("run --config " + cfg) == 0);
    CHECK(fs::last_write_time(out / "model.json") == mtime_before);

    // a config change invalidates the stamps
    std::string cfg2 = write_config(out, out, {{"seed", "12"}});
    REQUIRE(run_cli("run --config " + cfg2) == 0);
    CHECK(fs::last_write_time(out / "model.json") != mtime_before);
}

TEST_CASE("fit without cache or embedder runtime exits 1 and writes no model") {
    fs::path out = fresh_dir("ntp_nocache");
    write_small_spec(out / "spec.json");
    std::string cfg = write_config(out, out, {{"embedder.id", "all-MiniLM-L6-v2"}});
    REQUIRE(run_cli("synth --config " + cfg + " --spec " + (out / "spec.json").string()) == 0);
    REQUIRE(run_cli("ingest --config " + cfg) == 0);
    CHECK(run_cli("fit --config " + cfg) == 1);
    CHECK_FALSE(fs::exists(out / "model.json"));
}

TEST_CASE("deterministic reruns produce byte-identical artifacts") {
    fs::path base = fresh_dir("ntp_det");
    write_small_spec(base / "spec.json");

    auto run_into = [&](const std::string& name) {
        fs::path out = base / name;
        fs::create_directories(out);
        std::string cfg = write_config(out, out);
        REQUIRE(run_cli("synth --config " + cfg + " --spec " + (base / "spec.json").string()) == 0);
        REQUIRE(run_cli("run --config " + cfg) == 0);
        return out;
    };
    fs::path out1 = run_into("r1");
    fs::path out2 = run_into("r2");

    for (const char* name : {"sections.jsonl", "model.json", "assignments.csv", "matrices.csv",
                             "schema.csv", "ttests.csv", "charset_a.json", "charset_b.json",
                             "scores.csv", "heatmap.csv", "topic_histogram.csv"}) {
        INFO(name);
        CHECK(read_file(out1 / name) == read_file(out2 / name));
    }
    // provenance differs only in the timestamp line
    auto strip_time = [](std::string s) {
        const size_t pos = s.find("\"created_at\"");
        REQUIRE(pos != std::string::npos);
        const size_t end = s.find('\n', pos);
        s.erase(pos, end - pos);
        return s;
    };
    CHECK(strip_time(read_file(out1 / "provenance.json")) ==
          strip_time(read_file(out2 / "provenance.json")));
}

TEST_CASE("NARRATOPO_CACHE environment override wins") {
    fs::path out = fresh_dir("ntp_cache_env");
    RunConfig cfg;
    cfg.output_path = out.string();
    cfg.cache_path = (out / "explicit").string();
    setenv("NARRATOPO_CACHE", (out / "env").string().c_str(), 1);
    CHECK(effective_cache_dir(cfg) == out / "env");
    unsetenv("NARRATOPO_CACHE");
    CHECK(effective_cache_dir(cfg) == out / "explicit");
    cfg.cache_path.clear();
    CHECK(effective_cache_dir(cfg) == out / "cache");
}

TEST_CASE("plain text corpus format flows through ingest") {
    fs::path out = fresh_dir("ntp_plainfmt");
    fs::path corpus_dir = out / "plain";
    fs::create_directories(corpus_dir);
    std::string answer;
    for (int i = 0; i < 300; ++i) answer += " word" + std::to_string(i);
    atomic_write_file(corpus_dir / "P1.txt",
                      "Q: tell me about the town where you were born and your family life\n"
                      "A:" + answer + "\n");
    atomic_write_file(corpus_dir / "P1.meta.json", R"({"gender":"female","birth_year":1931})");

    std::string cfg = write_config(out, out, {{"paths.corpus", corpus_dir.string()},
                                              {"corpus.format", "plain_qa"},
                                              {"group.key", ""},
                                              {"group.a", ""},
                                              {"group.b", ""}});
    CHECK(run_cli("ingest --config " + cfg) == 0);
    CHECK(fs::exists(out / "sections.jsonl"));
}
