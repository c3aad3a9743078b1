// End-to-end acceptance suite. Each criterion prints one line:
//   [PASS] criterion N: <summary>
//   [FAIL] criterion N: <summary>
// and the process exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "narratopo/config.hpp"
#include "narratopo/divergence.hpp"
#include "narratopo/embedding.hpp"
#include "narratopo/ingest.hpp"
#include "narratopo/io.hpp"
#include "narratopo/narrative.hpp"
#include "narratopo/pipeline.hpp"
#include "narratopo/stats.hpp"
#include "narratopo/synthlab.hpp"
#include "narratopo/text.hpp"
#include "narratopo/topics.hpp"
#include "oracles.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace ntp;
using Clock = std::chrono::steady_clock;

namespace {

void write_spec_json(const PlantedSpec& spec, const fs::path& path) {
    nlohmann::ordered_json j;
    j["n_topics"] = spec.n_topics;
    j["vocab_per_topic"] = spec.vocab_per_topic;
    j["n_group_a"] = spec.n_group_a;
    j["n_group_b"] = spec.n_group_b;
    j["min_sections"] = spec.min_sections;
    j["max_sections"] = spec.max_sections;
    j["parts"] = spec.parts;
    j["min_section_words"] = spec.min_section_words;
    j["max_section_words"] = spec.max_section_words;
    j["swap_fraction"] = spec.swap_fraction;
    j["noise_rate"] = spec.noise_rate;
    j["noise_vocab"] = spec.noise_vocab;
    j["seed"] = spec.seed;
    if (!spec.schema_a.empty()) j["schema_a"] = spec.schema_a;
    if (!spec.schema_b.empty()) j["schema_b"] = spec.schema_b;
    atomic_write_file(path, j.dump(2) + "\n");
}

int g_failures = 0;

void report(int criterion, bool pass, const std::string& summary) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << summary
              << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> planted_labels_for(const Corpus& corpus, const SynthResult& synth) {
    std::map<std::pair<std::string, int>, int> planted;
    for (const GroundTruthRow& row : synth.truth) {
        planted[{row.testimony_id, row.section_index}] = row.planted_topic;
    }
    std::vector<int> out;
    out.reserve(corpus.sections.size());
    for (const Section& s : corpus.sections) {
        out.push_back(planted.at({s.testimony_id, s.index}));
    }
    return out;
}

// Criterion 1: planted topic recovery at full scale, 10 seeds.
void criterion_1() {
    int good_seeds = 0;
    double worst_purity = 1.0;
    double worst_time = 0.0;
    int min_topics = 1 << 30, max_topics = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const auto start = Clock::now();
        PlantedSpec spec;
        spec.n_topics = 8;
        spec.vocab_per_topic = 150;
        spec.n_group_a = 100;
        spec.n_group_b = 100;
        spec.min_sections = 40;
        spec.max_sections = 40;
        spec.parts = 15;
        spec.noise_rate = 0.1;
        spec.noise_vocab = 150;
        spec.seed = seed;
        SynthResult synth = generate_corpus(spec);
        IngestConfig icfg;
        Corpus corpus = preprocess(build_corpus(synth.transcripts, icfg), icfg);

        auto embedder = hashed_bow_embedder(256, seed * 7 + 1);
        EmbeddingMatrix emb = embed_corpus(corpus, *embedder);

        TopicConfig tcfg;
        tcfg.reduce.target_dim = 5;
        tcfg.reduce.n_neighbors = 15;
        tcfg.reduce.seed = seed * 31 + 5;
        tcfg.cluster.min_cluster_size = 50;
        TopicModel model = fit_topics(corpus, emb, tcfg);

        const double elapsed = seconds_since(start);
        const double pur = purity(model.assignments, planted_labels_for(corpus, synth));
        const int k = model.topic_count();
        min_topics = std::min(min_topics, k);
        max_topics = std::max(max_topics, k);
        worst_purity = std::min(worst_purity, pur);
        worst_time = std::max(worst_time, elapsed);
        if (k >= 6 && k <= 10 && pur >= 0.90 && elapsed < 120.0) ++good_seeds;
    }
    report(1, good_seeds >= 9,
           "planted topic recovery: " + std::to_string(good_seeds) +
               "/10 seeds recovered 8+-2 topics with purity >= 0.90 (topics " +
               std::to_string(min_topics) + ".." + std::to_string(max_topics) +
               ", worst purity " + format_double(worst_purity) + ", worst fit " +
               format_double(worst_time) + "s)");
}

// Criterion 2: c-TF-IDF exactness on the toy example and vocabulary purity
// of recovered topic words on planted corpora.
void criterion_2() {
    // toy two-class example, hand-computed weights
    Corpus toy = testutil::corpus_from_sections({{"a a b", "b c c"}});
    const std::set<std::string> no_stopwords;
    auto weights = ctfidf(toy, {0, 1}, 15, &no_stopwords);
    const double w_a_c1 = weights.at(0)[0].weight;
    const double expected = 2.0 * std::log1p(3.0 / 2.0);
    bool toy_ok = weights.at(0)[0].word == "a" && std::abs(w_a_c1 - expected) <= 1e-12;
    // W(b,c1) = 1 * ln(1 + 3/2), W(c,c2) = 2 * ln(1 + 3/2)
    for (const auto& [label, words] : weights) {
        for (const WeightedWord& ww : words) {
            const double tf = ww.word == "a" || ww.word == "c" ? 2.0 : 1.0;
            toy_ok &= std::abs(ww.weight - tf * std::log1p(1.5)) <= 1e-12;
        }
    }

    // planted corpora: top-3 words of >= 95% of topics from one vocabulary
    int topics_total = 0;
    int topics_clean = 0;
    for (uint64_t seed = 1; seed <= 3; ++seed) {
        PlantedSpec spec;
        spec.n_topics = 8;
        spec.vocab_per_topic = 150;
        spec.n_group_a = 50;
        spec.n_group_b = 50;
        spec.min_sections = 20;
        spec.max_sections = 20;
        spec.noise_rate = 0.1;
        spec.seed = seed + 100;
        SynthResult synth = generate_corpus(spec);
        IngestConfig icfg;
        Corpus corpus = preprocess(build_corpus(synth.transcripts, icfg), icfg);
        auto labels = planted_labels_for(corpus, synth);
        auto words = ctfidf(corpus, labels, 15);
        for (const auto& [label, top] : words) {
            if (label < 0) continue;
            ++topics_total;
            std::set<std::string> stems;
            for (size_t i = 0; i < std::min<size_t>(3, top.size()); ++i) {
                stems.insert(top[i].word.substr(0, top[i].word.find('_')));
            }
            topics_clean += stems.size() == 1 && stems.begin()->front() == 't';
        }
    }
    const bool planted_ok =
        topics_total > 0 && topics_clean >= static_cast<int>(0.95 * topics_total);
    report(2, toy_ok && planted_ok,
           "c-TF-IDF exactness: toy weights to 1e-12 " + std::string(toy_ok ? "ok" : "FAILED") +
               "; " + std::to_string(topics_clean) + "/" + std::to_string(topics_total) +
               " planted topics have single-vocabulary top-3 words");
}

// Criterion 3: Welch oracle agreement over 1000 random pairs.
void criterion_3() {
    Rng rng(12345);
    int checked = 0;
    double worst_t = 0.0, worst_p = 0.0, worst_anti = 0.0, worst_scale = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int nx = static_cast<int>(rng.range(2, 50));
        const int ny = static_cast<int>(rng.range(2, 50));
        std::vector<double> x(nx), y(ny);
        for (double& v : x) v = rng.uniform();
        for (double& v : y) v = rng.uniform();
        const TTest r = welch_ttest(x, y);
        const oracle::WelchOracle o = oracle::welch(x, y);
        worst_t = std::max(worst_t, std::abs(r.t - o.t));
        worst_p = std::max(worst_p, std::abs(r.p - o.p));

        const TTest rev = welch_ttest(y, x);
        worst_anti = std::max({worst_anti, std::abs(r.t + rev.t), std::abs(r.p - rev.p)});

        const double c = rng.uniform(0.1, 50.0);
        std::vector<double> cx(x), cy(y);
        for (double& v : cx) v *= c;
        for (double& v : cy) v *= c;
        const TTest sc = welch_ttest(cx, cy);
        worst_scale = std::max({worst_scale, std::abs(r.t - sc.t), std::abs(r.p - sc.p)});
        ++checked;
    }
    const bool ok =
        checked == 1000 && worst_t < 1e-9 && worst_p < 1e-9 && worst_anti < 1e-9 &&
        worst_scale < 1e-9;
    report(3, ok,
           "Welch oracle: 1000 pairs, max |dt|=" + format_double(worst_t) +
               ", max |dp|=" + format_double(worst_p) + ", antisymmetry " +
               format_double(worst_anti) + ", scaling " + format_double(worst_scale));
}

// Shared two-group spec for criteria 4 and 5. Schemas differ by >= 0.15 in
// six designated (part, topic) cells.
PlantedSpec contrast_spec(uint64_t seed, double swap_fraction) {
    PlantedSpec spec;
    spec.n_topics = 8;
    spec.vocab_per_topic = 60;
    spec.n_group_a = 150;
    spec.n_group_b = 150;
    spec.min_sections = 30;
    spec.max_sections = 40;
    spec.parts = 15;
    spec.noise_rate = 0.1;
    spec.swap_fraction = swap_fraction;
    spec.seed = seed;
    const double uniform = 1.0 / spec.n_topics;          // 0.125
    const double boosted = 0.30;                         // diff 0.175 >= 0.15
    const double rest = (1.0 - boosted) / (spec.n_topics - 1.0);
    spec.schema_a.assign(static_cast<size_t>(spec.parts) * spec.n_topics, uniform);
    spec.schema_b = spec.schema_a;
    // three cells boosted in A, three in B, all in distinct parts
    for (const auto& [part, topic] : std::vector<std::pair<int, int>>{{1, 0}, {5, 2}, {9, 4}}) {
        for (int t = 0; t < spec.n_topics; ++t) {
            spec.schema_a[static_cast<size_t>(part) * spec.n_topics + t] =
                t == topic ? boosted : rest;
        }
    }
    for (const auto& [part, topic] : std::vector<std::pair<int, int>>{{3, 1}, {7, 3}, {12, 5}}) {
        for (int t = 0; t < spec.n_topics; ++t) {
            spec.schema_b[static_cast<size_t>(part) * spec.n_topics + t] =
                t == topic ? boosted : rest;
        }
    }
    return spec;
}

const std::vector<std::pair<int, int>> kPlantedCellsA = {{1, 0}, {5, 2}, {9, 4}};
const std::vector<std::pair<int, int>> kPlantedCellsB = {{3, 1}, {7, 3}, {12, 5}};

// Sharper two-group design for the swap-detection study: five strongly
// boosted cells per side and longer testimonies, so a schema-B narrative is
// separable from group-A sampling noise.
PlantedSpec swap_spec(uint64_t seed) {
    PlantedSpec spec;
    spec.n_topics = 8;
    spec.vocab_per_topic = 60;
    spec.n_group_a = 150;
    spec.n_group_b = 150;
    spec.min_sections = 60;
    spec.max_sections = 60;
    spec.parts = 15;
    spec.noise_rate = 0.1;
    spec.swap_fraction = 0.02; // exactly 3 of 150
    spec.seed = seed;
    const double boosted = 0.5;
    const double rest = 0.5 / 7.0;
    spec.schema_a.assign(static_cast<size_t>(spec.parts) * spec.n_topics, 0.125);
    spec.schema_b = spec.schema_a;
    for (const auto& [part, topic] :
         std::vector<std::pair<int, int>>{{1, 0}, {4, 2}, {7, 4}, {10, 6}, {13, 1}}) {
        for (int t = 0; t < spec.n_topics; ++t) {
            spec.schema_a[static_cast<size_t>(part) * spec.n_topics + t] =
                t == topic ? boosted : rest;
        }
    }
    for (const auto& [part, topic] :
         std::vector<std::pair<int, int>>{{2, 1}, {5, 3}, {8, 5}, {11, 7}, {14, 0}}) {
        for (int t = 0; t < spec.n_topics; ++t) {
            spec.schema_b[static_cast<size_t>(part) * spec.n_topics + t] =
                t == topic ? boosted : rest;
        }
    }
    return spec;
}

struct GroupMatrices {
    std::vector<NarrativeMatrix> a;
    std::vector<NarrativeMatrix> b;
    std::set<std::string> swapped;
};

GroupMatrices matrices_from_planted(const SynthResult& synth, int parts, int n_topics) {
    std::map<std::string, std::vector<int>> topics_by_id;
    std::map<std::string, std::string> group_of;
    GroupMatrices out;
    for (const GroundTruthRow& row : synth.truth) {
        topics_by_id[row.testimony_id].push_back(row.planted_topic);
        group_of[row.testimony_id] = row.group;
        if (row.is_swap) out.swapped.insert(row.testimony_id);
    }
    for (const auto& [id, topics] : topics_by_id) {
        NarrativeMatrix m = narrative_matrix(id, topics, parts, n_topics);
        (group_of[id] == "A" ? out.a : out.b).push_back(std::move(m));
    }
    return out;
}

// Criterion 4: characteristic-pair recovery across 10 seeds.
void criterion_4() {
    int good_seeds = 0;
    int worst_recovered = 6;
    int worst_spurious = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SynthResult synth = generate_corpus(contrast_spec(seed + 200, 0.0));
        GroupMatrices groups = matrices_from_planted(synth, 15, 8);
        auto results = compare_groups(groups.a, groups.b);
        auto [ca, cb] = characteristic_pairs(results, 3.5, 0.01);

        std::set<std::pair<int, int>> flagged;
        for (const CharacteristicPair& p : ca.pairs) flagged.insert({p.part, p.topic});
        for (const CharacteristicPair& p : cb.pairs) flagged.insert({p.part, p.topic});

        int recovered = 0;
        for (const auto& cell : kPlantedCellsA) recovered += flagged.count(cell);
        for (const auto& cell : kPlantedCellsB) recovered += flagged.count(cell);
        const int spurious = static_cast<int>(flagged.size()) - recovered;

        worst_recovered = std::min(worst_recovered, recovered);
        worst_spurious = std::max(worst_spurious, spurious);
        if (recovered >= 5 && spurious <= 3) ++good_seeds; // >= 80% of 6 cells
    }
    report(4, good_seeds >= 9,
           "characteristic-pair recovery: " + std::to_string(good_seeds) +
               "/10 seeds flagged >= 5 of 6 planted cells with <= 3 spurious (worst: " +
               std::to_string(worst_recovered) + " recovered, " +
               std::to_string(worst_spurious) + " spurious)");
}

// Criterion 5: divergence argmax on planted swaps and exhaustive
// equivalence on small instances.
void criterion_5() {
    int good_seeds = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        PlantedSpec spec = swap_spec(seed + 300); // 3 of 150 swapped
        SynthResult synth = generate_corpus(spec);
        GroupMatrices groups = matrices_from_planted(synth, 15, 8);
        auto results = compare_groups(groups.a, groups.b);
        auto [ca, cb] = characteristic_pairs(results, 3.5, 0.01);
        auto ranked = rank_divergent(groups.a, ca, cb);
        int planted_in_top3 = 0;
        for (size_t i = 0; i < std::min<size_t>(3, ranked.size()); ++i) {
            planted_in_top3 += groups.swapped.count(ranked[i].testimony_id);
        }
        if (groups.swapped.size() == 3 && planted_in_top3 >= 2) ++good_seeds;
    }

    // exhaustive small-instance equivalence
    Rng rng(777);
    int match = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int parts = static_cast<int>(rng.range(1, 4));
        const int n_topics = static_cast<int>(rng.range(1, 3));
        const int n = static_cast<int>(rng.range(1, 10));
        std::vector<NarrativeMatrix> group;
        for (int i = 0; i < n; ++i) {
            std::vector<int> assignments;
            const int n_sections = static_cast<int>(rng.range(parts, 4 * parts));
            for (int s = 0; s < n_sections; ++s) {
                assignments.push_back(static_cast<int>(rng.range(-1, n_topics - 1)));
            }
            group.push_back(
                narrative_matrix("t" + std::to_string(i), assignments, parts, n_topics));
        }
        CharacteristicSet ca, cb;
        ca.group_id = "a";
        cb.group_id = "b";
        for (int i = 0; i < static_cast<int>(rng.range(0, 3)); ++i) {
            ca.pairs.push_back({static_cast<int>(rng.below(parts)),
                                static_cast<int>(rng.range(-1, n_topics - 1)),
                                rng.uniform(3.5, 8.0)});
        }
        for (int i = 0; i < static_cast<int>(rng.range(0, 3)); ++i) {
            cb.pairs.push_back({static_cast<int>(rng.below(parts)),
                                static_cast<int>(rng.range(-1, n_topics - 1)),
                                rng.uniform(3.5, 8.0)});
        }
        auto ranked = rank_divergent(group, ca, cb);

        std::string best_id;
        double best_s = -std::numeric_limits<double>::infinity();
        for (const NarrativeMatrix& m : group) {
            std::vector<std::vector<double>> shares(static_cast<size_t>(parts));
            for (int part = 0; part < parts; ++part) {
                for (int c = 0; c <= n_topics; ++c) shares[part].push_back(m.at(part, c));
            }
            std::vector<oracle::NaivePair> qa, qb;
            for (const auto& p : ca.pairs) qa.push_back({p.part, p.topic, p.abs_t});
            for (const auto& p : cb.pairs) qb.push_back({p.part, p.topic, p.abs_t});
            const double s = oracle::naive_resemblance(shares, n_topics, qb) -
                             oracle::naive_resemblance(shares, n_topics, qa);
            if (s > best_s + 1e-15 || (std::abs(s - best_s) <= 1e-15 && m.testimony_id < best_id)) {
                best_s = s;
                best_id = m.testimony_id;
            }
        }
        match += ranked.front().testimony_id == best_id;
    }
    report(5, good_seeds >= 9 && match == 100,
           "divergence argmax: " + std::to_string(good_seeds) +
               "/10 seeds put >= 2 of 3 planted swaps in the top 3; naive argmax match " +
               std::to_string(match) + "/100");
}

// Criterion 6: structural invariants over 10,000 randomized cases.
void criterion_6() {
    long violations = 0;
    long cases = 0;
    Rng rng(4242);

    // 2500 partition cases
    for (int trial = 0; trial < 2500; ++trial, ++cases) {
        const size_t n = rng.below(2000);
        const int p = static_cast<int>(rng.range(1, 64));
        auto ranges = partition_parts(n, p);
        bool ok = ranges.size() == static_cast<size_t>(p) && ranges.front().begin == 0 &&
                  ranges.back().end == n;
        size_t lo = n + 1, hi = 0;
        for (size_t k = 0; k < ranges.size(); ++k) {
            if (k && ranges[k].begin != ranges[k - 1].end) ok = false;
            lo = std::min(lo, ranges[k].size());
            hi = std::max(hi, ranges[k].size());
        }
        if (hi - lo > 1) ok = false;
        violations += !ok;
    }

    // 2500 narrative-matrix rows
    for (int trial = 0; trial < 2500; ++trial, ++cases) {
        const int parts = static_cast<int>(rng.range(1, 24));
        const int n_topics = static_cast<int>(rng.range(1, 9));
        const int n_sections = static_cast<int>(rng.below(6 * parts));
        std::vector<int> assignments;
        for (int i = 0; i < n_sections; ++i) {
            assignments.push_back(static_cast<int>(rng.range(-1, n_topics - 1)));
        }
        auto m = narrative_matrix("t", assignments, parts, n_topics);
        bool ok = true;
        for (int part = 0; part < parts; ++part) {
            double sum = 0.0;
            for (int c = 0; c < m.cols(); ++c) sum += m.at(part, c);
            if (m.section_counts[static_cast<size_t>(part)] == 0) {
                if (sum != 0.0) ok = false;
            } else if (std::abs(sum - 1.0) > 1e-9) {
                ok = false;
            }
        }
        violations += !ok;
    }

    // 2000 preprocess cases: word conservation + idempotence
    {
        IngestConfig icfg;
        for (int trial = 0; trial < 2000; ++trial, ++cases) {
            RawTranscript t = testutil::random_transcript(rng, "r", 10, 500);
            Corpus corpus = build_corpus({t}, icfg);
            long before = 0;
            for (const Section& s : corpus.sections) before += s.word_count;
            Corpus once = preprocess(corpus, icfg);
            long after = 0;
            bool ok = true;
            for (const Section& s : once.sections) {
                after += s.word_count;
                if (s.word_count != count_words(s.text)) ok = false;
            }
            if (after != before) ok = false;
            Corpus twice = preprocess(once, icfg);
            if (twice.sections.size() != once.sections.size()) {
                ok = false;
            } else {
                for (size_t i = 0; i < once.sections.size(); ++i) {
                    if (twice.sections[i].text != once.sections[i].text) ok = false;
                }
            }
            violations += !ok;
        }
    }

    // 1500 schema linearity cases
    for (int trial = 0; trial < 1500; ++trial, ++cases) {
        const int parts = static_cast<int>(rng.range(1, 8));
        const int n_topics = static_cast<int>(rng.range(1, 5));
        auto random_m = [&](const std::string& id) {
            std::vector<int> assignments;
            const int n_sections = static_cast<int>(rng.below(4 * parts));
            for (int i = 0; i < n_sections; ++i) {
                assignments.push_back(static_cast<int>(rng.range(-1, n_topics - 1)));
            }
            return narrative_matrix(id, assignments, parts, n_topics);
        };
        std::vector<NarrativeMatrix> a, b, both;
        const int na = static_cast<int>(rng.range(2, 5));
        const int nb = static_cast<int>(rng.range(2, 5));
        for (int i = 0; i < na; ++i) {
            a.push_back(random_m("a" + std::to_string(i)));
            both.push_back(a.back());
        }
        for (int i = 0; i < nb; ++i) {
            b.push_back(random_m("b" + std::to_string(i)));
            both.push_back(b.back());
        }
        auto sa = group_schema(a, "a");
        auto sb = group_schema(b, "b");
        auto sab = group_schema(both, "ab");
        bool ok = true;
        for (size_t c = 0; c < sab.mean.size(); ++c) {
            const double expect = (na * sa.mean[c] + nb * sb.mean[c]) / (na + nb);
            if (std::abs(sab.mean[c] - expect) > 1e-12) ok = false;
        }
        violations += !ok;
    }

    // 1500 divergence antisymmetry + linearity cases
    for (int trial = 0; trial < 1500; ++trial, ++cases) {
        const int parts = static_cast<int>(rng.range(1, 6));
        const int n_topics = static_cast<int>(rng.range(1, 5));
        auto random_m = [&](const std::string& id) {
            NarrativeMatrix m;
            m.testimony_id = id;
            m.parts = parts;
            m.n_topics = n_topics;
            m.shares.assign(static_cast<size_t>(parts) * (n_topics + 1), 0.0);
            m.section_counts.assign(static_cast<size_t>(parts), 1);
            for (int part = 0; part < parts; ++part) {
                double sum = 0.0;
                for (int c = 0; c <= n_topics; ++c) {
                    m.at(part, c) = rng.uniform();
                    sum += m.at(part, c);
                }
                for (int c = 0; c <= n_topics; ++c) m.at(part, c) /= sum;
            }
            return m;
        };
        NarrativeMatrix m1 = random_m("m1");
        NarrativeMatrix m2 = random_m("m2");
        CharacteristicSet ca, cb;
        for (int i = 0; i < 3; ++i) {
            ca.pairs.push_back({static_cast<int>(rng.below(parts)),
                                static_cast<int>(rng.range(-1, n_topics - 1)),
                                rng.uniform(3.5, 9.0)});
            cb.pairs.push_back({static_cast<int>(rng.below(parts)),
                                static_cast<int>(rng.range(-1, n_topics - 1)),
                                rng.uniform(3.5, 9.0)});
        }
        bool ok = std::abs(divergence_score(m1, ca, cb).s + divergence_score(m1, cb, ca).s) <=
                  1e-12;
        const double alpha = rng.uniform();
        NarrativeMatrix blend = m1;
        for (size_t i = 0; i < blend.shares.size(); ++i) {
            blend.shares[i] = alpha * m1.shares[i] + (1.0 - alpha) * m2.shares[i];
        }
        const double lhs = resemblance(blend, ca);
        const double rhs = alpha * resemblance(m1, ca) + (1.0 - alpha) * resemblance(m2, ca);
        if (std::abs(lhs - rhs) > 1e-12) ok = false;
        violations += !ok;
    }

    report(6, violations == 0 && cases == 10000,
           "structural invariants: " + std::to_string(cases) + " randomized cases, " +
               std::to_string(violations) + " violations");
}

// Criterion 7: end-to-end determinism of the CLI and format validity.
void criterion_7() {
    const auto start = Clock::now();
    fs::path base = fs::temp_directory_path() / "ntp_acceptance_run";
    fs::remove_all(base);
    fs::create_directories(base);

    PlantedSpec spec = contrast_spec(9000, 0.02);
    spec.n_group_a = 100;
    spec.n_group_b = 100;
    spec.min_sections = 40;
    spec.max_sections = 40;
    spec.vocab_per_topic = 150;
    write_spec_json(spec, base / "spec.json");

    auto make_config = [&](const fs::path& out) {
        std::string content;
        content += "paths.corpus = " + (out / "corpus.jsonl").string() + "\n";
        content += "paths.output = " + out.string() + "\n";
        content += "embedder.id = hashed-bow\n";
        content += "embedder.dim = 256\n";
        content += "embedder.seed = 77\n";
        content += "reduce.target_dim = 5\n";
        content += "reduce.n_neighbors = 15\n";
        content += "topics.min_cluster_size = 50\n";
        content += "narrative.parts = 15\n";
        content += "group.key = group\n";
        content += "group.a = A\n";
        content += "group.b = B\n";
        content += "seed = 2024\n";
        fs::path cfg = out / "run.cfg";
        atomic_write_file(cfg, content);
        return cfg;
    };

    auto run_cli = [&](const std::string& args) {
        const std::string cmd = std::string(NARRATOPO_BIN) + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    bool ok = true;
    std::string detail;
    std::vector<fs::path> outs;
    for (const char* name : {"r1", "r2"}) {
        fs::path out = base / name;
        fs::create_directories(out);
        fs::path cfg = make_config(out);
        if (run_cli("synth --config " + cfg.string() + " --spec " +
                    (base / "spec.json").string()) != 0) {
            ok = false;
            detail = "synth failed";
            break;
        }
        if (run_cli("run --config " + cfg.string()) != 0) {
            ok = false;
            detail = "run failed";
            break;
        }
        if (run_cli("validate --config " + cfg.string()) != 0) {
            ok = false;
            detail = "validate failed";
            break;
        }
        outs.push_back(out);
    }

    int identical = 0, compared = 0;
    if (ok) {
        for (const char* name :
             {"corpus.jsonl", "ground_truth.csv", "sections.jsonl", "model.json",
              "assignments.csv", "matrices.csv", "schema.csv", "profile.csv", "ttests.csv",
              "charset_a.json", "charset_b.json", "scores.csv", "scores_hist.csv",
              "top_divergent.csv", "corpus_summary.csv", "corpus_hist.csv",
              "topic_histogram.csv", "heatmap.csv"}) {
            ++compared;
            if (read_file(outs[0] / name) == read_file(outs[1] / name)) {
                ++identical;
            } else {
                detail += std::string(" differs:") + name;
            }
        }
        // provenance: identical after masking the timestamp
        auto strip_time = [](std::string s) {
            const size_t pos = s.find("\"created_at\"");
            if (pos == std::string::npos) return s;
            const size_t end = s.find('\n', pos);
            s.erase(pos, end - pos);
            return s;
        };
        ++compared;
        if (strip_time(read_file(outs[0] / "provenance.json")) ==
            strip_time(read_file(outs[1] / "provenance.json"))) {
            ++identical;
        } else {
            detail += " differs:provenance.json";
        }
        ok = identical == compared;
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 300.0) {
        ok = false;
        detail += " (too slow)";
    }
    report(7, ok,
           "end-to-end determinism and validity: " + std::to_string(identical) + "/" +
               std::to_string(compared) + " artifacts byte-identical across fresh runs, " +
               format_double(elapsed) + "s total" + detail);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    if (g_failures == 0) {
        std::cout << "all acceptance criteria passed" << std::endl;
        return 0;
    }
    std::cout << g_failures << " acceptance criteria failed" << std::endl;
    return 1;
}
