#include "narratopo/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "narratopo/errors.hpp"
#include "narratopo/io.hpp"
#include "narratopo/narrative.hpp"
#include "narratopo/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ntp {
namespace {

std::string pad(int v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

std::string join_words(std::span<const std::string> words) {
    std::string out;
    for (const std::string& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

} // namespace

std::string planted_token(int topic, int word) {
    return "t" + pad(topic, 2) + "_w" + pad(word, 3);
}

void validate_spec(const PlantedSpec& spec) {
    if (spec.n_topics < 1) throw UserError("spec.n_topics must be >= 1");
    if (spec.vocab_per_topic < 1) throw UserError("spec.vocab_per_topic must be >= 1");
    if (spec.noise_rate > 0.0 && spec.noise_vocab < 1) {
        throw UserError("spec.noise_vocab must be >= 1 when noise_rate > 0");
    }
    if (spec.noise_rate < 0.0 || spec.noise_rate >= 1.0) {
        throw UserError("spec.noise_rate must be in [0, 1)");
    }
    if (spec.swap_fraction < 0.0 || spec.swap_fraction >= 1.0) {
        throw UserError("spec.swap_fraction must be in [0, 1)");
    }
    if (spec.n_group_a < 0 || spec.n_group_b < 0) throw UserError("negative group size");
    if (spec.min_sections < 1 || spec.max_sections < spec.min_sections) {
        throw UserError("bad sections_per_testimony range");
    }
    if (spec.min_section_words < 1 || spec.max_section_words < spec.min_section_words) {
        throw UserError("bad section word range");
    }
    if (spec.parts < 1) throw UserError("spec.parts must be >= 1");
    for (const auto* schema : {&spec.schema_a, &spec.schema_b}) {
        if (schema->empty()) continue;
        if (schema->size() != static_cast<size_t>(spec.parts) * spec.n_topics) {
            throw UserError("schema must be parts x n_topics = " + std::to_string(spec.parts) +
                            " x " + std::to_string(spec.n_topics));
        }
        for (int k = 0; k < spec.parts; ++k) {
            double row = 0.0;
            for (int t = 0; t < spec.n_topics; ++t) {
                const double v = (*schema)[static_cast<size_t>(k) * spec.n_topics + t];
                if (v < 0.0) throw UserError("schema entries must be non-negative");
                row += v;
            }
            if (std::abs(row - 1.0) > 1e-9) {
                throw UserError("schema row " + std::to_string(k) + " sums to " +
                                format_double(row) + ", expected 1");
            }
        }
    }
}

PlantedSpec load_planted_spec(const fs::path& path) {
    json j = json::parse(read_file(path));
    PlantedSpec spec;
    auto get_int = [&](const char* key, int def) { return j.value(key, def); };
    spec.n_topics = get_int("n_topics", spec.n_topics);
    spec.vocab_per_topic = get_int("vocab_per_topic", spec.vocab_per_topic);
    spec.n_group_a = get_int("n_group_a", spec.n_group_a);
    spec.n_group_b = get_int("n_group_b", spec.n_group_b);
    spec.min_sections = get_int("min_sections", spec.min_sections);
    spec.max_sections = get_int("max_sections", spec.max_sections);
    spec.parts = get_int("parts", spec.parts);
    spec.min_section_words = get_int("min_section_words", spec.min_section_words);
    spec.max_section_words = get_int("max_section_words", spec.max_section_words);
    spec.swap_fraction = j.value("swap_fraction", spec.swap_fraction);
    spec.noise_rate = j.value("noise_rate", spec.noise_rate);
    spec.noise_vocab = get_int("noise_vocab", spec.noise_vocab);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("schema_a")) spec.schema_a = j["schema_a"].get<std::vector<double>>();
    if (j.contains("schema_b")) spec.schema_b = j["schema_b"].get<std::vector<double>>();
    validate_spec(spec);
    return spec;
}

SynthResult generate_corpus(const PlantedSpec& spec) {
    validate_spec(spec);
    SynthResult result;
    Rng rng(spec.seed);

    std::vector<double> uniform_row(static_cast<size_t>(spec.n_topics),
                                    1.0 / static_cast<double>(spec.n_topics));
    auto schema_row = [&](const std::vector<double>& schema, int part) -> std::span<const double> {
        if (schema.empty()) return uniform_row;
        return {schema.data() + static_cast<size_t>(part) * spec.n_topics,
                static_cast<size_t>(spec.n_topics)};
    };

    // choose which group-A testimonies are generated from the other schema
    const int n_swaps =
        static_cast<int>(std::llround(spec.swap_fraction * static_cast<double>(spec.n_group_a)));
    std::set<int> swapped;
    while (static_cast<int>(swapped.size()) < n_swaps) {
        swapped.insert(static_cast<int>(rng.below(static_cast<uint64_t>(spec.n_group_a))));
    }

    std::vector<std::string> words;
    for (int g = 0; g < 2; ++g) {
        const bool is_a = g == 0;
        const int count = is_a ? spec.n_group_a : spec.n_group_b;
        for (int i = 0; i < count; ++i) {
            RawTranscript t;
            t.testimony_id = (is_a ? "A" : "B") + pad(i, 4);
            t.metadata.gender = is_a ? Gender::female : Gender::male;
            t.metadata.birth_year = is_a ? 1925 + i % 16 : 1902 + i % 23;
            t.metadata.interview_year = 1996 + i % 20;
            t.metadata.country = "synthetic";
            t.metadata.extras["group"] = is_a ? "A" : "B";

            const bool swap = is_a && swapped.count(i) > 0;
            const std::vector<double>& schema =
                (is_a != swap) ? spec.schema_a : spec.schema_b;

            const int n_sections =
                static_cast<int>(rng.range(spec.min_sections, spec.max_sections));
            const auto ranges = partition_parts(static_cast<size_t>(n_sections), spec.parts);
            std::vector<int> part_of(static_cast<size_t>(n_sections), 0);
            for (int k = 0; k < spec.parts; ++k) {
                for (size_t s = ranges[static_cast<size_t>(k)].begin;
                     s < ranges[static_cast<size_t>(k)].end; ++s) {
                    part_of[s] = k;
                }
            }

            for (int s = 0; s < n_sections; ++s) {
                const int topic =
                    static_cast<int>(rng.categorical(schema_row(schema, part_of[static_cast<size_t>(s)])));
                const int n_words =
                    static_cast<int>(rng.range(spec.min_section_words, spec.max_section_words));
                words.clear();
                for (int w = 0; w < n_words; ++w) {
                    if (spec.noise_rate > 0.0 && rng.uniform() < spec.noise_rate) {
                        words.push_back(
                            "noise_w" + pad(static_cast<int>(rng.below(spec.noise_vocab)), 3));
                    } else {
                        words.push_back(
                            planted_token(topic, static_cast<int>(rng.below(spec.vocab_per_topic))));
                    }
                }
                // one question/answer pair per section keeps ingest boundaries
                const size_t q_words = std::min<size_t>(5, words.size() - 1);
                t.turns.push_back(
                    {Speaker::interviewer, join_words(std::span(words).subspan(0, q_words))});
                t.turns.push_back({Speaker::subject, join_words(std::span(words).subspan(q_words))});
                result.truth.push_back({t.testimony_id, s, topic, is_a ? "A" : "B", swap});
            }
            result.transcripts.push_back(std::move(t));
        }
    }
    return result;
}

std::string synth_to_jsonl(const SynthResult& result) {
    std::string out;
    for (const RawTranscript& t : result.transcripts) {
        json j;
        j["testimony_id"] = t.testimony_id;
        json meta;
        meta["gender"] = to_string(t.metadata.gender);
        if (t.metadata.birth_year) meta["birth_year"] = *t.metadata.birth_year;
        if (t.metadata.interview_year) meta["interview_year"] = *t.metadata.interview_year;
        if (!t.metadata.country.empty()) meta["country"] = t.metadata.country;
        for (const auto& [k, v] : t.metadata.extras) meta[k] = v;
        j["metadata"] = std::move(meta);
        json turns = json::array();
        for (const Turn& turn : t.turns) {
            turns.push_back({turn.speaker == Speaker::interviewer ? "interviewer" : "subject",
                             turn.text});
        }
        j["turns"] = std::move(turns);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string truth_to_csv(const SynthResult& result, const std::string& config_hash) {
    CsvBuilder csv({"testimony_id", "section_index", "planted_topic", "group", "is_swap"});
    csv.set_config_hash(config_hash);
    for (const GroundTruthRow& row : result.truth) {
        csv.add_row({row.testimony_id, std::to_string(row.section_index),
                     std::to_string(row.planted_topic), row.group, row.is_swap ? "1" : "0"});
    }
    return csv.str();
}

double purity(std::span<const int> labels, std::span<const int> planted) {
    if (labels.size() != planted.size()) {
        throw UserError("purity: " + std::to_string(labels.size()) + " labels vs " +
                        std::to_string(planted.size()) + " planted classes");
    }
    if (labels.empty()) return 0.0;
    std::map<int, std::map<int, long>> overlap;
    for (size_t i = 0; i < labels.size(); ++i) {
        ++overlap[labels[i]][planted[i]];
    }
    long agree = 0;
    for (const auto& [cluster, classes] : overlap) {
        long best = 0;
        for (const auto& [cls, count] : classes) best = std::max(best, count);
        agree += best;
    }
    return static_cast<double>(agree) / static_cast<double>(labels.size());
}

} // namespace ntp
