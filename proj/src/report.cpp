#include "narratopo/report.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "narratopo/io.hpp"

namespace ntp {
namespace {

struct TestimonyCounts {
    std::string id;
    long words = 0;
    int sections = 0;
};

std::vector<TestimonyCounts> per_testimony_counts(const Corpus& corpus) {
    std::vector<TestimonyCounts> counts;
    auto ranges = section_ranges(corpus);
    for (const std::string& id : corpus.testimony_order) {
        auto it = ranges.find(id);
        TestimonyCounts c;
        c.id = id;
        if (it != ranges.end()) {
            for (size_t i = it->second.first; i < it->second.second; ++i) {
                c.words += corpus.sections[i].word_count;
            }
            c.sections = static_cast<int>(it->second.second - it->second.first);
        }
        counts.push_back(std::move(c));
    }
    return counts;
}

void histogram_rows(CsvBuilder& csv, const std::string& metric, std::vector<double> values,
                    int bins) {
    if (values.empty()) return;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        csv.add_row({metric, "0", format_double(lo), format_double(hi),
                     std::to_string(values.size())});
        return;
    }
    const double width = (hi - lo) / bins;
    std::vector<long> counts(static_cast<size_t>(bins), 0);
    for (double v : values) {
        int bin = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
        ++counts[static_cast<size_t>(bin)];
    }
    for (int b = 0; b < bins; ++b) {
        csv.add_row({metric, std::to_string(b), format_double(lo + b * width),
                     format_double(lo + (b + 1) * width),
                     std::to_string(counts[static_cast<size_t>(b)])});
    }
}

} // namespace

std::string corpus_summary_csv(const Corpus& corpus, const std::string& config_hash) {
    CsvBuilder csv({"testimony_id", "words", "sections"});
    csv.set_config_hash(config_hash);
    for (const TestimonyCounts& c : per_testimony_counts(corpus)) {
        csv.add_row({c.id, std::to_string(c.words), std::to_string(c.sections)});
    }
    if (csv.row_count() == 0) std::cerr << "warning: empty corpus, summary has no rows\n";
    return csv.str();
}

std::string corpus_histogram_csv(const Corpus& corpus, int bins, const std::string& config_hash) {
    CsvBuilder csv({"metric", "bin", "lo", "hi", "count"});
    csv.set_config_hash(config_hash);
    auto counts = per_testimony_counts(corpus);
    std::vector<double> words, sections;
    words.reserve(counts.size());
    sections.reserve(counts.size());
    for (const TestimonyCounts& c : counts) {
        words.push_back(static_cast<double>(c.words));
        sections.push_back(static_cast<double>(c.sections));
    }
    histogram_rows(csv, "words", std::move(words), bins);
    histogram_rows(csv, "sections", std::move(sections), bins);
    return csv.str();
}

std::string topic_histogram_csv(const TopicModel& model, const std::string& config_hash) {
    CsvBuilder csv({"topic_id", "title", "size", "share"});
    csv.set_config_hash(config_hash);
    const long total = static_cast<long>(model.assignments.size());
    long outlier_count = 0;
    for (int a : model.assignments) outlier_count += a == TopicModel::kOutlierId;

    std::vector<std::tuple<long, int, std::string>> rows; // (size, id, title)
    for (const TopicInfo& t : model.topics) rows.emplace_back(t.size, t.id, t.title);
    if (outlier_count > 0) {
        rows.emplace_back(outlier_count, TopicModel::kOutlierId, model.outlier_title);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::get<1>(x) < std::get<1>(y);
    });
    for (const auto& [size, id, title] : rows) {
        const double share = total > 0 ? static_cast<double>(size) / total : 0.0;
        csv.add_row({std::to_string(id), title, std::to_string(size), format_double(share)});
    }
    return csv.str();
}

std::string contrast_heatmap_csv(const std::vector<TTestResult>& results,
                                 const CharacteristicSet& c_a, const CharacteristicSet& c_b,
                                 const std::string& config_hash) {
    std::set<std::pair<int, int>> significant;
    for (const CharacteristicPair& p : c_a.pairs) significant.insert({p.part, p.topic});
    for (const CharacteristicPair& p : c_b.pairs) significant.insert({p.part, p.topic});

    CsvBuilder csv({"part", "topic_id", "t", "p", "significant"});
    csv.set_config_hash(config_hash);
    for (const TTestResult& r : results) {
        csv.add_row({std::to_string(r.part), std::to_string(r.topic), format_double(r.t),
                     format_double(r.p), significant.count({r.part, r.topic}) ? "1" : "0"});
    }
    return csv.str();
}

} // namespace ntp
