#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "narratopo/narrative.hpp"
#include "narratopo/transcript.hpp"

namespace ntp {

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// relative accuracy ~1e-14.
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided p for a t statistic: I_{v/(t^2+v)}(v/2, 1/2).
double student_t_two_sided_p(double t, double df);

struct TTest {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
    bool degenerate = false; // both samples constant with unequal means
};

// Unequal-variance two-sample t with Welch-Satterthwaite degrees of
// freedom, two-sided p. Positive t means the first sample's mean is higher.
// Both samples constant: equal means -> (0, 1); unequal -> signed infinity,
// p = 0, degenerate flag.
TTest welch_ttest(std::span<const double> x, std::span<const double> y);

struct TTestResult {
    int part = 0;
    int topic = 0; // -1 for the outlier column
    double t = 0.0;
    double p = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    int n_a = 0;
    int n_b = 0;
    bool degenerate = false;
};

// One Welch test per (part, topic) cell; samples are the per-testimony
// shares. Grid is complete: parts x (K+1) results, outlier column last
// (excluded entirely when include_outlier is false).
std::vector<TTestResult> compare_groups(const std::vector<NarrativeMatrix>& group_a,
                                        const std::vector<NarrativeMatrix>& group_b,
                                        bool include_outlier = true);

struct CharacteristicPair {
    int part = 0;
    int topic = 0;
    double abs_t = 0.0;
};

struct CharacteristicSet {
    std::string group_id;
    double t_threshold = 3.5;
    double p_threshold = 0.01;
    std::vector<CharacteristicPair> pairs; // ordered by (part, topic)
    bool has_degenerate = false;
};

// Sentinel |t| recorded for degenerate infinite cells inside a
// characteristic set; keeps resemblance sums finite.
inline constexpr double kDegenerateAbsT = 1e6;

// Cells with t > t_threshold and p < p_threshold are characteristic of the
// first group; t < -t_threshold routes to the second. Optional
// mean_diff_threshold additionally requires |mean_a - mean_b| above it.
std::pair<CharacteristicSet, CharacteristicSet> characteristic_pairs(
    const std::vector<TTestResult>& results, double t_threshold = 3.5, double p_threshold = 0.01,
    double mean_diff_threshold = 0.0);

// Predicate over one metadata value: closed numeric range and/or a value
// set. Numeric bounds apply only when the value parses as a number.
struct MetadataPredicate {
    std::optional<double> min;
    std::optional<double> max;
    std::set<std::string> values;

    bool matches(const std::string& value) const;
};

// "lo..hi" (inclusive), a comma list of values, or a single value.
MetadataPredicate parse_predicate(const std::string& spec);

struct GroupRule {
    std::string key;
    MetadataPredicate a;
    MetadataPredicate b;
    std::string a_id = "A";
    std::string b_id = "B";
};

struct GroupSplit {
    std::vector<std::string> a_ids;
    std::vector<std::string> b_ids;
    int excluded = 0; // matched neither side
    int missing = 0;  // metadata key absent
};

// Disjoint id lists per the rule, in corpus order. Values matching both
// sides are a config error; empty sides are fatal.
GroupSplit split_by_metadata(const Corpus& corpus, const GroupRule& rule);

} // namespace ntp
