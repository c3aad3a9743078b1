#include "narratopo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "narratopo/errors.hpp"

namespace ntp {
namespace {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a,b) by the modified Lentz algorithm.
double beta_continued_fraction(double x, double a, double b) {
    constexpr double kTiny = 1e-300;
    constexpr double kTol = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kTol) break;
    }
    return h;
}

double sample_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x, double mean) {
    double ss = 0.0;
    for (double v : x) {
        const double d = v - mean;
        ss += d * d;
    }
    return ss / (static_cast<double>(x.size()) - 1.0);
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InternalError("regularized_incomplete_beta: parameters must be positive");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw InternalError("t distribution needs df > 0");
    if (std::isinf(t)) return 0.0;
    const double x = df / (t * t + df);
    return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

TTest welch_ttest(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) {
        throw UserError("welch_ttest needs >= 2 values per sample, got " +
                        std::to_string(x.size()) + " and " + std::to_string(y.size()));
    }
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double mx = sample_mean(x);
    const double my = sample_mean(y);
    const double vx = sample_variance(x, mx);
    const double vy = sample_variance(y, my);

    TTest result;
    const double se2 = vx / nx + vy / ny;
    if (se2 == 0.0) {
        if (mx == my) {
            result.t = 0.0;
            result.p = 1.0;
            result.df = nx + ny - 2.0;
            return result;
        }
        result.t = mx > my ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
        result.p = 0.0;
        result.df = nx + ny - 2.0;
        result.degenerate = true;
        return result;
    }
    result.t = (mx - my) / std::sqrt(se2);
    result.df = se2 * se2 /
                ((vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0));
    result.p = student_t_two_sided_p(result.t, result.df);
    return result;
}

std::vector<TTestResult> compare_groups(const std::vector<NarrativeMatrix>& group_a,
                                        const std::vector<NarrativeMatrix>& group_b,
                                        bool include_outlier) {
    if (group_a.size() < 2 || group_b.size() < 2) {
        throw UserError("compare_groups needs >= 2 testimonies per group, got " +
                        std::to_string(group_a.size()) + " and " + std::to_string(group_b.size()));
    }
    const int parts = group_a.front().parts;
    const int n_topics = group_a.front().n_topics;
    for (const auto* group : {&group_a, &group_b}) {
        for (const NarrativeMatrix& m : *group) {
            if (m.parts != parts || m.n_topics != n_topics) {
                throw UserError("matrix shape mismatch at testimony " + m.testimony_id);
            }
        }
    }

    const int cols = include_outlier ? n_topics + 1 : n_topics;
    std::vector<TTestResult> results;
    results.reserve(static_cast<size_t>(parts) * cols);
    std::vector<double> xs(group_a.size());
    std::vector<double> ys(group_b.size());
    for (int part = 0; part < parts; ++part) {
        for (int c = 0; c < cols; ++c) {
            for (size_t i = 0; i < group_a.size(); ++i) xs[i] = group_a[i].at(part, c);
            for (size_t i = 0; i < group_b.size(); ++i) ys[i] = group_b[i].at(part, c);
            const TTest tt = welch_ttest(xs, ys);
            TTestResult r;
            r.part = part;
            r.topic = c == n_topics ? -1 : c;
            r.t = tt.t;
            r.p = tt.p;
            r.mean_a = sample_mean(xs);
            r.mean_b = sample_mean(ys);
            r.n_a = static_cast<int>(xs.size());
            r.n_b = static_cast<int>(ys.size());
            r.degenerate = tt.degenerate;
            results.push_back(r);
        }
    }
    return results;
}

std::pair<CharacteristicSet, CharacteristicSet> characteristic_pairs(
    const std::vector<TTestResult>& results, double t_threshold, double p_threshold,
    double mean_diff_threshold) {
    CharacteristicSet ca;
    CharacteristicSet cb;
    ca.t_threshold = cb.t_threshold = t_threshold;
    ca.p_threshold = cb.p_threshold = p_threshold;
    for (const TTestResult& r : results) {
        if (!(r.p < p_threshold)) continue;
        if (mean_diff_threshold > 0.0 && std::abs(r.mean_a - r.mean_b) < mean_diff_threshold) {
            continue;
        }
        const double abs_t = std::isinf(r.t) ? kDegenerateAbsT : std::abs(r.t);
        if (r.t > t_threshold) {
            ca.pairs.push_back({r.part, r.topic, abs_t});
            ca.has_degenerate |= r.degenerate;
        } else if (r.t < -t_threshold) {
            cb.pairs.push_back({r.part, r.topic, abs_t});
            cb.has_degenerate |= r.degenerate;
        }
    }
    auto by_cell = [](const CharacteristicPair& x, const CharacteristicPair& y) {
        if (x.part != y.part) return x.part < y.part;
        return x.topic < y.topic;
    };
    std::sort(ca.pairs.begin(), ca.pairs.end(), by_cell);
    std::sort(cb.pairs.begin(), cb.pairs.end(), by_cell);
    return {std::move(ca), std::move(cb)};
}

bool MetadataPredicate::matches(const std::string& value) const {
    if (values.count(value)) return true;
    if (min || max) {
        try {
            size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos == value.size()) {
                if (min && v < *min) return false;
                if (max && v > *max) return false;
                return true;
            }
        } catch (const std::exception&) {
            return false;
        }
    }
    return false;
}

MetadataPredicate parse_predicate(const std::string& spec) {
    MetadataPredicate p;
    if (spec.empty()) throw UserError("empty group predicate");
    const size_t dots = spec.find("..");
    if (dots != std::string::npos) {
        try {
            p.min = std::stod(spec.substr(0, dots));
            p.max = std::stod(spec.substr(dots + 2));
        } catch (const std::exception&) {
            throw UserError("bad range predicate: " + spec);
        }
        if (*p.min > *p.max) throw UserError("empty range predicate: " + spec);
        return p;
    }
    size_t start = 0;
    while (start <= spec.size()) {
        size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        std::string v = spec.substr(start, comma - start);
        if (!v.empty()) p.values.insert(v);
        start = comma + 1;
    }
    if (p.values.empty()) throw UserError("empty group predicate: " + spec);
    return p;
}

GroupSplit split_by_metadata(const Corpus& corpus, const GroupRule& rule) {
    if (rule.key.empty()) throw UserError("group rule has no metadata key");
    GroupSplit split;
    for (const std::string& id : corpus.testimony_order) {
        auto meta_it = corpus.transcripts.find(id);
        std::optional<std::string> value;
        if (meta_it != corpus.transcripts.end()) value = meta_it->second.value(rule.key);
        if (!value) {
            ++split.missing;
            continue;
        }
        const bool in_a = rule.a.matches(*value);
        const bool in_b = rule.b.matches(*value);
        if (in_a && in_b) {
            throw UserError("group predicates overlap on value '" + *value + "' (testimony " +
                            id + ")");
        }
        if (in_a) split.a_ids.push_back(id);
        else if (in_b) split.b_ids.push_back(id);
        else ++split.excluded;
    }
    if (split.missing > 0) {
        std::cerr << "warning: " << split.missing << " testimonies lack metadata key '"
                  << rule.key << "' and were excluded\n";
    }
    if (split.a_ids.empty() || split.b_ids.empty()) {
        throw UserError("group rule on '" + rule.key + "' matched " +
                        std::to_string(split.a_ids.size()) + " vs " +
                        std::to_string(split.b_ids.size()) +
                        " testimonies; both sides must be non-empty");
    }
    return split;
}

} // namespace ntp
