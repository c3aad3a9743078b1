#include "narratopo/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "narratopo/errors.hpp"

namespace ntp {
namespace {

double pairwise_sum(std::span<const double> terms) {
    if (terms.size() <= 8) {
        double s = 0.0;
        for (double v : terms) s += v;
        return s;
    }
    const size_t half = terms.size() / 2;
    return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

} // namespace

double resemblance(const NarrativeMatrix& matrix, const CharacteristicSet& cset) {
    std::vector<double> terms;
    terms.reserve(cset.pairs.size());
    for (const CharacteristicPair& pair : cset.pairs) {
        if (pair.part < 0 || pair.part >= matrix.parts || pair.topic < -1 ||
            pair.topic >= matrix.n_topics) {
            throw UserError("characteristic pair (part=" + std::to_string(pair.part) +
                            ", topic=" + std::to_string(pair.topic) +
                            ") outside matrix shape " + std::to_string(matrix.parts) + "x" +
                            std::to_string(matrix.n_topics + 1) + " of " + matrix.testimony_id);
        }
        terms.push_back(matrix.share(pair.part, pair.topic) * pair.abs_t);
    }
    return pairwise_sum(terms);
}

DivergenceScore divergence_score(const NarrativeMatrix& matrix, const CharacteristicSet& c_home,
                                 const CharacteristicSet& c_other) {
    DivergenceScore score;
    score.testimony_id = matrix.testimony_id;
    score.home_group = c_home.group_id;
    score.r_home = resemblance(matrix, c_home);
    score.r_other = resemblance(matrix, c_other);
    score.s = score.r_other - score.r_home;
    score.degenerate_inputs = c_home.has_degenerate || c_other.has_degenerate;
    return score;
}

std::vector<DivergenceScore> rank_divergent(const std::vector<NarrativeMatrix>& matrices,
                                            const CharacteristicSet& c_home,
                                            const CharacteristicSet& c_other) {
    if (matrices.empty()) throw UserError("rank_divergent needs at least one matrix");
    std::vector<DivergenceScore> scores;
    scores.reserve(matrices.size());
    for (const NarrativeMatrix& m : matrices) {
        scores.push_back(divergence_score(m, c_home, c_other));
    }
    std::sort(scores.begin(), scores.end(), [](const DivergenceScore& x, const DivergenceScore& y) {
        if (x.s != y.s) return x.s > y.s;
        return x.testimony_id < y.testimony_id;
    });
    return scores;
}

ScoreHistogram score_histogram(const std::vector<DivergenceScore>& scores, int bins) {
    if (bins < 1) throw UserError("histogram needs bins >= 1");
    ScoreHistogram hist;
    if (scores.empty()) return hist;
    hist.lo = hist.hi = scores.front().s;
    for (const DivergenceScore& s : scores) {
        hist.lo = std::min(hist.lo, s.s);
        hist.hi = std::max(hist.hi, s.s);
    }
    if (hist.lo == hist.hi) {
        hist.width = 0.0;
        hist.counts.assign(1, static_cast<long>(scores.size()));
        return hist;
    }
    hist.counts.assign(static_cast<size_t>(bins), 0);
    hist.width = (hist.hi - hist.lo) / bins;
    for (const DivergenceScore& s : scores) {
        int bin = static_cast<int>((s.s - hist.lo) / hist.width);
        bin = std::clamp(bin, 0, bins - 1);
        ++hist.counts[static_cast<size_t>(bin)];
    }
    return hist;
}

} // namespace ntp
