#pragma once

#include <string>
#include <vector>

#include "narratopo/narrative.hpp"
#include "narratopo/stats.hpp"

namespace ntp {

// Weighted share sum over a characteristic set:
// sum over (part, topic, |t|) of matrix.share(part, topic) * |t|.
// Pairwise summation keeps the ranking stable near ties.
double resemblance(const NarrativeMatrix& matrix, const CharacteristicSet& cset);

struct DivergenceScore {
    std::string testimony_id;
    std::string home_group;
    double r_home = 0.0;
    double r_other = 0.0;
    double s = 0.0; // r_other - r_home
    bool degenerate_inputs = false;
};

DivergenceScore divergence_score(const NarrativeMatrix& matrix, const CharacteristicSet& c_home,
                                 const CharacteristicSet& c_other);

// Scores for one group's matrices sorted by s descending, testimony_id
// ascending on ties; the head is the most divergent testimony.
std::vector<DivergenceScore> rank_divergent(const std::vector<NarrativeMatrix>& matrices,
                                            const CharacteristicSet& c_home,
                                            const CharacteristicSet& c_other);

struct ScoreHistogram {
    double lo = 0.0;
    double hi = 0.0;
    double width = 0.0;
    std::vector<long> counts;
};

// Equal-width bins over [min(s), max(s)]; identical scores collapse to a
// single bin.
ScoreHistogram score_histogram(const std::vector<DivergenceScore>& scores, int bins);

} // namespace ntp
