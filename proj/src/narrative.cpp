#include "narratopo/narrative.hpp"

#include <algorithm>

#include "narratopo/errors.hpp"

namespace ntp {

std::vector<PartRange> partition_parts(size_t n_sections, int parts) {
    if (parts < 1) throw UserError("parts must be >= 1, got " + std::to_string(parts));
    std::vector<PartRange> ranges;
    ranges.reserve(static_cast<size_t>(parts));
    const size_t p = static_cast<size_t>(parts);
    for (size_t k = 0; k < p; ++k) {
        ranges.push_back({k * n_sections / p, (k + 1) * n_sections / p});
    }
    return ranges;
}

NarrativeMatrix narrative_matrix(const std::string& testimony_id,
                                 std::span<const int> topic_assignments, int parts, int n_topics) {
    NarrativeMatrix m;
    m.testimony_id = testimony_id;
    m.parts = parts;
    m.n_topics = n_topics;
    m.shares.assign(static_cast<size_t>(parts) * m.cols(), 0.0);
    m.section_counts.assign(static_cast<size_t>(parts), 0);

    const auto ranges = partition_parts(topic_assignments.size(), parts);
    for (int k = 0; k < parts; ++k) {
        const PartRange& r = ranges[static_cast<size_t>(k)];
        m.section_counts[static_cast<size_t>(k)] = static_cast<int>(r.size());
        if (r.size() == 0) continue;
        for (size_t i = r.begin; i < r.end; ++i) {
            int topic = topic_assignments[i];
            if (topic < -1 || topic >= n_topics) {
                throw InternalError("topic id " + std::to_string(topic) + " outside [-1, " +
                                    std::to_string(n_topics) + ") for " + testimony_id);
            }
            m.at(k, topic < 0 ? n_topics : topic) += 1.0;
        }
        const double inv = 1.0 / static_cast<double>(r.size());
        for (int c = 0; c < m.cols(); ++c) m.at(k, c) *= inv;
    }
    return m;
}

GroupSchema group_schema(const std::vector<NarrativeMatrix>& matrices,
                         const std::string& group_id) {
    if (matrices.size() < 2) {
        throw UserError("group '" + group_id + "' needs >= 2 members, got " +
                        std::to_string(matrices.size()));
    }
    const int parts = matrices.front().parts;
    const int n_topics = matrices.front().n_topics;
    for (const NarrativeMatrix& m : matrices) {
        if (m.parts != parts || m.n_topics != n_topics) {
            throw UserError("mixed matrix shapes in group '" + group_id + "': " +
                            m.testimony_id + " is " + std::to_string(m.parts) + "x" +
                            std::to_string(m.n_topics + 1) + ", expected " +
                            std::to_string(parts) + "x" + std::to_string(n_topics + 1));
        }
    }

    GroupSchema schema;
    schema.group_id = group_id;
    schema.parts = parts;
    schema.n_topics = n_topics;
    const size_t cells = static_cast<size_t>(parts) * schema.cols();
    schema.mean.assign(cells, 0.0);
    schema.dispersion.assign(static_cast<size_t>(parts), 0.0);
    schema.zero_row_counts.assign(static_cast<size_t>(parts), 0);

    const double inv_n = 1.0 / static_cast<double>(matrices.size());
    for (const NarrativeMatrix& m : matrices) {
        schema.member_ids.push_back(m.testimony_id);
        for (size_t c = 0; c < cells; ++c) schema.mean[c] += m.shares[c];
        for (int k = 0; k < parts; ++k) {
            if (m.section_counts[static_cast<size_t>(k)] == 0) {
                ++schema.zero_row_counts[static_cast<size_t>(k)];
            }
        }
    }
    for (double& v : schema.mean) v *= inv_n;

    // cross-member sample variance, averaged over columns
    const double denom = static_cast<double>(matrices.size()) - 1.0;
    for (int k = 0; k < parts; ++k) {
        double acc = 0.0;
        for (int c = 0; c < schema.cols(); ++c) {
            const double mu = schema.at(k, c);
            double ss = 0.0;
            for (const NarrativeMatrix& m : matrices) {
                const double d = m.at(k, c) - mu;
                ss += d * d;
            }
            acc += ss / denom;
        }
        schema.dispersion[static_cast<size_t>(k)] = acc / schema.cols();
    }
    return schema;
}

PartProfile part_profile(const GroupSchema& schema, int n_top) {
    PartProfile profile;
    profile.diversity.assign(static_cast<size_t>(schema.parts), 0.0);
    profile.dispersion = schema.dispersion;

    for (int k = 0; k < schema.parts; ++k) {
        std::vector<std::pair<int, double>> cells; // (topic_id, share)
        cells.reserve(static_cast<size_t>(schema.cols()));
        double sum_sq = 0.0;
        for (int c = 0; c < schema.cols(); ++c) {
            const double share = schema.at(k, c);
            sum_sq += share * share;
            cells.emplace_back(c == schema.n_topics ? -1 : c, share);
        }
        profile.diversity[static_cast<size_t>(k)] = 1.0 - sum_sq;
        std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        const int take = std::min<int>(n_top, static_cast<int>(cells.size()));
        for (int r = 0; r < take; ++r) {
            profile.entries.push_back({k, r + 1, cells[static_cast<size_t>(r)].first,
                                       cells[static_cast<size_t>(r)].second});
        }
    }
    return profile;
}

} // namespace ntp
