#pragma once

#include <span>
#include <string>
#include <vector>

namespace ntp {

struct PartRange {
    size_t begin = 0;
    size_t end = 0;

    size_t size() const { return end - begin; }
};

// Near-equal contiguous ranges covering [0, n_sections):
// range k = [floor(k*N/P), floor((k+1)*N/P)). Sizes differ by at most one;
// N < P yields empty ranges.
std::vector<PartRange> partition_parts(size_t n_sections, int parts = 15);

// A testimony as per-part topic distributions. Columns 0..K-1 are topics,
// column K is the outlier topic (-1). Rows are empirical distributions (sum
// 1) or exactly zero for empty parts.
struct NarrativeMatrix {
    std::string testimony_id;
    int parts = 0;
    int n_topics = 0; // K; matrix width is K+1
    std::vector<double> shares;
    std::vector<int> section_counts;

    int cols() const { return n_topics + 1; }
    double& at(int part, int col) { return shares[static_cast<size_t>(part) * cols() + col]; }
    double at(int part, int col) const {
        return shares[static_cast<size_t>(part) * cols() + col];
    }
    // topic_id -1 addresses the outlier column.
    double share(int part, int topic_id) const {
        return at(part, topic_id < 0 ? n_topics : topic_id);
    }
};

NarrativeMatrix narrative_matrix(const std::string& testimony_id,
                                 std::span<const int> topic_assignments, int parts, int n_topics);

// Elementwise mean narrative matrix of a group (>= 2 members, shared
// shape). Empty parts enter the mean as zero rows. dispersion[k] is the
// mean over columns of the cross-member sample variance of shares.
struct GroupSchema {
    std::string group_id;
    int parts = 0;
    int n_topics = 0;
    std::vector<double> mean;
    std::vector<double> dispersion;
    std::vector<int> zero_row_counts;
    std::vector<std::string> member_ids;

    int cols() const { return n_topics + 1; }
    double at(int part, int col) const { return mean[static_cast<size_t>(part) * cols() + col]; }
    int member_count() const { return static_cast<int>(member_ids.size()); }
};

GroupSchema group_schema(const std::vector<NarrativeMatrix>& matrices, const std::string& group_id);

// Per part: the n_top largest mean shares (ties toward the lower topic id,
// with -1 lowest) plus diversity = 1 - sum(p^2) of the mean row and the
// schema's cross-member dispersion.
struct PartProfileEntry {
    int part = 0;
    int rank = 0;     // 1-based
    int topic_id = 0; // -1 for the outlier column
    double share = 0.0;
};

struct PartProfile {
    std::vector<PartProfileEntry> entries;
    std::vector<double> diversity;  // per part
    std::vector<double> dispersion; // per part
};

PartProfile part_profile(const GroupSchema& schema, int n_top = 5);

} // namespace ntp
