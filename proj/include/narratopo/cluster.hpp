#pragma once

#include <cstddef>
#include <vector>

namespace ntp {

struct ClusterConfig {
    int min_cluster_size = 50;
    int min_samples = 0; // 0 -> min_cluster_size
    bool allow_single_cluster = false;
};

// Density clustering over n points (row-major n x dim): hierarchical
// excess-of-mass extraction on the mutual-reachability minimum spanning
// tree. No preset cluster count; every returned cluster has at least
// min_cluster_size members; noise is labeled -1. Labels are contiguous from
// 0, ordered by descending cluster size.
std::vector<int> cluster_sections(const float* pts, size_t n, int dim, const ClusterConfig& cfg);

} // namespace ntp
