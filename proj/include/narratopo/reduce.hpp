#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ntp {

struct ReduceConfig {
    std::string method = "umap"; // "umap" | "pca"
    int target_dim = 5;
    int n_neighbors = 15;
    int epochs = 0; // 0 -> 500 up to 4096 points, 200 above
    uint64_t seed = 1;
};

// n x d row-major in, n x target_dim row-major out.
// Deterministic for fixed data, config and seed.
// Requires n > n_neighbors and target_dim < d.
std::vector<float> reduce_dimensions(const float* data, size_t n, int d, const ReduceConfig& cfg);

// Exact k-nearest-neighbors, Euclidean, self excluded; ties broken by index.
// indices/distances are n x k row-major, each row sorted by distance.
void knn_exact(const float* data, size_t n, int d, int k, std::vector<int>& indices,
               std::vector<float>& distances);

// Principal-component projection (mean-centered), top target_dim components
// by subspace iteration. Deterministic for a fixed seed.
std::vector<float> pca_project(const float* data, size_t n, int d, int target_dim, uint64_t seed);

} // namespace ntp
