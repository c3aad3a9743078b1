#include "narratopo/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "narratopo/errors.hpp"
#include "narratopo/rng.hpp"

namespace ntp {
namespace {

float sq_dist(const float* a, const float* b, int d) {
    float acc = 0.0f;
    for (int j = 0; j < d; ++j) {
        float diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

struct Edge {
    int a = 0;
    int b = 0;
    float w = 0.0f;
};

// Per-neighbor membership strengths with the locally adaptive kernel:
// rho_i is the nearest nonzero distance, sigma_i is solved so the smoothed
// neighbor weights sum to log2(k).
void smooth_knn_weights(const std::vector<int>& idx, const std::vector<float>& dist, size_t n,
                        int k, std::vector<float>& weights) {
    const double target = std::log2(static_cast<double>(k));
    weights.assign(n * static_cast<size_t>(k), 0.0f);
    for (size_t i = 0; i < n; ++i) {
        const float* di = dist.data() + i * static_cast<size_t>(k);
        double rho = 0.0;
        double mean_dist = 0.0;
        for (int j = 0; j < k; ++j) {
            mean_dist += di[j];
            if (rho == 0.0 && di[j] > 0.0f) rho = di[j];
        }
        mean_dist /= k;

        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
        for (int it = 0; it < 64; ++it) {
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                double dd = di[j] - rho;
                sum += dd > 0.0 ? std::exp(-dd / mid) : 1.0;
            }
            if (std::abs(sum - target) < 1e-5) break;
            if (sum > target) {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
            }
        }
        if (mean_dist > 0.0) mid = std::max(mid, 1e-3 * mean_dist);

        float* wi = weights.data() + i * static_cast<size_t>(k);
        for (int j = 0; j < k; ++j) {
            double dd = di[j] - rho;
            wi[j] = dd > 0.0 ? static_cast<float>(std::exp(-dd / mid)) : 1.0f;
        }
    }
}

// Fuzzy union of the directed neighbor graph: w = w_ab + w_ba - w_ab*w_ba.
// Both directions of every surviving edge are emitted so the SGD treats
// endpoints symmetrically.
std::vector<Edge> symmetrize(const std::vector<int>& idx, const std::vector<float>& weights,
                             size_t n, int k) {
    std::vector<std::pair<uint64_t, float>> directed;
    directed.reserve(n * static_cast<size_t>(k));
    for (size_t i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            uint64_t a = i;
            uint64_t b = static_cast<uint64_t>(idx[i * static_cast<size_t>(k) + j]);
            uint64_t key = a < b ? (a << 32 | b) : (b << 32 | a);
            directed.emplace_back(key, weights[i * static_cast<size_t>(k) + j]);
        }
    }
    std::sort(directed.begin(), directed.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Edge> edges;
    edges.reserve(2 * directed.size());
    for (size_t i = 0; i < directed.size();) {
        uint64_t key = directed[i].first;
        float w1 = directed[i].second;
        float w2 = 0.0f;
        ++i;
        if (i < directed.size() && directed[i].first == key) {
            w2 = directed[i].second;
            ++i;
        }
        float w = w1 + w2 - w1 * w2;
        if (w > 0.0f) {
            const int a = static_cast<int>(key >> 32);
            const int b = static_cast<int>(key & 0xFFFFFFFFu);
            edges.push_back({a, b, w});
            edges.push_back({b, a, w});
        }
    }
    return edges;
}

// Attraction/repulsion SGD over the edge set; the standard low-dimensional
// similarity curve 1/(1 + a*d^(2b)) with the canonical coefficients for
// min_dist=0.1, spread=1.0.
void optimize_layout(std::vector<float>& y, size_t n, int dim, const std::vector<Edge>& edges,
                     int n_epochs, uint64_t seed) {
    constexpr float kA = 1.5769434603113077f;
    constexpr float kB = 0.8950608779109733f;
    constexpr float kGamma = 1.0f;
    constexpr float kInitialAlpha = 1.0f;
    constexpr int kNegativeRate = 5;

    float max_w = 0.0f;
    for (const Edge& e : edges) max_w = std::max(max_w, e.w);
    if (max_w <= 0.0f) return;
    const float drop_below = max_w / static_cast<float>(n_epochs);

    std::vector<Edge> active;
    active.reserve(edges.size());
    for (const Edge& e : edges) {
        if (e.w >= drop_below) active.push_back(e);
    }

    const size_t m = active.size();
    std::vector<double> epochs_per_sample(m), next_sample(m), per_negative(m), next_negative(m);
    for (size_t e = 0; e < m; ++e) {
        epochs_per_sample[e] = static_cast<double>(max_w) / active[e].w;
        next_sample[e] = epochs_per_sample[e];
        per_negative[e] = epochs_per_sample[e] / kNegativeRate;
        next_negative[e] = per_negative[e];
    }

    Rng rng(seed);
    auto clip = [](float v) { return std::clamp(v, -4.0f, 4.0f); };

    for (int epoch = 0; epoch < n_epochs; ++epoch) {
        const float alpha =
            kInitialAlpha * (1.0f - static_cast<float>(epoch) / static_cast<float>(n_epochs));
        for (size_t e = 0; e < m; ++e) {
            if (next_sample[e] > epoch) continue;
            float* cur = y.data() + static_cast<size_t>(active[e].a) * dim;
            float* oth = y.data() + static_cast<size_t>(active[e].b) * dim;
            float d2 = sq_dist(cur, oth, dim);
            if (d2 > 0.0f) {
                float coeff = (-2.0f * kA * kB * std::pow(d2, kB - 1.0f)) /
                              (kA * std::pow(d2, kB) + 1.0f);
                for (int j = 0; j < dim; ++j) {
                    float g = clip(coeff * (cur[j] - oth[j]));
                    cur[j] += g * alpha;
                    oth[j] -= g * alpha;
                }
            }
            next_sample[e] += epochs_per_sample[e];

            int n_neg = static_cast<int>((epoch - next_negative[e]) / per_negative[e]);
            for (int p = 0; p < n_neg; ++p) {
                size_t kk = rng.below(n);
                float* neg = y.data() + kk * dim;
                float nd2 = sq_dist(cur, neg, dim);
                if (nd2 > 0.0f) {
                    float coeff =
                        (2.0f * kGamma * kB) / ((0.001f + nd2) * (kA * std::pow(nd2, kB) + 1.0f));
                    for (int j = 0; j < dim; ++j) {
                        cur[j] += clip(coeff * (cur[j] - neg[j])) * alpha;
                    }
                } else if (static_cast<size_t>(active[e].a) == kk) {
                    continue;
                } else {
                    for (int j = 0; j < dim; ++j) cur[j] += 4.0f * alpha;
                }
            }
            next_negative[e] += n_neg * per_negative[e];
        }
    }
}

} // namespace

void knn_exact(const float* data, size_t n, int d, int k, std::vector<int>& indices,
               std::vector<float>& distances) {
    indices.assign(n * static_cast<size_t>(k), 0);
    distances.assign(n * static_cast<size_t>(k), 0.0f);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t n_threads = std::min<size_t>(hw, n);

    auto worker = [&](size_t begin, size_t end) {
        std::vector<std::pair<float, int>> cand(n - 1);
        for (size_t i = begin; i < end; ++i) {
            const float* xi = data + i * static_cast<size_t>(d);
            size_t w = 0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                cand[w++] = {sq_dist(xi, data + j * static_cast<size_t>(d), d),
                             static_cast<int>(j)};
            }
            std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
            std::sort(cand.begin(), cand.begin() + k);
            for (int j = 0; j < k; ++j) {
                indices[i * static_cast<size_t>(k) + j] = cand[j].second;
                distances[i * static_cast<size_t>(k) + j] = std::sqrt(std::max(0.0f, cand[j].first));
            }
        }
    };

    std::vector<std::thread> threads;
    size_t chunk = (n + n_threads - 1) / n_threads;
    for (size_t t = 0; t < n_threads; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(worker, begin, end);
    }
    for (auto& t : threads) t.join();
}

std::vector<float> pca_project(const float* data, size_t n, int d, int target_dim, uint64_t seed) {
    const size_t dd = static_cast<size_t>(d);
    std::vector<double> mean(dd, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const float* row = data + i * dd;
        for (size_t j = 0; j < dd; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);

    std::vector<double> cov(dd * dd, 0.0);
    {
        std::vector<double> centered(dd);
        for (size_t i = 0; i < n; ++i) {
            const float* row = data + i * dd;
            for (size_t j = 0; j < dd; ++j) centered[j] = row[j] - mean[j];
            for (size_t a = 0; a < dd; ++a) {
                const double ca = centered[a];
                if (ca == 0.0) continue;
                double* crow = cov.data() + a * dd;
                for (size_t b = a; b < dd; ++b) crow[b] += ca * centered[b];
            }
        }
        for (size_t a = 0; a < dd; ++a) {
            for (size_t b = 0; b < a; ++b) cov[a * dd + b] = cov[b * dd + a];
        }
    }

    const int t = target_dim;
    Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<double> v(dd * static_cast<size_t>(t));
    for (double& x : v) x = rng.uniform(-1.0, 1.0);

    std::vector<double> next(dd * static_cast<size_t>(t));
    auto orthonormalize = [&](std::vector<double>& cols) {
        for (int c = 0; c < t; ++c) {
            double* col = cols.data() + static_cast<size_t>(c) * dd;
            for (int p = 0; p < c; ++p) {
                const double* prev = cols.data() + static_cast<size_t>(p) * dd;
                double dot = 0.0;
                for (size_t j = 0; j < dd; ++j) dot += col[j] * prev[j];
                for (size_t j = 0; j < dd; ++j) col[j] -= dot * prev[j];
            }
            double norm = 0.0;
            for (size_t j = 0; j < dd; ++j) norm += col[j] * col[j];
            norm = std::sqrt(norm);
            if (norm < 1e-12) {
                // degenerate direction; reset to a basis vector
                std::fill(col, col + dd, 0.0);
                col[static_cast<size_t>(c) % dd] = 1.0;
            } else {
                for (size_t j = 0; j < dd; ++j) col[j] /= norm;
            }
        }
    };
    orthonormalize(v);
    for (int it = 0; it < 60; ++it) {
        for (int c = 0; c < t; ++c) {
            const double* col = v.data() + static_cast<size_t>(c) * dd;
            double* out = next.data() + static_cast<size_t>(c) * dd;
            for (size_t a = 0; a < dd; ++a) {
                double acc = 0.0;
                const double* crow = cov.data() + a * dd;
                for (size_t j = 0; j < dd; ++j) acc += crow[j] * col[j];
                out[a] = acc;
            }
        }
        std::swap(v, next);
        orthonormalize(v);
    }

    std::vector<float> projected(n * static_cast<size_t>(t));
    for (size_t i = 0; i < n; ++i) {
        const float* row = data + i * dd;
        for (int c = 0; c < t; ++c) {
            const double* col = v.data() + static_cast<size_t>(c) * dd;
            double acc = 0.0;
            for (size_t j = 0; j < dd; ++j) acc += (row[j] - mean[j]) * col[j];
            projected[i * static_cast<size_t>(t) + c] = static_cast<float>(acc);
        }
    }
    return projected;
}

std::vector<float> reduce_dimensions(const float* data, size_t n, int d, const ReduceConfig& cfg) {
    if (cfg.target_dim < 1) throw UserError("reduce.target_dim must be >= 1");
    if (cfg.target_dim >= d) {
        throw UserError("reduce.target_dim " + std::to_string(cfg.target_dim) +
                        " must be below the embedding dim " + std::to_string(d));
    }
    if (cfg.method == "pca") {
        return pca_project(data, n, d, cfg.target_dim, cfg.seed);
    }
    if (cfg.method != "umap") throw UserError("unknown reduce.method: " + cfg.method);

    if (n <= static_cast<size_t>(cfg.n_neighbors)) {
        throw UserError("reduction needs more sections (" + std::to_string(n) +
                        ") than n_neighbors (" + std::to_string(cfg.n_neighbors) + ")");
    }
    const int k = cfg.n_neighbors;
    std::vector<int> idx;
    std::vector<float> dist;
    knn_exact(data, n, d, k, idx, dist);

    std::vector<float> weights;
    smooth_knn_weights(idx, dist, n, k, weights);
    std::vector<Edge> edges = symmetrize(idx, weights, n, k);

    std::vector<float> y = pca_project(data, n, d, cfg.target_dim, cfg.seed);
    float max_abs = 0.0f;
    for (float v : y) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs > 0.0f) {
        const float scale = 10.0f / max_abs;
        for (float& v : y) v *= scale;
    }

    const int epochs = cfg.epochs > 0 ? cfg.epochs : (n <= 4096 ? 500 : 200);
    optimize_layout(y, n, cfg.target_dim, edges, epochs, cfg.seed);
    return y;
}

} // namespace ntp
