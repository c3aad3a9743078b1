#include "narratopo/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include "narratopo/errors.hpp"
#include "narratopo/reduce.hpp"

namespace ntp {
namespace {

double sq_dist_d(const float* a, const float* b, int d) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
        double diff = static_cast<double>(a[j]) - b[j];
        acc += diff * diff;
    }
    return acc;
}

struct MstEdge {
    int a = 0;
    int b = 0;
    double dist = 0.0;
};

// Prim's algorithm on the implicit mutual-reachability graph:
// mreach(a, b) = max(core_a, core_b, d(a, b)).
std::vector<MstEdge> mutual_reachability_mst(const float* pts, size_t n, int dim,
                                             const std::vector<double>& core) {
    std::vector<MstEdge> mst;
    mst.reserve(n - 1);
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> from(n, 0);
    int last = 0;
    in_tree[0] = 1;
    for (size_t step = 1; step < n; ++step) {
        const float* pl = pts + static_cast<size_t>(last) * dim;
        int next = -1;
        double next_dist = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            double d = std::sqrt(sq_dist_d(pl, pts + j * static_cast<size_t>(dim), dim));
            double mr = std::max({core[last], core[j], d});
            if (mr < best[j]) {
                best[j] = mr;
                from[j] = last;
            }
            if (best[j] < next_dist) {
                next_dist = best[j];
                next = static_cast<int>(j);
            }
        }
        mst.push_back({from[next], next, best[next]});
        in_tree[next] = 1;
        last = next;
    }
    return mst;
}

struct CondensedRow {
    int parent = 0; // condensed cluster id
    int child = 0;  // point id (< n) or condensed cluster id (>= n)
    double lambda = 0.0;
    int size = 1;
};

} // namespace

std::vector<int> cluster_sections(const float* pts, size_t n, int dim, const ClusterConfig& cfg) {
    if (cfg.min_cluster_size < 2) {
        throw UserError("min_cluster_size must be >= 2, got " +
                        std::to_string(cfg.min_cluster_size));
    }
    if (n == 0) return {};
    const size_t mcs = static_cast<size_t>(cfg.min_cluster_size);
    if (n < mcs || n < 2) {
        std::cerr << "warning: " << n << " points cannot form a cluster of size >= " << mcs
                  << "; labeling all points as noise\n";
        return std::vector<int>(n, -1);
    }
    const int ms = std::min<int>(cfg.min_samples > 0 ? cfg.min_samples : static_cast<int>(mcs),
                                 static_cast<int>(n) - 1);

    // core distance = distance to the ms-th nearest neighbor
    std::vector<double> core(n);
    {
        std::vector<int> idx;
        std::vector<float> dist;
        knn_exact(pts, n, dim, ms, idx, dist);
        for (size_t i = 0; i < n; ++i) {
            core[i] = dist[i * static_cast<size_t>(ms) + (ms - 1)];
        }
    }

    std::vector<MstEdge> mst = mutual_reachability_mst(pts, n, dim, core);
    std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    // Single-linkage dendrogram: points are 0..n-1, merge node n+step.
    const size_t n_nodes = 2 * n - 1;
    std::vector<int> uf_parent(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) uf_parent[i] = static_cast<int>(i);
    auto find_top = [&](int x) {
        while (uf_parent[x] != x) {
            uf_parent[x] = uf_parent[uf_parent[x]];
            x = uf_parent[x];
        }
        return x;
    };
    std::vector<int> left(n_nodes, -1), right(n_nodes, -1);
    std::vector<int> node_size(n_nodes, 1);
    std::vector<double> node_dist(n_nodes, 0.0);
    for (size_t step = 0; step < mst.size(); ++step) {
        int node = static_cast<int>(n + step);
        int ra = find_top(mst[step].a);
        int rb = find_top(mst[step].b);
        left[node] = ra;
        right[node] = rb;
        node_size[node] = node_size[ra] + node_size[rb];
        node_dist[node] = mst[step].dist;
        uf_parent[ra] = node;
        uf_parent[rb] = node;
    }
    const int root = static_cast<int>(n_nodes) - 1;

    // Condense the dendrogram: splits where both sides reach
    // min_cluster_size survive; smaller sides fall out as points.
    std::vector<CondensedRow> rows;
    rows.reserve(2 * n);
    int next_cluster = static_cast<int>(n); // condensed cluster ids start at n
    const int root_cluster = next_cluster++;
    auto lambda_of = [&](int node) { return 1.0 / std::max(node_dist[node], 1e-12); };

    std::vector<int> collect_stack;
    auto emit_points = [&](int node, int parent, double lambda) {
        collect_stack.push_back(node);
        while (!collect_stack.empty()) {
            int cur = collect_stack.back();
            collect_stack.pop_back();
            if (cur < static_cast<int>(n)) {
                rows.push_back({parent, cur, lambda, 1});
            } else {
                collect_stack.push_back(left[cur]);
                collect_stack.push_back(right[cur]);
            }
        }
    };

    std::vector<std::pair<int, int>> walk; // (dendrogram node, condensed parent)
    walk.emplace_back(root, root_cluster);
    while (!walk.empty()) {
        auto [node, parent] = walk.back();
        walk.pop_back();
        const double lambda = lambda_of(node);
        const int l = left[node];
        const int r = right[node];
        const bool l_big = node_size[l] >= static_cast<int>(mcs);
        const bool r_big = node_size[r] >= static_cast<int>(mcs);
        if (l_big && r_big) {
            int cl = next_cluster++;
            rows.push_back({parent, cl, lambda, node_size[l]});
            int cr = next_cluster++;
            rows.push_back({parent, cr, lambda, node_size[r]});
            walk.emplace_back(l, cl);
            walk.emplace_back(r, cr);
        } else if (!l_big && !r_big) {
            emit_points(l, parent, lambda);
            emit_points(r, parent, lambda);
        } else {
            emit_points(l_big ? r : l, parent, lambda);
            walk.emplace_back(l_big ? l : r, parent);
        }
    }

    // Stability per condensed cluster.
    std::map<int, double> birth;
    std::map<int, int> cluster_parent;
    std::map<int, std::vector<int>> cluster_children;
    birth[root_cluster] = 0.0;
    for (const CondensedRow& row : rows) {
        if (row.child >= static_cast<int>(n)) {
            birth[row.child] = row.lambda;
            cluster_parent[row.child] = row.parent;
            cluster_children[row.parent].push_back(row.child);
        }
    }
    std::map<int, double> stability;
    for (const auto& [c, b] : birth) stability[c] = 0.0;
    for (const CondensedRow& row : rows) {
        stability[row.parent] += (row.lambda - birth[row.parent]) * row.size;
    }

    // Excess-of-mass selection, leaves upward; the root is not a candidate
    // unless allow_single_cluster is set.
    std::vector<int> candidates;
    for (const auto& [c, s] : stability) {
        if (c != root_cluster || cfg.allow_single_cluster) candidates.push_back(c);
    }
    std::sort(candidates.rbegin(), candidates.rend());
    std::map<int, bool> is_cluster;
    for (int c : candidates) is_cluster[c] = true;
    for (int c : candidates) {
        double subtree = 0.0;
        for (int child : cluster_children[c]) subtree += stability[child];
        if (subtree > stability[c] && !cluster_children[c].empty()) {
            is_cluster[c] = false;
            stability[c] = subtree;
        } else {
            // c wins; deselect every descendant cluster
            std::vector<int> stack(cluster_children[c]);
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                is_cluster[cur] = false;
                for (int child : cluster_children[cur]) stack.push_back(child);
            }
        }
    }

    auto selected = [&](int c) {
        auto it = is_cluster.find(c);
        return it != is_cluster.end() && it->second;
    };

    // Point label = nearest selected ancestor of its fall-out cluster.
    std::vector<int> raw_labels(n, -1);
    for (const CondensedRow& row : rows) {
        if (row.child >= static_cast<int>(n)) continue;
        int c = row.parent;
        while (true) {
            if (selected(c)) {
                raw_labels[row.child] = c;
                break;
            }
            auto it = cluster_parent.find(c);
            if (it == cluster_parent.end()) break;
            c = it->second;
        }
    }

    // Contiguous ids by descending size (ties: older cluster id first).
    std::map<int, int> counts;
    for (int l : raw_labels) {
        if (l >= 0) ++counts[l];
    }
    std::vector<std::pair<int, int>> order; // (cluster id, count)
    order.reserve(counts.size());
    for (const auto& [c, cnt] : counts) order.emplace_back(c, cnt);
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    std::map<int, int> relabel;
    for (size_t i = 0; i < order.size(); ++i) relabel[order[i].first] = static_cast<int>(i);

    std::vector<int> labels(n, -1);
    for (size_t i = 0; i < n; ++i) {
        if (raw_labels[i] >= 0) labels[i] = relabel[raw_labels[i]];
    }
    if (order.empty()) {
        std::cerr << "warning: no cluster reached min_cluster_size=" << mcs
                  << "; all points labeled noise\n";
    }
    return labels;
}

} // namespace ntp
