#pragma once

// Graph fixtures and independent reference computations shared by the tests.

#include "nmp/network.hpp"
#include "nmp/rng.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace nmp::testing {

inline Network make_graph(int n, std::initializer_list<std::pair<NodeId, NodeId>> pairs, double p) {
    std::vector<Edge> edges;
    for (auto [u, v] : pairs) edges.push_back({u, v, p});
    return Network(n, std::move(edges));
}

inline Network path_graph(int n, double p) {
    std::vector<Edge> edges;
    for (NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, p});
    return Network(n, std::move(edges));
}

inline Network cycle_graph(int n, double p) {
    std::vector<Edge> edges;
    for (NodeId v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n, p});
    return Network(n, std::move(edges));
}

inline Network triangle(double p) { return cycle_graph(3, p); }

inline Network complete_graph(int n, double p) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, p});
    return Network(n, std::move(edges));
}

// Two triangles {0,1,2} and {2,3,4} sharing node 2.
inline Network bowtie(double p) { return make_graph(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}}, p); }

inline Network star_graph(int leaves, double p) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v <= leaves; ++v) edges.push_back({0, v, p});
    return Network(leaves + 1, std::move(edges));
}

// Uniform random recursive tree with per-edge p drawn from [lo, hi].
inline Network random_tree(int n, StreamRng& rng, double lo, double hi) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        const auto parent = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(v)));
        edges.push_back({parent, v, lo + (hi - lo) * rng.uniform()});
    }
    return Network(n, std::move(edges));
}

// G(n, m)-style random graph with a random spanning tree underneath, so it
// is connected and has loops.
inline Network random_loopy_graph(int n, int extra_edges, StreamRng& rng, double lo, double hi) {
    std::vector<Edge> edges;
    std::vector<std::vector<char>> used(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
    auto add = [&](NodeId u, NodeId v) {
        if (u == v || used[u][v]) return false;
        used[u][v] = used[v][u] = 1;
        edges.push_back({u, v, lo + (hi - lo) * rng.uniform()});
        return true;
    };
    for (NodeId v = 1; v < n; ++v) add(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(v))), v);
    for (int added = 0, tries = 0; added < extra_edges && tries < 100 * extra_edges; ++tries)
        if (add(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)))) ++added;
    return Network(n, std::move(edges));
}

inline Network karate(double p) { return load_edge_list_file(std::string(NMP_DATA_DIR) + "/karate.txt", p); }

// Single-seed infection probability on a tree: product of p along the unique
// path, or 0 when the path is longer than t.
inline double tree_path_probability(const Network& tree, NodeId seed, NodeId target, int t) {
    std::vector<int> parent_edge(static_cast<std::size_t>(tree.node_count()), -1);
    std::vector<int> depth(static_cast<std::size_t>(tree.node_count()), -1);
    std::vector<NodeId> order{seed};
    depth[seed] = 0;
    for (std::size_t h = 0; h < order.size(); ++h) {
        for (const auto& inc : tree.neighbors(order[h])) {
            if (depth[inc.neighbor] >= 0) continue;
            depth[inc.neighbor] = depth[order[h]] + 1;
            parent_edge[inc.neighbor] = inc.edge;
            order.push_back(inc.neighbor);
        }
    }
    if (depth[target] < 0 || depth[target] > t) return 0.0;
    double prob = 1.0;
    for (NodeId v = target; v != seed; v = tree.edge(parent_edge[v]).other(v)) prob *= tree.prob(parent_edge[v]);
    return prob;
}

} // namespace nmp::testing
