#pragma once

#include "nmp/network.hpp"
#include "nmp/rng.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace nmp {

enum class SamplerKind { Bfs, NewmanZiff, Exact };

std::string_view to_string(SamplerKind kind);
// Accepts "bfs", "nz" and "exact"; throws ConfigError otherwise.
SamplerKind parse_sampler(std::string_view name);

inline constexpr int kMaxExactEdges = 20;

struct ReachedNode {
    NodeId node;
    int dist; // hops over active edges; -1 if distances were not computed
};

// One bond-percolation outcome on an edge subset, seen from the focal node.
struct PercolationSample {
    std::vector<bool> active;         // parallel to SampleSet::edges
    std::vector<ReachedNode> reached; // focal first, then nondecreasing dist
    double weight = 0.0;

    bool reaches(NodeId k) const;
    std::optional<int> distance(NodeId k) const;
    NodeSet reachable() const;
};

struct SampleSet {
    NodeId focal = 0;
    std::optional<NodeId> excluded_owner; // set for conditional neighborhoods
    SamplerKind sampler = SamplerKind::Bfs;
    bool has_distances = true;
    std::vector<EdgeId> edges;
    NodeSet nodes; // focal plus endpoints of `edges`
    std::vector<PercolationSample> samples;

    double total_weight() const;
};

// On-the-fly percolation: breadth-first exploration from the focal node in
// which each edge is decided once, the first time one of its endpoints is
// expanded. Every sample has weight 1/M.
SampleSet sample_bfs(const Network& net, std::span<const EdgeId> edges, NodeId focal, int samples,
                     StreamRng& rng);

// Newman-Ziff sweeps: edges are added in a uniformly random order and the
// focal cluster is tracked with union-find. Each sweep yields the E+1 nested
// outcomes with weight w_e / M, w_e = C(E,e) p^e (1-p)^(E-e). Edges with
// p = 0 are dropped first; the remaining edges must share one p, otherwise
// UnsupportedError. Zero-weight outcomes (p = 1) are not recorded.
SampleSet sample_newman_ziff(const Network& net, std::span<const EdgeId> edges, NodeId focal,
                             int sweeps, StreamRng& rng, bool with_distances = true);

// All 2^E configurations with their exact probabilities; configurations of
// probability zero are omitted. Throws ConfigError above `max_edges`.
SampleSet enumerate_exact(const Network& net, std::span<const EdgeId> edges, NodeId focal,
                          int max_edges = kMaxExactEdges);

// Weighted mass of samples in which k is reachable from the focal node.
double estimate_reachability(const SampleSet& set, NodeId k);

// w_e for e = 0..E.
std::vector<double> binomial_weights(int edges, double p);

} // namespace nmp
