#pragma once

#include <cstdint>
#include <initializer_list>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nmp {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

// Sorted set of distinct node ids.
class NodeSet {
public:
    NodeSet() = default;
    // Sorts and validates; throws UsageError on duplicates or negative ids.
    explicit NodeSet(std::vector<NodeId> ids);
    NodeSet(std::initializer_list<NodeId> ids) : NodeSet(std::vector<NodeId>(ids)) {}

    bool contains(NodeId v) const;
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    std::span<const NodeId> ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    NodeId operator[](std::size_t i) const { return ids_[i]; }

    // Throws UsageError if any id is outside [0, node_count).
    void check_bounds(int node_count) const;

    // Members joined with ' ' (the CSV "set" column format).
    std::string to_string() const;

    friend bool operator==(const NodeSet&, const NodeSet&) = default;
    friend auto operator<=>(const NodeSet& a, const NodeSet& b) { return a.ids_ <=> b.ids_; }

private:
    std::vector<NodeId> ids_;
};

struct Edge {
    NodeId u;
    NodeId v;
    double p;

    NodeId other(NodeId x) const { return x == u ? v : u; }
};

struct Incidence {
    NodeId neighbor;
    EdgeId edge;
};

// Immutable undirected graph with one transmission probability per edge.
// Node ids are dense in [0, N); ids that never appear in an edge are
// isolated nodes.
class Network {
public:
    Network() = default;
    // Validates: no self-loops, no duplicate edges, p in [0,1], ids < node_count.
    Network(int node_count, std::vector<Edge> edges);

    int node_count() const { return static_cast<int>(adjacency_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
    std::span<const Edge> edges() const { return edges_; }
    double prob(EdgeId e) const { return edges_[static_cast<std::size_t>(e)].p; }
    std::span<const Incidence> neighbors(NodeId v) const {
        return adjacency_[static_cast<std::size_t>(v)];
    }
    int degree(NodeId v) const { return static_cast<int>(neighbors(v).size()); }
    std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;

    // Hash of the node count and edge list, probabilities excluded. Two
    // networks differing only in p share a structure id.
    std::uint64_t structure_id() const { return structure_id_; }

    // True when every edge carries the same probability.
    std::optional<double> uniform_probability() const;

    // Same structure with every p replaced.
    Network with_uniform_probability(double p) const;
    // Same structure with p = 0 on every edge touching a member of `nodes`.
    Network with_isolated(const NodeSet& nodes) const;
    // Same structure with every p multiplied by `factor` (clamped to [0,1]).
    Network with_scaled_probability(double factor) const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::uint64_t structure_id_ = 0;
};

// Reads "u v" or "u v p" lines; '#' starts a comment. Node count is 1 + max id.
Network load_edge_list(std::istream& in, double default_p);
Network load_edge_list_file(const std::string& path, double default_p);

// Per-node core number by iterative minimum-degree peeling.
std::vector<int> coreness(const Network& net);

// Unweighted hop distances from `source`; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Network& net, NodeId source);

// Longest shortest path. Throws DomainError on a disconnected graph.
int diameter(const Network& net);

// Largest finite shortest-path distance (the diameter of the widest component).
int max_finite_distance(const Network& net);

// Maximal connected node sets, ordered by smallest member. With
// `skip_zero_probability`, edges with p = 0 count as absent (a vaccinated
// node becomes its own component).
std::vector<NodeSet> connected_components(const Network& net, bool skip_zero_probability = false);

} // namespace nmp
