#include "nmp/neighborhoods.hpp"

#include "nmp/errors.hpp"
#include "nmp/parallel.hpp"

#include <algorithm>
#include <queue>

namespace nmp {

namespace {

// Depth-first enumeration of simple cycles through `focal` with at most
// `max_len` edges; every edge on such a cycle is flagged in `on_cycle`.
class CycleEdgeCollector {
public:
    CycleEdgeCollector(const Network& net, NodeId focal, int max_len)
        : net_(net), focal_(focal), max_len_(max_len),
          on_path_(static_cast<std::size_t>(net.node_count()), 0),
          on_cycle_(static_cast<std::size_t>(net.edge_count()), 0),
          dist_(static_cast<std::size_t>(net.node_count()), -1) {
        std::queue<NodeId> q;
        dist_[focal] = 0;
        q.push(focal);
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop();
            if (dist_[u] >= max_len_) continue;
            for (const auto& inc : net_.neighbors(u)) {
                if (dist_[inc.neighbor] < 0) {
                    dist_[inc.neighbor] = dist_[u] + 1;
                    q.push(inc.neighbor);
                }
            }
        }
    }

    std::vector<char> run() {
        on_path_[focal_] = 1;
        extend(focal_);
        return std::move(on_cycle_);
    }

private:
    void extend(NodeId u) {
        const int depth = static_cast<int>(path_.size());
        for (const auto& inc : net_.neighbors(u)) {
            const NodeId w = inc.neighbor;
            if (w == focal_) {
                if (depth + 1 >= 3) {
                    for (EdgeId e : path_) on_cycle_[e] = 1;
                    on_cycle_[inc.edge] = 1;
                }
                continue;
            }
            if (on_path_[w] || depth + 1 >= max_len_) continue;
            if (dist_[w] < 0 || dist_[w] > max_len_ - (depth + 1)) continue;
            on_path_[w] = 1;
            path_.push_back(inc.edge);
            extend(w);
            path_.pop_back();
            on_path_[w] = 0;
        }
    }

    const Network& net_;
    NodeId focal_;
    int max_len_;
    std::vector<char> on_path_;
    std::vector<char> on_cycle_;
    std::vector<int> dist_;
    std::vector<EdgeId> path_;
};

int focal_eccentricity(const Network& net, const Neighborhood& nb) {
    // BFS over the neighborhood subgraph only.
    std::vector<char> in_set(static_cast<std::size_t>(net.edge_count()), 0);
    for (EdgeId e : nb.edges) in_set[e] = 1;
    std::vector<int> dist(static_cast<std::size_t>(net.node_count()), -1);
    std::queue<NodeId> q;
    dist[nb.focal] = 0;
    q.push(nb.focal);
    int best = 0;
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (const auto& inc : net.neighbors(u)) {
            if (!in_set[inc.edge] || dist[inc.neighbor] >= 0) continue;
            dist[inc.neighbor] = dist[u] + 1;
            best = std::max(best, dist[inc.neighbor]);
            q.push(inc.neighbor);
        }
    }
    return best;
}

} // namespace

Neighborhood build_neighborhood(const Network& net, NodeId focal, int radius, int max_radius) {
    if (focal < 0 || focal >= net.node_count()) throw UsageError("focal node out of range");
    if (radius < 0) throw ConfigError("neighborhood radius must be >= 0");
    if (radius > max_radius)
        throw ConfigError("neighborhood radius " + std::to_string(radius) + " exceeds cap " +
                          std::to_string(max_radius));
    Neighborhood nb;
    nb.focal = focal;
    nb.radius = radius;
    nb.structure_id = net.structure_id();

    std::vector<char> take = CycleEdgeCollector(net, focal, radius + 2).run();
    for (const auto& inc : net.neighbors(focal)) take[inc.edge] = 1;

    std::vector<NodeId> nodes{focal};
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
        if (!take[e]) continue;
        nb.edges.push_back(e);
        nodes.push_back(net.edge(e).u);
        nodes.push_back(net.edge(e).v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    nb.nodes = NodeSet(std::move(nodes));
    return nb;
}

ConditionalNeighborhood build_conditional(const Neighborhood& of, const Neighborhood& excluded) {
    if (of.radius != excluded.radius)
        throw UsageError("conditional neighborhood needs matching radii");
    if (of.structure_id != excluded.structure_id)
        throw UsageError("conditional neighborhood needs neighborhoods of the same network");
    if (of.focal == excluded.focal)
        throw UsageError("conditional neighborhood needs distinct focal nodes");
    ConditionalNeighborhood c;
    c.focal = of.focal;
    c.excluded_owner = excluded.focal;
    std::set_difference(of.edges.begin(), of.edges.end(), excluded.edges.begin(),
                        excluded.edges.end(), std::back_inserter(c.edges));
    return c;
}

NeighborhoodCache::NeighborhoodCache(const Network& net, int radius, int max_radius, int threads)
    : radius_(radius), all_(static_cast<std::size_t>(net.node_count())) {
    if (radius < 0 || radius > max_radius)
        throw ConfigError("neighborhood radius " + std::to_string(radius) +
                          " outside [0, " + std::to_string(max_radius) + "]");
    std::vector<int> ecc(all_.size(), 0);
    parallel_for(all_.size(), threads, [&](std::size_t i) {
        all_[i] = build_neighborhood(net, static_cast<NodeId>(i), radius, max_radius);
        ecc[i] = focal_eccentricity(net, all_[i]);
    });
    for (int e : ecc) max_lookback_ = std::max(max_lookback_, e);
}

MessageIndex::MessageIndex(const NeighborhoodCache& cache)
    : owner_begin_(static_cast<std::size_t>(cache.node_count()) + 1, 0) {
    for (const auto& nb : cache.all()) {
        owner_begin_[static_cast<std::size_t>(nb.focal)] = ids_.size();
        for (NodeId k : nb.nodes)
            if (k != nb.focal) ids_.push_back({k, nb.focal});
    }
    owner_begin_.back() = ids_.size();
}

std::optional<std::size_t> MessageIndex::find(NodeId node, NodeId owner) const {
    auto range = owned_by(owner);
    auto it = std::lower_bound(range.begin(), range.end(), node,
                               [](const MessageId& m, NodeId k) { return m.node < k; });
    if (it == range.end() || it->node != node) return std::nullopt;
    return owner_begin_[static_cast<std::size_t>(owner)] +
           static_cast<std::size_t>(it - range.begin());
}

std::span<const MessageId> MessageIndex::owned_by(NodeId owner) const {
    const auto o = static_cast<std::size_t>(owner);
    return std::span<const MessageId>(ids_).subspan(owner_begin_[o], owner_begin_[o + 1] - owner_begin_[o]);
}

MessageIndex build_message_index(const NeighborhoodCache& cache) { return MessageIndex(cache); }

void write_neighborhood_sizes(std::ostream& out, const NeighborhoodCache& cache) {
    out << "node,radius,edges,nodes\n";
    for (const auto& nb : cache.all())
        out << nb.focal << ',' << nb.radius << ',' << nb.edges.size() << ',' << nb.nodes.size() << '\n';
}

} // namespace nmp
