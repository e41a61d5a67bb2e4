#include "nmp/network.hpp"

#include "nmp/errors.hpp"
#include "nmp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <queue>
#include <sstream>

namespace nmp {

NodeSet::NodeSet(std::vector<NodeId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
        throw UsageError("node set contains duplicate ids");
    if (!ids_.empty() && ids_.front() < 0)
        throw UsageError("node set contains a negative id");
}

bool NodeSet::contains(NodeId v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
}

void NodeSet::check_bounds(int node_count) const {
    if (!ids_.empty() && ids_.back() >= node_count)
        throw UsageError("node id " + std::to_string(ids_.back()) + " out of range for N=" +
                         std::to_string(node_count));
}

std::string NodeSet::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(ids_[i]);
    }
    return out;
}

Network::Network(int node_count, std::vector<Edge> edges)
    : edges_(std::move(edges)), adjacency_(static_cast<std::size_t>(std::max(node_count, 0))) {
    if (node_count < 0) throw UsageError("negative node count");
    std::vector<std::pair<NodeId, NodeId>> keys;
    keys.reserve(edges_.size());
    std::uint64_t h = mix64(static_cast<std::uint64_t>(node_count));
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        if (ed.u < 0 || ed.v < 0 || ed.u >= node_count || ed.v >= node_count)
            throw UsageError("edge endpoint out of range");
        if (ed.u == ed.v) throw DataError("self-loop on node " + std::to_string(ed.u));
        if (!(ed.p >= 0.0 && ed.p <= 1.0))
            throw DomainError("edge probability outside [0,1]: " + std::to_string(ed.p));
        keys.emplace_back(std::min(ed.u, ed.v), std::max(ed.u, ed.v));
        adjacency_[static_cast<std::size_t>(ed.u)].push_back({ed.v, static_cast<EdgeId>(e)});
        adjacency_[static_cast<std::size_t>(ed.v)].push_back({ed.u, static_cast<EdgeId>(e)});
        h = mix64(h ^ (static_cast<std::uint64_t>(keys.back().first) << 32 |
                       static_cast<std::uint32_t>(keys.back().second)));
    }
    std::sort(keys.begin(), keys.end());
    auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end())
        throw DuplicateEdgeError("duplicate edge " + std::to_string(dup->first) + " " +
                                 std::to_string(dup->second));
    structure_id_ = h;
}

std::optional<EdgeId> Network::find_edge(NodeId u, NodeId v) const {
    if (u < 0 || u >= node_count()) return std::nullopt;
    for (const auto& inc : neighbors(u))
        if (inc.neighbor == v) return inc.edge;
    return std::nullopt;
}

std::optional<double> Network::uniform_probability() const {
    if (edges_.empty()) return std::nullopt;
    const double p = edges_.front().p;
    for (const auto& e : edges_)
        if (e.p != p) return std::nullopt;
    return p;
}

Network Network::with_uniform_probability(double p) const {
    auto edges = edges_;
    for (auto& e : edges) e.p = p;
    return Network(node_count(), std::move(edges));
}

Network Network::with_isolated(const NodeSet& nodes) const {
    nodes.check_bounds(node_count());
    auto edges = edges_;
    for (auto& e : edges)
        if (nodes.contains(e.u) || nodes.contains(e.v)) e.p = 0.0;
    return Network(node_count(), std::move(edges));
}

Network Network::with_scaled_probability(double factor) const {
    auto edges = edges_;
    for (auto& e : edges) e.p = std::clamp(e.p * factor, 0.0, 1.0);
    return Network(node_count(), std::move(edges));
}

Network load_edge_list(std::istream& in, double default_p) {
    if (!(default_p >= 0.0 && default_p <= 1.0))
        throw DomainError("default probability outside [0,1]");
    std::vector<Edge> edges;
    std::vector<std::pair<NodeId, NodeId>> seen;
    NodeId max_id = -1;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != 2 && tok.size() != 3)
            throw ParseError(lineno, "expected 'u v' or 'u v p'");
        auto parse_id = [&](const std::string& s) {
            NodeId v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
                throw ParseError(lineno, "bad node id '" + s + "'");
            return v;
        };
        const NodeId u = parse_id(tok[0]);
        const NodeId v = parse_id(tok[1]);
        if (u == v) throw ParseError(lineno, "self-loop on node " + tok[0]);
        double p = default_p;
        if (tok.size() == 3) {
            std::size_t used = 0;
            try {
                p = std::stod(tok[2], &used);
            } catch (const std::exception&) {
                throw ParseError(lineno, "bad probability '" + tok[2] + "'");
            }
            if (used != tok[2].size()) throw ParseError(lineno, "bad probability '" + tok[2] + "'");
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("line " + std::to_string(lineno) +
                                  ": probability outside [0,1]: " + tok[2]);
        }
        seen.emplace_back(std::min(u, v), std::max(u, v));
        edges.push_back({u, v, p});
        max_id = std::max({max_id, u, v});
    }
    std::sort(seen.begin(), seen.end());
    if (auto dup = std::adjacent_find(seen.begin(), seen.end()); dup != seen.end())
        throw DuplicateEdgeError("duplicate edge " + std::to_string(dup->first) + " " +
                                 std::to_string(dup->second));
    return Network(max_id + 1, std::move(edges));
}

Network load_edge_list_file(const std::string& path, double default_p) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open graph file '" + path + "'");
    return load_edge_list(in, default_p);
}

std::vector<int> coreness(const Network& net) {
    const int n = net.node_count();
    std::vector<int> deg(static_cast<std::size_t>(n));
    int max_deg = 0;
    for (NodeId v = 0; v < n; ++v) {
        deg[v] = net.degree(v);
        max_deg = std::max(max_deg, deg[v]);
    }
    // Bucket queue keyed by current degree.
    std::vector<std::vector<NodeId>> buckets(static_cast<std::size_t>(max_deg) + 1);
    for (NodeId v = 0; v < n; ++v) buckets[deg[v]].push_back(v);
    std::vector<int> core(static_cast<std::size_t>(n), 0);
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    int k = 0;
    for (int done = 0; done < n;) {
        int d = 0;
        while (buckets[d].empty()) ++d;
        NodeId v = buckets[d].back();
        buckets[d].pop_back();
        if (removed[v] || deg[v] != d) continue;
        k = std::max(k, d);
        core[v] = k;
        removed[v] = 1;
        ++done;
        for (const auto& inc : net.neighbors(v)) {
            NodeId w = inc.neighbor;
            if (removed[w]) continue;
            --deg[w];
            buckets[deg[w]].push_back(w);
        }
    }
    return core;
}

std::vector<int> bfs_distances(const Network& net, NodeId source) {
    std::vector<int> dist(static_cast<std::size_t>(net.node_count()), -1);
    std::queue<NodeId> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (const auto& inc : net.neighbors(u)) {
            if (dist[inc.neighbor] < 0) {
                dist[inc.neighbor] = dist[u] + 1;
                q.push(inc.neighbor);
            }
        }
    }
    return dist;
}

int diameter(const Network& net) {
    int best = 0;
    for (NodeId v = 0; v < net.node_count(); ++v) {
        for (int d : bfs_distances(net, v)) {
            if (d < 0) throw DomainError("diameter undefined: network is disconnected");
            best = std::max(best, d);
        }
    }
    return best;
}

int max_finite_distance(const Network& net) {
    int best = 0;
    for (NodeId v = 0; v < net.node_count(); ++v)
        for (int d : bfs_distances(net, v)) best = std::max(best, d);
    return best;
}

std::vector<NodeSet> connected_components(const Network& net, bool skip_zero_probability) {
    const int n = net.node_count();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<NodeSet> out;
    for (NodeId s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        std::vector<NodeId> members{s};
        label[s] = id;
        for (std::size_t head = 0; head < members.size(); ++head) {
            for (const auto& inc : net.neighbors(members[head])) {
                if (skip_zero_probability && net.prob(inc.edge) == 0.0) continue;
                if (label[inc.neighbor] < 0) {
                    label[inc.neighbor] = id;
                    members.push_back(inc.neighbor);
                }
            }
        }
        out.emplace_back(std::move(members));
    }
    return out;
}

} // namespace nmp
