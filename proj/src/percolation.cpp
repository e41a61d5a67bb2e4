#include "nmp/percolation.hpp"

#include "nmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nmp {

namespace {

// Edge subset re-indexed to dense local ids.
struct LocalGraph {
    std::vector<NodeId> nodes; // local -> global, sorted
    int focal = 0;
    std::vector<std::pair<int, int>> ends;
    std::vector<double> prob;
    std::vector<std::vector<std::pair<int, int>>> adj; // (local neighbor, local edge)

    LocalGraph(const Network& net, std::span<const EdgeId> edges, NodeId focal_node) {
        if (focal_node < 0 || focal_node >= net.node_count())
            throw UsageError("focal node out of range");
        nodes.push_back(focal_node);
        for (EdgeId e : edges) {
            if (e < 0 || e >= net.edge_count()) throw UsageError("edge id out of range");
            nodes.push_back(net.edge(e).u);
            nodes.push_back(net.edge(e).v);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        focal = local(focal_node);
        adj.resize(nodes.size());
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Edge& ed = net.edge(edges[i]);
            const int a = local(ed.u), b = local(ed.v);
            ends.emplace_back(a, b);
            prob.push_back(ed.p);
            adj[a].emplace_back(b, static_cast<int>(i));
            adj[b].emplace_back(a, static_cast<int>(i));
        }
    }

    int local(NodeId v) const {
        return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
    }
    int size() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(ends.size()); }

    // BFS from the focal node over active edges; fills `out.reached`.
    void reach(const std::vector<bool>& active, std::vector<int>& dist, PercolationSample& out) const {
        std::fill(dist.begin(), dist.end(), -1);
        std::vector<int> order{focal};
        dist[focal] = 0;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const int u = order[head];
            for (auto [w, e] : adj[u]) {
                if (!active[e] || dist[w] >= 0) continue;
                dist[w] = dist[u] + 1;
                order.push_back(w);
            }
        }
        out.reached.clear();
        for (int u : order) out.reached.push_back({nodes[u], dist[u]});
    }
};

SampleSet make_set(const LocalGraph& g, std::span<const EdgeId> edges, NodeId focal, SamplerKind kind) {
    SampleSet set;
    set.focal = focal;
    set.sampler = kind;
    set.edges.assign(edges.begin(), edges.end());
    set.nodes = NodeSet(g.nodes);
    return set;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

std::string_view to_string(SamplerKind kind) {
    switch (kind) {
    case SamplerKind::Bfs: return "bfs";
    case SamplerKind::NewmanZiff: return "nz";
    case SamplerKind::Exact: return "exact";
    }
    return "?";
}

SamplerKind parse_sampler(std::string_view name) {
    if (name == "bfs") return SamplerKind::Bfs;
    if (name == "nz") return SamplerKind::NewmanZiff;
    if (name == "exact") return SamplerKind::Exact;
    throw ConfigError("unknown sampler '" + std::string(name) + "' (expected bfs|nz|exact)");
}

bool PercolationSample::reaches(NodeId k) const {
    return std::any_of(reached.begin(), reached.end(), [k](const ReachedNode& r) { return r.node == k; });
}

std::optional<int> PercolationSample::distance(NodeId k) const {
    for (const auto& r : reached)
        if (r.node == k) return r.dist;
    return std::nullopt;
}

NodeSet PercolationSample::reachable() const {
    std::vector<NodeId> ids;
    ids.reserve(reached.size());
    for (const auto& r : reached) ids.push_back(r.node);
    return NodeSet(std::move(ids));
}

double SampleSet::total_weight() const {
    double w = 0.0;
    for (const auto& s : samples) w += s.weight;
    return w;
}

SampleSet sample_bfs(const Network& net, std::span<const EdgeId> edges, NodeId focal, int samples,
                     StreamRng& rng) {
    if (samples < 1) throw ConfigError("sample count must be >= 1");
    const LocalGraph g(net, edges, focal);
    SampleSet set = make_set(g, edges, focal, SamplerKind::Bfs);
    set.samples.reserve(static_cast<std::size_t>(samples));
    const double weight = 1.0 / samples;
    std::vector<char> decided(static_cast<std::size_t>(g.edge_count()));
    std::vector<int> dist(static_cast<std::size_t>(g.size()));
    std::vector<int> order;
    for (int m = 0; m < samples; ++m) {
        PercolationSample s;
        s.active.assign(static_cast<std::size_t>(g.edge_count()), false);
        s.weight = weight;
        std::fill(decided.begin(), decided.end(), 0);
        std::fill(dist.begin(), dist.end(), -1);
        order.assign(1, g.focal);
        dist[g.focal] = 0;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const int u = order[head];
            for (auto [w, e] : g.adj[u]) {
                if (decided[e]) continue;
                decided[e] = 1;
                if (!rng.bernoulli(g.prob[e])) continue;
                s.active[e] = true;
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    order.push_back(w);
                }
            }
        }
        s.reached.reserve(order.size());
        for (int u : order) s.reached.push_back({g.nodes[u], dist[u]});
        set.samples.push_back(std::move(s));
    }
    return set;
}

SampleSet sample_newman_ziff(const Network& net, std::span<const EdgeId> edges, NodeId focal,
                             int sweeps, StreamRng& rng, bool with_distances) {
    if (sweeps < 1) throw ConfigError("sweep count must be >= 1");
    const LocalGraph g(net, edges, focal);
    SampleSet set = make_set(g, edges, focal, SamplerKind::NewmanZiff);
    set.has_distances = with_distances;

    std::vector<int> live; // local edges with p > 0
    std::optional<double> p;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (g.prob[e] == 0.0) continue;
        if (p && *p != g.prob[e])
            throw UnsupportedError("Newman-Ziff sampling requires one shared edge probability");
        p = g.prob[e];
        live.push_back(e);
    }
    const int E = static_cast<int>(live.size());
    const std::vector<double> w = binomial_weights(E, p.value_or(0.0));
    std::vector<int> dist(static_cast<std::size_t>(g.size()));

    for (int m = 0; m < sweeps; ++m) {
        std::vector<int> perm = live;
        std::shuffle(perm.begin(), perm.end(), rng);
        UnionFind uf(g.size());
        std::vector<bool> active(static_cast<std::size_t>(g.edge_count()), false);
        for (int e = 0; e <= E; ++e) {
            if (e > 0) {
                const int added = perm[static_cast<std::size_t>(e - 1)];
                active[added] = true;
                uf.unite(g.ends[added].first, g.ends[added].second);
            }
            if (w[e] == 0.0) continue;
            PercolationSample s;
            s.active = active;
            s.weight = w[e] / sweeps;
            if (with_distances) {
                g.reach(active, dist, s);
            } else {
                const int root = uf.find(g.focal);
                s.reached.push_back({g.nodes[g.focal], 0});
                for (int u = 0; u < g.size(); ++u)
                    if (u != g.focal && uf.find(u) == root) s.reached.push_back({g.nodes[u], -1});
            }
            set.samples.push_back(std::move(s));
        }
    }
    return set;
}

SampleSet enumerate_exact(const Network& net, std::span<const EdgeId> edges, NodeId focal, int max_edges) {
    if (static_cast<int>(edges.size()) > max_edges)
        throw ConfigError("exact enumeration over " + std::to_string(edges.size()) +
                          " edges exceeds the cap of " + std::to_string(max_edges));
    const LocalGraph g(net, edges, focal);
    SampleSet set = make_set(g, edges, focal, SamplerKind::Exact);
    const int E = g.edge_count();
    std::vector<int> dist(static_cast<std::size_t>(g.size()));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << E); ++mask) {
        PercolationSample s;
        s.active.resize(static_cast<std::size_t>(E));
        double weight = 1.0;
        for (int e = 0; e < E; ++e) {
            const bool on = (mask >> e) & 1U;
            s.active[e] = on;
            weight *= on ? g.prob[e] : 1.0 - g.prob[e];
        }
        if (weight == 0.0) continue;
        s.weight = weight;
        g.reach(s.active, dist, s);
        set.samples.push_back(std::move(s));
    }
    return set;
}

double estimate_reachability(const SampleSet& set, NodeId k) {
    if (!set.nodes.contains(k))
        throw UsageError("node " + std::to_string(k) + " is not in the sampled neighborhood");
    double r = 0.0;
    for (const auto& s : set.samples)
        if (s.reaches(k)) r += s.weight;
    return r;
}

std::vector<double> binomial_weights(int edges, double p) {
    std::vector<double> w(static_cast<std::size_t>(edges) + 1, 0.0);
    if (p <= 0.0) {
        w.front() = 1.0;
        return w;
    }
    if (p >= 1.0) {
        w.back() = 1.0;
        return w;
    }
    const double lp = std::log(p), lq = std::log1p(-p);
    for (int e = 0; e <= edges; ++e) {
        const double lchoose = std::lgamma(edges + 1.0) - std::lgamma(e + 1.0) - std::lgamma(edges - e + 1.0);
        w[e] = std::exp(lchoose + e * lp + (edges - e) * lq);
    }
    return w;
}

} // namespace nmp
