#include "nmp/oracle.hpp"

#include "nmp/errors.hpp"
#include "nmp/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace nmp {

namespace {

constexpr std::int64_t kBlockSize = 1024;

void check_context(const Network& net, const OracleContext& ctx) {
    ctx.vaccinated.check_bounds(net.node_count());
    ctx.sentinels.check_bounds(net.node_count());
    if (ctx.horizon < 0) throw ConfigError("oracle horizon must be >= 0");
    std::visit(
        [&](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, FixedSeeds>) {
                model.seeds.check_bounds(net.node_count());
                for (NodeId v : model.seeds)
                    if (ctx.vaccinated.contains(v)) throw UsageError("seed node " + std::to_string(v) + " is vaccinated");
            } else if constexpr (std::is_same_v<T, UniformSingleSeed>) {
                model.eligible.check_bounds(net.node_count());
                if (model.eligible.empty()) throw UsageError("no eligible seed nodes");
                for (NodeId v : model.eligible)
                    if (ctx.vaccinated.contains(v)) throw UsageError("seed node " + std::to_string(v) + " is vaccinated");
            } else {
                if (static_cast<int>(model.s.size()) != net.node_count()) throw UsageError("seed vector length != N");
                for (NodeId v : ctx.vaccinated)
                    if (model.s[v] > 0.0) throw UsageError("vaccinated node " + std::to_string(v) + " has seed mass");
            }
        },
        ctx.seeds);
}

CascadeTrace spread(const Network& net, std::vector<NodeId> frontier, const NodeSet& vaccinated,
                    StreamRng& rng) {
    CascadeTrace trace;
    trace.infection_time.assign(static_cast<std::size_t>(net.node_count()), CascadeTrace::kNever);
    for (NodeId v : frontier) trace.infection_time[v] = 0;
    trace.final_size = static_cast<int>(frontier.size());
    std::vector<NodeId> next;
    for (int t = 1; !frontier.empty(); ++t) {
        next.clear();
        for (NodeId u : frontier) {
            for (const auto& inc : net.neighbors(u)) {
                const NodeId w = inc.neighbor;
                if (trace.infection_time[w] != CascadeTrace::kNever || vaccinated.contains(w)) continue;
                if (!rng.bernoulli(net.prob(inc.edge))) continue;
                trace.infection_time[w] = t;
                next.push_back(w);
            }
        }
        trace.final_size += static_cast<int>(next.size());
        frontier.swap(next);
    }
    return trace;
}

struct Tally {
    std::vector<std::int64_t> ever;     // [node]
    std::vector<std::int64_t> at_time;  // [node * (H+1) + t], first infected at t
    std::vector<std::int64_t> detect_at; // [t]
    std::int64_t detect_ever = 0;
    std::int64_t size_sum = 0;
    std::int64_t size_sq_sum = 0;

    Tally(int n, int horizon)
        : ever(static_cast<std::size_t>(n)), at_time(static_cast<std::size_t>(n) * (horizon + 1)),
          detect_at(static_cast<std::size_t>(horizon) + 1) {}

    void add(const CascadeTrace& tr, const NodeSet& sentinels, int horizon) {
        size_sum += tr.final_size;
        size_sq_sum += static_cast<std::int64_t>(tr.final_size) * tr.final_size;
        const int w = horizon + 1;
        for (std::size_t i = 0; i < tr.infection_time.size(); ++i) {
            const int t = tr.infection_time[i];
            if (t == CascadeTrace::kNever) continue;
            ++ever[i];
            if (t <= horizon) ++at_time[i * w + t];
        }
        int first = CascadeTrace::kNever;
        for (NodeId s : sentinels) {
            const int t = tr.infection_time[s];
            if (t != CascadeTrace::kNever && (first == CascadeTrace::kNever || t < first)) first = t;
        }
        if (first != CascadeTrace::kNever) {
            ++detect_ever;
            if (first <= horizon) ++detect_at[first];
        }
    }

    void merge(const Tally& o) {
        for (std::size_t i = 0; i < ever.size(); ++i) ever[i] += o.ever[i];
        for (std::size_t i = 0; i < at_time.size(); ++i) at_time[i] += o.at_time[i];
        for (std::size_t i = 0; i < detect_at.size(); ++i) detect_at[i] += o.detect_at[i];
        detect_ever += o.detect_ever;
        size_sum += o.size_sum;
        size_sq_sum += o.size_sq_sum;
    }
};

// Multi-source BFS over active edges, never entering vaccinated nodes.
void active_distances(const Network& net, const std::vector<char>& active, std::span<const NodeId> sources,
                      const NodeSet& vaccinated, std::vector<int>& dist, std::vector<NodeId>& queue) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    for (NodeId s : sources) {
        if (dist[s] < 0) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (const auto& inc : net.neighbors(u)) {
            if (!active[inc.edge] || dist[inc.neighbor] >= 0 || vaccinated.contains(inc.neighbor)) continue;
            dist[inc.neighbor] = dist[u] + 1;
            queue.push_back(inc.neighbor);
        }
    }
}

} // namespace

CascadeTrace simulate_cascade(const Network& net, const NodeSet& seeds, const NodeSet& vaccinated,
                              StreamRng& rng) {
    seeds.check_bounds(net.node_count());
    for (NodeId v : seeds)
        if (vaccinated.contains(v)) throw UsageError("seed node " + std::to_string(v) + " is vaccinated");
    return spread(net, std::vector<NodeId>(seeds.begin(), seeds.end()), vaccinated, rng);
}

CascadeTrace simulate_cascade(const Network& net, const SeedVector& s, const NodeSet& vaccinated,
                              StreamRng& rng) {
    if (static_cast<int>(s.size()) != net.node_count()) throw UsageError("seed vector length != N");
    std::vector<NodeId> seeds;
    for (NodeId v = 0; v < net.node_count(); ++v) {
        if (s[v] <= 0.0) continue;
        if (vaccinated.contains(v)) throw UsageError("vaccinated node " + std::to_string(v) + " has seed mass");
        if (rng.bernoulli(s[v])) seeds.push_back(v);
    }
    return spread(net, std::move(seeds), vaccinated, rng);
}

OracleEstimate mc_estimate(const Network& net, const OracleContext& ctx, std::int64_t n_sims,
                           std::uint64_t seed, int threads) {
    if (n_sims < 1) throw ConfigError("Monte Carlo needs at least one simulation");
    check_context(net, ctx);
    const int n = net.node_count();
    const int H = ctx.horizon;
    const std::int64_t blocks = (n_sims + kBlockSize - 1) / kBlockSize;
    const int chunks = static_cast<int>(std::min<std::int64_t>(std::max(threads, 1), blocks));
    std::vector<Tally> tallies(static_cast<std::size_t>(chunks), Tally(n, H));

    parallel_for(static_cast<std::size_t>(chunks), chunks, [&](std::size_t c) {
        Tally& tally = tallies[c];
        for (std::int64_t b = static_cast<std::int64_t>(c); b < blocks; b += chunks) {
            StreamRng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
            const std::int64_t end = std::min(n_sims, (b + 1) * kBlockSize);
            for (std::int64_t sim = b * kBlockSize; sim < end; ++sim) {
                CascadeTrace tr = std::visit(
                    [&](const auto& model) {
                        using T = std::decay_t<decltype(model)>;
                        if constexpr (std::is_same_v<T, FixedSeeds>) {
                            return spread(net, std::vector<NodeId>(model.seeds.begin(), model.seeds.end()),
                                          ctx.vaccinated, rng);
                        } else if constexpr (std::is_same_v<T, UniformSingleSeed>) {
                            const NodeId s0 = model.eligible[rng.below(model.eligible.size())];
                            return spread(net, {s0}, ctx.vaccinated, rng);
                        } else {
                            return simulate_cascade(net, model.s, ctx.vaccinated, rng);
                        }
                    },
                    ctx.seeds);
                tally.add(tr, ctx.sentinels, H);
            }
        }
    });
    for (int c = 1; c < chunks; ++c) tallies[0].merge(tallies[static_cast<std::size_t>(c)]);
    const Tally& all = tallies[0];

    OracleEstimate est;
    est.horizon = H;
    est.n_sims = n_sims;
    const double nd = static_cast<double>(n_sims);
    est.marginals_t.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(H) + 1));
    for (int i = 0; i < n; ++i) {
        std::int64_t cum = 0;
        for (int t = 0; t <= H; ++t) {
            cum += all.at_time[static_cast<std::size_t>(i) * (H + 1) + t];
            est.marginals_t[i][t] = static_cast<double>(cum) / nd;
        }
        const double f = static_cast<double>(all.ever[i]) / nd;
        est.marginals.push_back(f);
        est.marginal_se.push_back(std::sqrt(f * (1.0 - f) / nd));
    }
    est.expected_size = static_cast<double>(all.size_sum) / nd;
    const double var = std::max(0.0, static_cast<double>(all.size_sq_sum) / nd - est.expected_size * est.expected_size);
    est.size_se = n_sims > 1 ? std::sqrt(var * nd / (nd - 1.0) / nd) : 0.0;
    if (!ctx.sentinels.empty()) {
        std::int64_t cum = 0;
        for (int t = 0; t <= H; ++t) {
            cum += all.detect_at[t];
            const double f = static_cast<double>(cum) / nd;
            est.detection_cdf.push_back(f);
            est.detection_cdf_se.push_back(std::sqrt(f * (1.0 - f) / nd));
        }
        est.detected_ever = static_cast<double>(all.detect_ever) / nd;
    }
    return est;
}

OracleEstimate exact_enumerate(const Network& net, const OracleContext& ctx, int max_bits) {
    check_context(net, ctx);
    const int n = net.node_count();
    const int H = ctx.horizon;

    std::vector<EdgeId> uncertain;
    std::vector<char> active(static_cast<std::size_t>(net.edge_count()), 0);
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
        const double p = net.prob(e);
        if (p >= 1.0) active[e] = 1;
        else if (p > 0.0) uncertain.push_back(e);
    }

    // Seed scenarios: (weight, fixed sources) pairs, or fractional bits.
    std::vector<std::pair<double, std::vector<NodeId>>> scenarios;
    std::vector<NodeId> fractional;
    std::vector<NodeId> certain;
    std::visit(
        [&](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, FixedSeeds>) {
                scenarios.emplace_back(1.0, std::vector<NodeId>(model.seeds.begin(), model.seeds.end()));
            } else if constexpr (std::is_same_v<T, UniformSingleSeed>) {
                const double w = 1.0 / static_cast<double>(model.eligible.size());
                for (NodeId v : model.eligible) scenarios.emplace_back(w, std::vector<NodeId>{v});
            } else {
                for (NodeId v = 0; v < n; ++v) {
                    if (model.s[v] >= 1.0) certain.push_back(v);
                    else if (model.s[v] > 0.0) fractional.push_back(v);
                }
            }
        },
        ctx.seeds);
    const int bits = static_cast<int>(uncertain.size() + fractional.size());
    if (bits > max_bits)
        throw ConfigError("exact enumeration over " + std::to_string(bits) + " random variables exceeds the cap of " +
                          std::to_string(max_bits));
    if (!fractional.empty() || scenarios.empty()) {
        const auto& s = std::get<IndependentSeeds>(ctx.seeds).s;
        const std::size_t F = fractional.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << F); ++mask) {
            double w = 1.0;
            std::vector<NodeId> src = certain;
            for (std::size_t f = 0; f < F; ++f) {
                const bool on = (mask >> f) & 1U;
                w *= on ? s[fractional[f]] : 1.0 - s[fractional[f]];
                if (on) src.push_back(fractional[f]);
            }
            scenarios.emplace_back(w, std::move(src));
        }
    }

    std::vector<double> ever(static_cast<std::size_t>(n), 0.0);
    std::vector<std::vector<double>> at(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(H) + 1, 0.0));
    std::vector<double> detect_at(static_cast<std::size_t>(H) + 1, 0.0);
    double detect_ever = 0.0, size = 0.0;
    std::vector<int> dist(static_cast<std::size_t>(n));
    std::vector<NodeId> queue;

    const std::size_t E = uncertain.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << E); ++mask) {
        double w_bonds = 1.0;
        for (std::size_t k = 0; k < E; ++k) {
            const bool on = (mask >> k) & 1U;
            active[uncertain[k]] = on;
            w_bonds *= on ? net.prob(uncertain[k]) : 1.0 - net.prob(uncertain[k]);
        }
        for (const auto& [w_seed, sources] : scenarios) {
            const double w = w_bonds * w_seed;
            if (w == 0.0) continue;
            active_distances(net, active, sources, ctx.vaccinated, dist, queue);
            size += w * static_cast<double>(queue.size());
            for (NodeId i : queue) {
                ever[i] += w;
                if (dist[i] <= H) at[i][dist[i]] += w;
            }
            int first = -1;
            for (NodeId s : ctx.sentinels)
                if (dist[s] >= 0 && (first < 0 || dist[s] < first)) first = dist[s];
            if (first >= 0) {
                detect_ever += w;
                if (first <= H) detect_at[first] += w;
            }
        }
    }

    OracleEstimate est;
    est.horizon = H;
    est.marginals = ever;
    est.marginal_se.assign(static_cast<std::size_t>(n), 0.0);
    est.expected_size = size;
    est.marginals_t.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double cum = 0.0;
        for (int t = 0; t <= H; ++t) {
            cum += at[i][t];
            est.marginals_t[i].push_back(cum);
        }
    }
    if (!ctx.sentinels.empty()) {
        double cum = 0.0;
        for (int t = 0; t <= H; ++t) {
            cum += detect_at[t];
            est.detection_cdf.push_back(cum);
        }
        est.detection_cdf_se.assign(est.detection_cdf.size(), 0.0);
        est.detected_ever = detect_ever;
    }
    return est;
}

} // namespace nmp
