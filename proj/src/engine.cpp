#include "nmp/engine.hpp"

#include "nmp/errors.hpp"
#include "nmp/parallel.hpp"
#include "nmp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmp {

SeedVector::SeedVector(std::vector<double> s) : s_(std::move(s)) {
    for (double v : s_)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("seed probability outside [0,1]");
}

SeedVector SeedVector::indicator(int node_count, const NodeSet& seeds) {
    seeds.check_bounds(node_count);
    std::vector<double> s(static_cast<std::size_t>(node_count), 0.0);
    for (NodeId v : seeds) s[v] = 1.0;
    return SeedVector(std::move(s));
}

SeedVector SeedVector::uniform_excluding(int node_count, const NodeSet& excluded) {
    excluded.check_bounds(node_count);
    const auto eligible = static_cast<double>(node_count) - static_cast<double>(excluded.size());
    std::vector<double> s(static_cast<std::size_t>(node_count), 0.0);
    if (eligible > 0)
        for (NodeId v = 0; v < node_count; ++v)
            if (!excluded.contains(v)) s[v] = 1.0 / eligible;
    return SeedVector(std::move(s));
}

void EngineConfig::validate() const {
    if (samples < 1) throw ConfigError("samples M must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
    if (horizon && *horizon < 1) throw ConfigError("horizon T must be >= 1");
    if (radius < 0 || radius > max_radius)
        throw ConfigError("radius " + std::to_string(radius) + " outside [0, " +
                          std::to_string(max_radius) + "]");
}

std::vector<double> MarginalHistory::final_values() const {
    std::vector<double> out;
    out.reserve(pi.size());
    for (const auto& row : pi) out.push_back(row.back());
    return out;
}

std::optional<std::size_t> MessageState::find(NodeId node, NodeId owner) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), MessageId{node, owner},
                               [](const MessageId& a, const MessageId& b) {
                                   return std::tie(a.owner, a.node) < std::tie(b.owner, b.node);
                               });
    if (it == ids.end() || !(*it == MessageId{node, owner})) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

int default_horizon(const Network& net, int max_lookback) {
    return max_finite_distance(net) + max_lookback + 5;
}

NmpResult classical_mp(const Network& net, const SeedVector& s, const EngineConfig& cfg) {
    cfg.validate();
    if (cfg.radius != 0) throw ConfigError("classical message passing requires radius 0");
    if (static_cast<int>(s.size()) != net.node_count()) throw UsageError("seed vector length != N");
    const NeighborhoodCache cache(net, 0, cfg.max_radius);
    const MessageIndex index(cache);
    const int min_T = cfg.horizon.value_or(default_horizon(net, cache.max_lookback()));
    const int max_T = cfg.horizon ? min_T : std::max(min_T, kMaxAutoHorizon);

    NmpResult out;
    out.messages.ids.assign(index.ids().begin(), index.ids().end());
    auto& values = out.messages.values;
    values.assign(index.size(), std::vector<double>{});
    for (std::size_t m = 0; m < index.size(); ++m) values[m].push_back(s[index[m].node]);
    auto& pi = out.marginals.pi;
    pi.assign(static_cast<std::size_t>(net.node_count()), std::vector<double>{});
    for (NodeId i = 0; i < net.node_count(); ++i) pi[i].push_back(s[i]);

    // Message (i, owner j) reads every (k, owner i) with k != j.
    std::vector<double> next(index.size());
    int t = 1;
    for (;; ++t) {
        for (std::size_t m = 0; m < index.size(); ++m) {
            const auto [i, j] = index[m];
            double prod = 1.0;
            for (const auto& inc : net.neighbors(i)) {
                if (inc.neighbor == j) continue;
                prod *= 1.0 - net.prob(inc.edge) * values[*index.find(inc.neighbor, i)].back();
            }
            next[m] = s[i] + (1.0 - s[i]) * (1.0 - prod);
        }
        double delta = 0.0;
        for (NodeId i = 0; i < net.node_count(); ++i) {
            double prod = 1.0;
            for (const auto& inc : net.neighbors(i))
                prod *= 1.0 - net.prob(inc.edge) * values[*index.find(inc.neighbor, i)].back();
            pi[i].push_back(s[i] + (1.0 - s[i]) * (1.0 - prod));
            delta = std::max(delta, std::abs(pi[i][t] - pi[i][t - 1]));
        }
        for (std::size_t m = 0; m < index.size(); ++m) values[m].push_back(next[m]);
        if (t >= max_T || (t >= min_T && delta < cfg.tol)) break;
    }
    out.messages.horizon = out.marginals.horizon = t;
    return out;
}

double nmp_conditional_marginal(const PercolationSample& sample, NodeId focal,
                                const IncomingMessages& incoming, double s_focal,
                                std::optional<int> t, const NodeSet* blocked, bool seeding_term) {
    double prod = 1.0;
    for (const auto& r : sample.reached) {
        if (r.node == focal) continue;
        if (blocked && blocked->contains(r.node)) continue;
        double pi = 0.0;
        if (t) {
            if (r.dist < 0) throw std::logic_error("sample carries no distances for dynamic update");
            const int at = *t - r.dist;
            if (at >= 0) {
                auto v = incoming(r.node, at);
                if (!v) throw std::logic_error("missing message history for node " + std::to_string(r.node));
                pi = *v;
            }
        } else {
            auto v = incoming(r.node, -1);
            if (!v) throw std::logic_error("missing message for node " + std::to_string(r.node));
            pi = *v;
        }
        prod *= 1.0 - pi;
    }
    const double reached = 1.0 - prod;
    return seeding_term ? s_focal + (1.0 - s_focal) * reached : reached;
}

NmpModel::NmpModel(const Network& net, const EngineConfig& cfg, std::optional<NodeSet> blocked)
    : cfg_(cfg), node_count_(net.node_count()),
      cache_((cfg.validate(), net), cfg.radius, cfg.max_radius, cfg.threads), index_(cache_),
      blocked_(std::move(blocked)) {
    if (blocked_) blocked_->check_bounds(node_count_);
    horizon_ = cfg_.horizon.value_or(default_horizon(net, cache_.max_lookback()));
    if (horizon_ < cache_.max_lookback())
        throw ConfigError("horizon T=" + std::to_string(horizon_) +
                          " is shorter than the neighborhood lookback; need T >= " +
                          std::to_string(cache_.max_lookback()));

    message_owners_.resize(index_.size());
    marginal_owners_.resize(static_cast<std::size_t>(node_count_));
    const std::size_t jobs = index_.size() + marginal_owners_.size();
    parallel_for(jobs, cfg_.threads, [&](std::size_t job) {
        if (job < index_.size()) {
            const auto [i, j] = index_[job];
            const auto cond = build_conditional(cache_[i], cache_[j]);
            message_owners_[job] = compile(net, cond.edges, i, derive_seed(cfg_.master_seed, {1, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
        } else {
            const auto i = static_cast<NodeId>(job - index_.size());
            Owner owner = compile(net, cache_[i].edges, i, derive_seed(cfg_.master_seed, {0, static_cast<std::uint64_t>(i)}));
            owner.seeding = !(blocked_ && blocked_->contains(i));
            marginal_owners_[static_cast<std::size_t>(i)] = std::move(owner);
        }
    });
}

NmpModel::Owner NmpModel::compile(const Network& net, std::span<const EdgeId> edges, NodeId focal,
                                  std::uint64_t stream) const {
    std::vector<EdgeId> kept;
    kept.reserve(edges.size());
    for (EdgeId e : edges) {
        if (net.prob(e) == 0.0) continue;
        if (blocked_) {
            const Edge& ed = net.edge(e);
            if ((ed.u != focal && blocked_->contains(ed.u)) || (ed.v != focal && blocked_->contains(ed.v)))
                continue;
        }
        kept.push_back(e);
    }

    SampleSet set;
    StreamRng rng(stream);
    switch (cfg_.sampler) {
    case SamplerKind::Bfs: set = sample_bfs(net, kept, focal, cfg_.samples, rng); break;
    case SamplerKind::NewmanZiff: set = sample_newman_ziff(net, kept, focal, cfg_.samples, rng, true); break;
    case SamplerKind::Exact: set = enumerate_exact(net, kept, focal); break;
    }

    // Each outcome reduces to its sorted (message, lag) list; identical
    // lists are merged by summing weights.
    std::vector<std::pair<std::vector<Term>, double>> keyed;
    keyed.reserve(set.samples.size());
    for (const auto& sample : set.samples) {
        std::vector<Term> terms;
        for (const auto& r : sample.reached) {
            if (r.node == focal) continue;
            if (blocked_ && blocked_->contains(r.node)) continue;
            const auto m = index_.find(r.node, focal);
            if (!m) throw std::logic_error("reached node outside the focal neighborhood");
            terms.push_back({static_cast<std::uint32_t>(*m), static_cast<std::uint32_t>(r.dist)});
        }
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
            return std::tie(a.message, a.lag) < std::tie(b.message, b.lag);
        });
        keyed.emplace_back(std::move(terms), sample.weight);
    }
    auto term_less = [](const Term& a, const Term& b) { return std::tie(a.message, a.lag) < std::tie(b.message, b.lag); };
    auto term_eq = [](const Term& a, const Term& b) { return a.message == b.message && a.lag == b.lag; };
    std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.first.begin(), a.first.end(), b.first.begin(), b.first.end(), term_less);
    });

    Owner owner;
    owner.focal = focal;
    for (std::size_t a = 0; a < keyed.size();) {
        std::size_t b = a;
        double w = 0.0;
        while (b < keyed.size() && std::equal(keyed[a].first.begin(), keyed[a].first.end(),
                                              keyed[b].first.begin(), keyed[b].first.end(), term_eq)) {
            w += keyed[b].second;
            ++b;
        }
        owner.total_weight += w;
        const auto first = static_cast<std::uint32_t>(owner.terms.size());
        owner.terms.insert(owner.terms.end(), keyed[a].first.begin(), keyed[a].first.end());
        owner.outcomes.push_back({w, first, static_cast<std::uint32_t>(owner.terms.size())});
        a = b;
    }
    return owner;
}

double NmpModel::evaluate(const Owner& owner, double s, int t,
                          const std::vector<std::vector<double>>& values) const {
    double acc = 0.0;
    for (const auto& o : owner.outcomes) {
        double prod = 1.0;
        for (std::uint32_t k = o.first_term; k < o.last_term; ++k) {
            const Term& term = owner.terms[k];
            const int at = t - static_cast<int>(term.lag);
            if (at >= 0) prod *= 1.0 - values[term.message][static_cast<std::size_t>(at)];
        }
        acc += o.weight * (1.0 - prod);
    }
    // Weighted average: Newman-Ziff weights only sum to 1 in expectation.
    const double reached = owner.total_weight > 0.0 ? std::min(1.0, acc / owner.total_weight) : 0.0;
    return owner.seeding ? std::min(1.0, s + (1.0 - s) * reached) : reached;
}

NmpResult NmpModel::run(const SeedVector& s) const {
    if (static_cast<int>(s.size()) != node_count_) throw UsageError("seed vector length != N");
    const int max_T = cfg_.horizon ? horizon_ : std::max(horizon_, kMaxAutoHorizon);

    NmpResult out;
    out.messages.ids.assign(index_.ids().begin(), index_.ids().end());
    auto& values = out.messages.values;
    values.assign(index_.size(), std::vector<double>{});
    for (std::size_t m = 0; m < index_.size(); ++m) values[m].push_back(s[index_[m].node]);
    auto& pi = out.marginals.pi;
    pi.assign(static_cast<std::size_t>(node_count_), std::vector<double>{});
    for (NodeId i = 0; i < node_count_; ++i) pi[i].push_back(evaluate(marginal_owners_[i], s[i], 0, values));

    // Synchronous sweeps: time t reads only times < t.
    std::vector<double> next(index_.size());
    std::vector<double> delta(static_cast<std::size_t>(node_count_));
    int t = 1;
    for (;; ++t) {
        parallel_for(index_.size(), cfg_.threads, [&](std::size_t m) {
            next[m] = evaluate(message_owners_[m], s[index_[m].node], t, values);
        });
        parallel_for(static_cast<std::size_t>(node_count_), cfg_.threads, [&](std::size_t i) {
            const double v = evaluate(marginal_owners_[i], s[static_cast<NodeId>(i)], t, values);
            delta[i] = std::abs(v - pi[i].back());
            pi[i].push_back(v);
        });
        for (std::size_t m = 0; m < index_.size(); ++m) values[m].push_back(next[m]);
        const double max_delta = delta.empty() ? 0.0 : *std::max_element(delta.begin(), delta.end());
        if (t >= max_T || (t >= horizon_ && max_delta < cfg_.tol)) break;
    }
    out.messages.horizon = out.marginals.horizon = t;
    return out;
}

std::size_t NmpModel::compiled_outcomes() const {
    std::size_t n = 0;
    for (const auto& o : message_owners_) n += o.outcomes.size();
    for (const auto& o : marginal_owners_) n += o.outcomes.size();
    return n;
}

NmpResult run_nmp(const Network& net, const SeedVector& s, const EngineConfig& cfg,
                  const std::optional<NodeSet>& blocked) {
    return NmpModel(net, cfg, blocked).run(s);
}

SteadyState steady_state(const MarginalHistory& hist, double tol) {
    SteadyState out;
    out.pi = hist.final_values();
    for (const auto& row : hist.pi) {
        if (row.size() >= 2) out.max_delta = std::max(out.max_delta, std::abs(row.back() - row[row.size() - 2]));
    }
    out.converged = out.max_delta < tol;
    return out;
}

void write_history_json(std::ostream& out, const MarginalHistory& hist) {
    nlohmann::ordered_json j;
    j["horizon"] = hist.horizon;
    auto& m = j["marginals"];
    m = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < hist.pi.size(); ++i) m[std::to_string(i)] = hist.pi[i];
    out << j.dump(2) << '\n';
}

} // namespace nmp
