#pragma once

#include "nmp/neighborhoods.hpp"
#include "nmp/network.hpp"
#include "nmp/percolation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace nmp {

// Per-node probability of being an initial seed.
class SeedVector {
public:
    SeedVector() = default;
    // Throws DomainError if any entry falls outside [0,1].
    explicit SeedVector(std::vector<double> s);

    // s_i = 1 on `seeds`, 0 elsewhere.
    static SeedVector indicator(int node_count, const NodeSet& seeds);
    // s_i = 1 / (N - |excluded|) on every node outside `excluded`.
    static SeedVector uniform_excluding(int node_count, const NodeSet& excluded);

    std::size_t size() const { return s_.size(); }
    double operator[](NodeId i) const { return s_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return s_; }

private:
    std::vector<double> s_;
};

inline constexpr int kMaxAutoHorizon = 500;

struct EngineConfig {
    int radius = 1;
    int samples = 1500;
    // Number of synchronous sweeps T. Unset: at least the longest finite
    // shortest path + neighborhood lookback + 5 sweeps, continuing until
    // max_i |pi_i(t) - pi_i(t-1)| < tol or kMaxAutoHorizon sweeps.
    std::optional<int> horizon;
    double tol = 1e-4;
    SamplerKind sampler = SamplerKind::Bfs;
    std::uint64_t master_seed = 1;
    int max_radius = kDefaultMaxRadius;
    int threads = 1;

    // Throws ConfigError on samples < 1, tol <= 0, horizon < 1.
    void validate() const;
};

// pi[i][t] for t = 0..T: probability node i is infected by time t.
struct MarginalHistory {
    int horizon = 0;
    std::vector<std::vector<double>> pi;

    double at(NodeId i, int t) const { return pi[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]; }
    std::vector<double> final_values() const;
};

// values[m][t] for message ids[m].
struct MessageState {
    int horizon = 0;
    std::vector<MessageId> ids;
    std::vector<std::vector<double>> values;

    std::optional<std::size_t> find(NodeId node, NodeId owner) const;
};

struct NmpResult {
    MarginalHistory marginals;
    MessageState messages;
};

// Dynamic pairwise message passing (radius 0, exact products, no sampling).
// Requires cfg.radius == 0.
NmpResult classical_mp(const Network& net, const SeedVector& s, const EngineConfig& cfg);

// Probability that node i is infected given one percolation outcome of its
// (conditional) neighborhood. `incoming(k, t)` yields the message from k at
// time t, or nullopt if that history is missing (a logic error). With `t`
// unset the static form is used: incoming(k, -1) is read as the t -> infinity
// value. Reached nodes in `blocked` contribute nothing; when
// `seeding_term` is false the s_i + (1 - s_i)(...) prefix is dropped.
using IncomingMessages = std::function<std::optional<double>(NodeId, int)>;
double nmp_conditional_marginal(const PercolationSample& sample, NodeId focal,
                                const IncomingMessages& incoming, double s_focal,
                                std::optional<int> t, const NodeSet* blocked = nullptr,
                                bool seeding_term = true);

// Neighborhoods, message index and frozen percolation samples for one
// (network, radius, sampler, M, seed, blocked set). Running it for many seed
// vectors reuses the same samples.
//
// With a blocked (sentinel) set, every sampled edge touching a blocked node
// other than the sample's focal node is removed, blocked nodes drop out of
// the products, and blocked nodes' marginals carry no seeding term.
class NmpModel {
public:
    NmpModel(const Network& net, const EngineConfig& cfg, std::optional<NodeSet> blocked = {});

    NmpResult run(const SeedVector& s) const;

    // Fixed sweep count, or the minimum one when sweeps run to convergence.
    int horizon() const { return horizon_; }
    int max_lookback() const { return cache_.max_lookback(); }
    const NeighborhoodCache& neighborhoods() const { return cache_; }
    const MessageIndex& messages() const { return index_; }
    // Distinct outcomes kept after merging identical samples, summed over owners.
    std::size_t compiled_outcomes() const;

private:
    struct Term {
        std::uint32_t message;
        std::uint32_t lag;
    };
    struct Outcome {
        double weight;
        std::uint32_t first_term;
        std::uint32_t last_term;
    };
    struct Owner {
        NodeId focal = 0;
        bool seeding = true;
        double total_weight = 0.0;
        std::vector<Outcome> outcomes;
        std::vector<Term> terms;
    };

    Owner compile(const Network& net, std::span<const EdgeId> edges, NodeId focal,
                  std::uint64_t stream) const;
    double evaluate(const Owner& owner, double s, int t,
                    const std::vector<std::vector<double>>& values) const;

    EngineConfig cfg_;
    int node_count_;
    NeighborhoodCache cache_;
    MessageIndex index_;
    std::optional<NodeSet> blocked_;
    int horizon_;
    std::vector<Owner> message_owners_;
    std::vector<Owner> marginal_owners_;
};

NmpResult run_nmp(const Network& net, const SeedVector& s, const EngineConfig& cfg,
                  const std::optional<NodeSet>& blocked = std::nullopt);

struct SteadyState {
    std::vector<double> pi;
    bool converged = false;
    double max_delta = 0.0;
};

// pi(T), converged iff max_i |pi_i(T) - pi_i(T-1)| < tol.
SteadyState steady_state(const MarginalHistory& hist, double tol);

// Default sweep count for a network and neighborhood lookback.
int default_horizon(const Network& net, int max_lookback);

// {"horizon": T, "marginals": {"<node>": [pi(0), ..., pi(T)], ...}}
void write_history_json(std::ostream& out, const MarginalHistory& hist);

} // namespace nmp
