#pragma once

#include "nmp/engine.hpp"
#include "nmp/network.hpp"
#include "nmp/rng.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace nmp {

// Seeds for the ground-truth engines.
struct FixedSeeds {
    NodeSet seeds;
};
// Exactly one seed per cascade, uniform over `eligible`.
struct UniformSingleSeed {
    NodeSet eligible;
};
// Every node seeded independently with probability s_i.
struct IndependentSeeds {
    SeedVector s;
};
using SeedModel = std::variant<FixedSeeds, UniformSingleSeed, IndependentSeeds>;

struct OracleContext {
    SeedModel seeds;
    NodeSet vaccinated; // never infected, never infect
    NodeSet sentinels;  // passive; only their first infection time is recorded
    int horizon = 10;   // time-resolved quantities cover t = 0..horizon
};

struct CascadeTrace {
    static constexpr int kNever = -1;
    std::vector<int> infection_time; // kNever if not infected
    int final_size = 0;
};

// Discrete-time independent cascade. Throws UsageError when a seed is vaccinated.
CascadeTrace simulate_cascade(const Network& net, const NodeSet& seeds, const NodeSet& vaccinated,
                              StreamRng& rng);
CascadeTrace simulate_cascade(const Network& net, const SeedVector& s, const NodeSet& vaccinated,
                              StreamRng& rng);

struct OracleEstimate {
    int horizon = 0;
    std::int64_t n_sims = 0; // 0 for exact enumeration
    std::vector<std::vector<double>> marginals_t; // [node][t], P(infected by t)
    std::vector<double> marginals;                // P(ever infected)
    std::vector<double> marginal_se;
    double expected_size = 0.0;
    double size_se = 0.0;
    // detection_cdf[t] = P(some sentinel infected by t); empty without sentinels.
    std::vector<double> detection_cdf;
    std::vector<double> detection_cdf_se;
    double detected_ever = 0.0;
};

// Simulations run in fixed blocks with one RNG stream per block, and all
// tallies are integer counts, so the estimate is identical for any thread count.
OracleEstimate mc_estimate(const Network& net, const OracleContext& ctx, std::int64_t n_sims,
                           std::uint64_t seed, int threads = 1);

// Sums over every bond configuration of the edges with 0 < p < 1 (and, for
// IndependentSeeds, every seed configuration of nodes with 0 < s < 1).
// Throws ConfigError when more than `max_bits` such variables exist.
OracleEstimate exact_enumerate(const Network& net, const OracleContext& ctx, int max_bits = 20);

} // namespace nmp
