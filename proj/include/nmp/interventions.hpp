#pragma once

#include "nmp/engine.hpp"
#include "nmp/network.hpp"
#include "nmp/oracle.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nmp {

enum class InterventionKind { Influence, Vaccination, Sentinel };

std::string_view to_string(InterventionKind kind);
InterventionKind parse_intervention(std::string_view name);

struct InterventionSpec {
    InterventionKind kind = InterventionKind::Influence;
    NodeSet set;
    // Seeding for vaccination and sentinel runs. Unset: the NMP engine gets
    // s_i = 1/(N - |S|) outside S, the oracles one uniform seed outside S.
    std::optional<SeedVector> background;

    // Throws UsageError on an empty set or out-of-range ids.
    void validate(int node_count) const;
};

enum class MethodKind { Nmp, MonteCarlo, Exact };

struct Method {
    MethodKind kind = MethodKind::Nmp;
    int radius = 0;
    int samples = 0;
    std::int64_t sims = 0;

    std::string label() const; // "nmp", "mc" or "exact"
};

struct QualityReport {
    InterventionSpec spec;
    Method method;
    double q = 0.0;
    double q_se = 0.0;
    std::vector<double> marginals; // final per-node values
    std::vector<double> detection; // pi_S(t), t = 0..T; sentinels only
    bool converged = true;
    double runtime_ms = 0.0;
    std::string warning;
};

// Q_I = sum_i pi_i.
double quality_influence(std::span<const double> final_marginals);
// Q_V = -sum_i pi_i.
double quality_vaccination(std::span<const double> final_marginals);

struct SentinelQuality {
    double q = 0.0;
    double detected = 0.0;      // pi_S(T)
    double detection_mass = 0.0; // sum_t t [pi_S(t) - pi_S(t-1)]
};

// Expected detection time with the diameter charged to cascades never seen
// by T: (1 - pi_S(T)) D + sum_{t=1..T} t [pi_S(t) - pi_S(t-1)]. Lower is better.
SentinelQuality quality_sentinel(std::span<const double> detection_cdf, int diameter);

// pi_S(t) = 1 - prod_{i in S} (1 - pi_i(t)).
std::vector<double> detection_probability(const MarginalHistory& hist, const NodeSet& sentinels);

// Q(S) - Q*(S). Throws UsageError if the two reports describe different interventions.
double error_eps(const QualityReport& estimate, const QualityReport& reference);

// Tie-corrected Kendall tau-b. Throws UsageError for fewer than two items or
// mismatched lengths; nullopt when either side is constant.
std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b);
// Pairs items by set; both rankings must cover the same sets.
std::optional<double> kendall_tau(const std::vector<std::pair<NodeSet, double>>& a,
                                  const std::vector<std::pair<NodeSet, double>>& b);

// Engine adapters. `shared` may be a prebuilt model on `net` (influence only;
// vaccination and sentinel runs change the sampled network).
QualityReport evaluate_nmp(const Network& net, const InterventionSpec& spec, const EngineConfig& cfg,
                           const NmpModel* shared = nullptr);
QualityReport evaluate_mc(const Network& net, const InterventionSpec& spec, std::int64_t sims,
                          std::uint64_t seed, int horizon, int threads = 1);
QualityReport evaluate_exact(const Network& net, const InterventionSpec& spec, int horizon);

} // namespace nmp
