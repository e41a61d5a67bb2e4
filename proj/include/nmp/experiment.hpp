#pragma once

#include "nmp/interventions.hpp"
#include "nmp/network.hpp"
#include "nmp/percolation.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nmp {

// Percolation threshold of the karate club under classical message passing.
// Written into summary headers as a plotting reference only.
inline constexpr double kKarateCriticalP = 0.189;

inline constexpr std::string_view kRowsSchema = "# nmp-rows v1";
inline constexpr std::string_view kSummarySchema = "# nmp-summary v1";
inline constexpr std::string_view kCorenessSchema = "# nmp-coreness v1";
inline constexpr std::string_view kTemporalSchema = "# nmp-temporal v1";

enum class OracleKind { MonteCarlo, Exact };
enum class EmitKind { Rows, Summary, Coreness, Temporal };

EmitKind parse_emit(std::string_view name);
OracleKind parse_oracle(std::string_view name);

struct ExperimentConfig {
    std::string graph; // edge-list path; unused when a Network is passed directly
    InterventionKind intervention = InterventionKind::Influence;
    std::optional<int> k;      // enumerate every set of this size...
    std::vector<NodeSet> sets; // ...or evaluate exactly these
    std::vector<double> p_values{0.15};
    std::vector<int> radii{1};
    int samples = 1500;
    std::int64_t mc_sims = 100000;
    int replicates = 20;
    std::optional<int> horizon; // unset: NMP sweeps to convergence
    SamplerKind sampler = SamplerKind::Bfs;
    std::uint64_t master_seed = 1;
    int threads = 1;
    double tol = 1e-4;
    OracleKind oracle = OracleKind::MonteCarlo;

    // Throws ConfigError for anything that cannot run on `net` (k > N,
    // bad ranges, exact oracle on too many uncertain edges, ...).
    void validate(const Network& net) const;
};

// "0.05,0.1" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_p_values(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);
// Sets separated by ';', members by ',' or whitespace: "0,1;2,3".
std::vector<NodeSet> parse_sets(std::string_view text);

// Every k-subset of [0, n) in lexicographic order.
std::vector<NodeSet> enumerate_sets(int n, int k);

struct ResultRow {
    InterventionKind intervention = InterventionKind::Influence;
    NodeSet set;
    double p = 0.0;
    int radius = -1;  // -1 for oracle rows
    int samples = 0;  // 0 for oracle rows
    std::string method; // "nmp", "mc" or "exact"
    int replicate = 0;
    double q = 0.0;
    double q_se = 0.0; // NaN when not estimated
    double mean_coreness = 0.0;
    bool converged = true;
    double runtime_ms = 0.0;
    std::vector<double> detection; // pi_S(t), sentinel runs only

    bool is_oracle() const { return method != "nmp"; }
};

// Canonical row order: p, set, method (oracle first), radius, replicate.
bool row_less(const ResultRow& a, const ResultRow& b);

using RowBlockSink = std::function<void(std::span<const ResultRow>)>;

// Evaluates every (set, p, r, replicate) with NMP and every (set, p) with the
// oracle. Rows for one p are sorted and handed to `sink` before the next p
// starts. The result does not depend on cfg.threads.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Network& net,
                                      const RowBlockSink& sink = {});
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RowBlockSink& sink = {});

// Horizon for the oracles: cfg.horizon, or N (no cascade runs longer).
// Throws ConfigError when cfg.horizon is shorter than a neighborhood lookback.
int sweep_horizon(const ExperimentConfig& cfg, const Network& net);

void write_rows_header(std::ostream& out);
void write_rows(std::ostream& out, std::span<const ResultRow> rows);
// Reads what write_rows wrote (detection curves are not part of the format).
std::vector<ResultRow> read_rows(std::istream& in);

struct SummaryRow {
    InterventionKind intervention = InterventionKind::Influence;
    int k = 0;
    double p = 0.0;
    int radius = 0;
    int sets = 0;
    int replicates = 0;
    double mean_eps = 0.0;
    double eps_lo = 0.0; // 2.5th percentile over replicates
    double eps_hi = 0.0; // 97.5th percentile over replicates
    double ref_mean_q = 0.0;
    double ref_se = 0.0; // standard error of the mean oracle Q over sets
    std::optional<double> tau; // mean over replicates with a defined tau
    std::optional<double> tau_lo;
    std::optional<double> tau_hi;
};

struct Summary {
    std::vector<SummaryRow> rows;
    std::vector<std::string> warnings; // unmatched rows that were skipped
};

// Per (intervention, k, p, r): the mean over sets of eps(S) = Q_nmp - Q_ref
// is formed per replicate, then averaged and banded across replicates.
// Kendall tau compares each replicate's ranking with the oracle ranking.
Summary summarize(std::span<const ResultRow> rows);
void write_summary(std::ostream& out, const Summary& summary);

struct CorenessPoint {
    InterventionKind intervention = InterventionKind::Influence;
    NodeSet set;
    double p = 0.0;
    int radius = 0;
    double mean_coreness = 0.0;
    double q_nmp = 0.0; // mean over replicates
    double q_ref = 0.0;
    double eps = 0.0;
};

std::vector<CorenessPoint> coreness_scatter(std::span<const ResultRow> rows);
void write_coreness(std::ostream& out, std::span<const CorenessPoint> points);

// Long format: one line per (row, t) with pi_S(t). Sentinel rows only.
void write_temporal(std::ostream& out, std::span<const ResultRow> rows);

// Mean core number of the members of `set`.
double mean_coreness(const std::vector<int>& core, const NodeSet& set);

// Linear-interpolation percentile, q in [0, 1]. Throws UsageError on empty input.
double percentile(std::vector<double> values, double q);

} // namespace nmp
