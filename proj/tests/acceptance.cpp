// Acceptance checks. One PASS/FAIL line per criterion; exit code 1 if any fails.
// Sweep rows and summaries are written to the working directory for regression.

#include "nmp/experiment.hpp"
#include "nmp/interventions.hpp"
#include "nmp/oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace nmp;
using namespace nmp::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int worker_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

EngineConfig exact_engine(int radius, std::optional<int> horizon) {
    EngineConfig cfg;
    cfg.radius = radius;
    cfg.sampler = SamplerKind::Exact;
    cfg.horizon = horizon;
    return cfg;
}

OracleEstimate exact_single_seed(const Network& net, NodeId seed, int horizon) {
    OracleContext ctx;
    ctx.seeds = FixedSeeds{NodeSet{seed}};
    ctx.horizon = horizon;
    return exact_enumerate(net, ctx);
}

void tree_exactness() {
    const auto t0 = Clock::now();
    StreamRng rng(derive_seed(2024, {1}));
    const int sizes[] = {6, 10, 14, 18, 21, 26, 32, 38, 44, 50};
    double worst = 0.0;
    int with_enumeration = 0;
    for (int n : sizes) {
        const Network tree = random_tree(n, rng, 0.05, 0.95);
        const auto seed = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        const SeedVector s = SeedVector::indicator(n, NodeSet{seed});
        std::vector<double> want(static_cast<std::size_t>(n));
        if (tree.edge_count() <= kMaxExactEdges) {
            want = exact_single_seed(tree, seed, n).marginals;
            ++with_enumeration;
        } else {
            for (NodeId i = 0; i < n; ++i) want[i] = tree_path_probability(tree, seed, i, n);
        }
        std::vector<std::vector<double>> got{classical_mp(tree, s, exact_engine(0, n)).marginals.final_values()};
        for (int r : {0, 1, 2, 4}) got.push_back(run_nmp(tree, s, exact_engine(r, n)).marginals.final_values());
        for (const auto& g : got)
            for (NodeId i = 0; i < n; ++i) worst = std::max(worst, std::abs(g[i] - want[i]));
    }
    const double secs = seconds_since(t0);
    report("tree-exactness", worst < 1e-9 && secs < 10.0,
           fmt("10 trees (%d enumerated, rest by path products), classical + NMP r=0,1,2,4; max |err| %.2e; %.2f s",
               with_enumeration, worst, secs));
}

void tiny_loop_exactness() {
    const auto t0 = Clock::now();
    const int horizon = 8;
    double worst = 0.0;
    for (double p : {0.2, 0.5, 0.8}) {
        const std::pair<Network, int> graphs[] = {
            {triangle(p), 1}, {cycle_graph(4, p), 2}, {bowtie(p), 4}, {complete_graph(4, p), 2}};
        for (const auto& [net, r] : graphs) {
            for (NodeId seed = 0; seed < net.node_count(); ++seed) {
                const auto want = exact_single_seed(net, seed, horizon);
                const auto got = run_nmp(net, SeedVector::indicator(net.node_count(), NodeSet{seed}),
                                         exact_engine(r, horizon));
                for (NodeId i = 0; i < net.node_count(); ++i) {
                    worst = std::max(worst, std::abs(got.marginals.final_values()[i] - want.marginals[i]));
                    for (int t = 0; t <= 4; ++t)
                        worst = std::max(worst, std::abs(got.marginals.at(i, t) - want.marginals_t[i][t]));
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    report("tiny-loop-exactness", worst < 1e-9 && secs < 10.0,
           fmt("triangle, C4, bowtie, K4 x p in {0.2,0.5,0.8}, every single seed; max |err| %.2e; %.2f s", worst,
               secs));
}

void radius_zero_reduction() {
    StreamRng rng(derive_seed(2024, {3}));
    double worst = 0.0;
    bool ids_match = true;
    for (int g = 0; g < 20; ++g) {
        const int n = 5 + static_cast<int>(rng.below(26));
        const Network net = random_loopy_graph(n, n / 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n))),
                                               rng, 0.05, 0.95);
        std::vector<double> s(static_cast<std::size_t>(n));
        for (auto& x : s) x = rng.uniform() < 0.3 ? rng.uniform() : 0.0;
        s[rng.below(static_cast<std::uint64_t>(n))] = 1.0;
        const SeedVector seeds(s);
        const auto a = classical_mp(net, seeds, exact_engine(0, 15));
        const auto b = run_nmp(net, seeds, exact_engine(0, 15));
        if (a.messages.ids != b.messages.ids) {
            ids_match = false;
            continue;
        }
        for (std::size_t m = 0; m < a.messages.ids.size(); ++m)
            for (int t = 0; t <= 15; ++t)
                worst = std::max(worst, std::abs(a.messages.values[m][t] - b.messages.values[m][t]));
        for (NodeId i = 0; i < n; ++i)
            for (int t = 0; t <= 15; ++t)
                worst = std::max(worst, std::abs(a.marginals.at(i, t) - b.marginals.at(i, t)));
    }
    report("r0-reduction", ids_match && worst <= 1e-12,
           fmt("20 random loopy graphs, 15 sweeps; max |diff| over messages and marginals %.2e", worst));
}

// r-hat for every non-focal node of one neighborhood.
std::vector<double> reach_estimates(const SampleSet& set, const NodeSet& nodes, NodeId focal) {
    std::vector<double> out;
    for (NodeId k : nodes)
        if (k != focal) out.push_back(estimate_reachability(set, k));
    return out;
}

void sampler_unbiasedness() {
    const auto t0 = Clock::now();
    const Network net = karate(0.15);
    const NeighborhoodCache cache(net, 1);
    const int reps = 50, m = 200;
    for (SamplerKind kind : {SamplerKind::Bfs, SamplerKind::NewmanZiff}) {
        int pairs = 0, inside = 0, hoods = 0;
        for (const auto& hood : cache.all()) {
            if (hood.edges.size() > static_cast<std::size_t>(kMaxExactEdges)) continue;
            ++hoods;
            const auto exact = reach_estimates(enumerate_exact(net, hood.edges, hood.focal), hood.nodes, hood.focal);
            std::vector<double> sum(exact.size(), 0.0), sq(exact.size(), 0.0);
            for (int rep = 0; rep < reps; ++rep) {
                StreamRng rng(derive_seed(4, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(hood.focal),
                                              static_cast<std::uint64_t>(rep)}));
                const SampleSet set = kind == SamplerKind::Bfs
                                          ? sample_bfs(net, hood.edges, hood.focal, m, rng)
                                          : sample_newman_ziff(net, hood.edges, hood.focal, m, rng, false);
                const auto est = reach_estimates(set, hood.nodes, hood.focal);
                for (std::size_t j = 0; j < est.size(); ++j) {
                    sum[j] += est[j];
                    sq[j] += est[j] * est[j];
                }
            }
            for (std::size_t j = 0; j < exact.size(); ++j) {
                const double mean = sum[j] / reps;
                const double var = std::max(0.0, (sq[j] - reps * mean * mean) / (reps - 1));
                const double se = std::sqrt(var / reps);
                ++pairs;
                if (std::abs(mean - exact[j]) <= 4 * se + 1e-12) ++inside;
            }
        }
        const double frac = static_cast<double>(inside) / pairs;
        const double secs = seconds_since(t0);
        report(kind == SamplerKind::Bfs ? "sampler-unbiasedness-bfs" : "sampler-unbiasedness-nz",
               frac >= 0.99 && secs < 300.0,
               fmt("karate r=1 p=0.15, %d neighborhoods, %d pairs, %.2f%% within 4 SE; %.1f s elapsed", hoods, pairs,
                   100.0 * frac, secs));
    }
}

// Upper tail of Binomial(n, 1/2).
double sign_test_p(int n, int successes) {
    double tail = 0.0;
    for (int k = successes; k <= n; ++k)
        tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    return tail;
}

void sampler_variance_ordering() {
    const Network net = karate(0.15);
    const NeighborhoodCache cache(net, 1);
    const int bfs_m = 200, repeats = 50, sets_per_repeat = 10;

    auto pass_time = [&](SamplerKind kind, int m, int trials) {
        std::vector<double> times;
        for (int trial = 0; trial < trials; ++trial) {
            const auto t0 = Clock::now();
            for (const auto& hood : cache.all()) {
                StreamRng rng(derive_seed(5, {99, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(hood.focal)}));
                if (kind == SamplerKind::Bfs)
                    (void)sample_bfs(net, hood.edges, hood.focal, m, rng);
                else
                    (void)sample_newman_ziff(net, hood.edges, hood.focal, m, rng, false);
            }
            times.push_back(seconds_since(t0));
        }
        return percentile(times, 0.5);
    };
    const double bfs_time = pass_time(SamplerKind::Bfs, bfs_m, 15);
    const double nz_sweep_time = pass_time(SamplerKind::NewmanZiff, 20, 15) / 20;
    const int nz_m = std::max(1, static_cast<int>(std::lround(bfs_time / nz_sweep_time)));

    // Mean over (i, j) of the std of r-hat across a batch of sample sets.
    auto mean_std = [&](SamplerKind kind, int m, int repeat) {
        double total = 0.0;
        int pairs = 0;
        for (const auto& hood : cache.all()) {
            std::vector<std::vector<double>> est;
            for (int b = 0; b < sets_per_repeat; ++b) {
                StreamRng rng(derive_seed(5, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(repeat),
                                              static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(hood.focal)}));
                const SampleSet set = kind == SamplerKind::Bfs
                                          ? sample_bfs(net, hood.edges, hood.focal, m, rng)
                                          : sample_newman_ziff(net, hood.edges, hood.focal, m, rng, false);
                est.push_back(reach_estimates(set, hood.nodes, hood.focal));
            }
            for (std::size_t j = 0; j < est[0].size(); ++j) {
                double mean = 0.0, var = 0.0;
                for (const auto& e : est) mean += e[j] / sets_per_repeat;
                for (const auto& e : est) var += (e[j] - mean) * (e[j] - mean) / (sets_per_repeat - 1);
                total += std::sqrt(var);
                ++pairs;
            }
        }
        return total / pairs;
    };
    int nz_larger = 0;
    double bfs_avg = 0.0, nz_avg = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
        const double b = mean_std(SamplerKind::Bfs, bfs_m, rep);
        const double z = mean_std(SamplerKind::NewmanZiff, nz_m, rep);
        bfs_avg += b / repeats;
        nz_avg += z / repeats;
        if (z > b) ++nz_larger;
    }
    const double pval = sign_test_p(repeats, nz_larger);
    report("sampler-variance-ordering", pval < 0.01,
           fmt("matched budget: BFS M=%d vs NZ %d sweeps (%.3g s per pass); mean std BFS %.4f, NZ %.4f; "
               "NZ larger in %d/%d repeats, one-sided sign test p=%.3g",
               bfs_m, nz_m, bfs_time, bfs_avg, nz_avg, nz_larger, repeats, pval));
}

const SummaryRow* find_summary(const Summary& sum, double p, int r) {
    for (const auto& row : sum.rows)
        if (std::abs(row.p - p) < 1e-9 && row.radius == r) return &row;
    return nullptr;
}

void influence_sweep() {
    const auto t0 = Clock::now();
    const Network net = karate(0.15);
    ExperimentConfig cfg;
    cfg.k = 1;
    cfg.p_values = {0.05, 0.10, 0.15, 0.25, 0.30, 0.35};
    cfg.radii = {0, 1, 2};
    cfg.samples = 1500;
    cfg.mc_sims = 100000;
    cfg.replicates = 20;
    cfg.threads = worker_threads();
    const auto rows = run_experiment(cfg, net);
    const double secs = seconds_since(t0);
    const Summary sum = summarize(rows);
    {
        std::ofstream out("acceptance_influence_k1_rows.csv");
        write_rows_header(out);
        write_rows(out, rows);
        std::ofstream s("acceptance_influence_k1_summary.csv");
        write_summary(s, sum);
    }
    for (const auto& row : sum.rows)
        std::printf("  p=%.2f r=%d mean_eps=%+.4f [%+.4f, %+.4f] ref_se=%.4f tau=%.3f\n", row.p, row.radius,
                    row.mean_eps, row.eps_lo, row.eps_hi, row.ref_se, row.tau.value_or(NAN));

    bool ok_i = true;
    std::string d_i;
    for (int r : {0, 1, 2}) {
        const auto* row = find_summary(sum, 0.10, r);
        const bool ok = row && std::abs(row->mean_eps) <= 2 * row->ref_se;
        ok_i = ok_i && ok;
        if (row) d_i += fmt(" r=%d: %+.4f vs 2SE %.4f;", r, row->mean_eps, 2 * row->ref_se);
    }
    report("error-onset-i", ok_i && secs < 1800.0, fmt("p=0.10 mean eps within 2 MC SE of 0 for all r:%s", d_i.c_str()));

    const auto* a0 = find_summary(sum, 0.25, 0);
    const auto* a1 = find_summary(sum, 0.25, 1);
    const auto* a2 = find_summary(sum, 0.25, 2);
    const bool ok_ii = a0 && a1 && a2 && std::abs(a0->mean_eps) > std::abs(a1->mean_eps) &&
                       std::abs(a1->mean_eps) > std::abs(a2->mean_eps);
    report("error-onset-ii", ok_ii,
           a0 && a1 && a2 ? fmt("p=0.25 |mean eps| by r=0,1,2: %.4f, %.4f, %.4f", std::abs(a0->mean_eps),
                                std::abs(a1->mean_eps), std::abs(a2->mean_eps))
                          : std::string("missing summary rows"));

    const auto* b30 = find_summary(sum, 0.30, 0);
    const auto* b10 = find_summary(sum, 0.10, 0);
    report("error-onset-iii", b30 && b10 && b30->mean_eps > b10->mean_eps,
           b30 && b10 ? fmt("r=0 mean eps p=0.30 %+.4f vs p=0.10 %+.4f; sweep took %.0f s", b30->mean_eps,
                            b10->mean_eps, secs)
                      : std::string("missing summary rows"));

    bool ok_tau = true;
    std::string d_tau;
    for (double p : {0.05, 0.10, 0.15}) {
        const auto* row = find_summary(sum, p, 1);
        const bool ok = row && row->tau && *row->tau >= 0.8;
        ok_tau = ok_tau && ok;
        if (row) d_tau += fmt(" p=%.2f: %.3f;", p, row->tau.value_or(NAN));
    }
    report("rank-agreement-below-threshold", ok_tau, fmt("tau(r=1) >= 0.8:%s", d_tau.c_str()));

    const auto* c35 = find_summary(sum, 0.35, 0);
    const auto* c15 = find_summary(sum, 0.15, 0);
    const bool ok_deg = c35 && c15 && c35->tau && c15->tau && *c35->tau < *c15->tau;
    report("rank-degradation-above-threshold", ok_deg,
           c35 && c15 ? fmt("r=0 tau p=0.35 %.3f vs p=0.15 %.3f", c35->tau.value_or(NAN), c15->tau.value_or(NAN))
                      : std::string("missing summary rows"));
}

void coreness_bias() {
    const auto t0 = Clock::now();
    const Network net = karate(0.3);
    ExperimentConfig cfg;
    cfg.k = 2;
    cfg.p_values = {0.30};
    cfg.radii = {1};
    cfg.samples = 1500;
    cfg.mc_sims = 100000;
    cfg.replicates = 5;
    cfg.threads = worker_threads();
    const auto rows = run_experiment(cfg, net);
    const auto points = coreness_scatter(rows);
    {
        std::ofstream out("acceptance_coreness_k2.csv");
        write_coreness(out, points);
    }
    std::vector<double> core, eps;
    for (const auto& pt : points) {
        core.push_back(pt.mean_coreness);
        eps.push_back(pt.eps);
    }
    const auto tau = kendall_tau(core, eps);
    report("coreness-bias-sign", tau && *tau < 0.0,
           fmt("karate p=0.30 k=2 r=1, %zu sets, %d replicates: tau(mean coreness, eps) = %.3f; %.0f s",
               points.size(), cfg.replicates, tau.value_or(NAN), seconds_since(t0)));
}

InterventionSpec sentinel_spec(NodeSet set, std::optional<SeedVector> background = {}) {
    InterventionSpec spec;
    spec.kind = InterventionKind::Sentinel;
    spec.set = std::move(set);
    spec.background = std::move(background);
    return spec;
}

void sentinel_machinery() {
    double worst_small = 0.0;
    struct Case {
        Network net;
        NodeSet sentinels;
        int radius;
    };
    std::vector<Case> cases;
    for (double p : {1.0, 0.5, 0.3}) cases.push_back({path_graph(3, p), NodeSet{2}, 0});
    for (double p : {0.5, 0.8}) cases.push_back({triangle(p), NodeSet{2}, 1});
    for (const auto& c : cases) {
        const auto spec = sentinel_spec(c.sentinels, SeedVector::indicator(c.net.node_count(), NodeSet{0}));
        const auto nmp = evaluate_nmp(c.net, spec, exact_engine(c.radius, 10));
        const auto ref = evaluate_exact(c.net, spec, 10);
        worst_small = std::max(worst_small, std::abs(nmp.q - ref.q));
    }

    const Network net = karate(0.15);
    EngineConfig cfg;
    cfg.radius = 1;
    cfg.samples = 1500;
    bool monotone = true;
    double worst_mc = 0.0;
    for (const NodeSet& set : {NodeSet{0}, NodeSet{33}, NodeSet{0, 33}, NodeSet{16}, NodeSet{5, 24}}) {
        const auto spec = sentinel_spec(set);
        const auto nmp = evaluate_nmp(net, spec, cfg);
        const auto mc = evaluate_mc(net, spec, 100000, derive_seed(9, {set.size()}), 34);
        for (std::size_t t = 0; t < nmp.detection.size(); ++t) {
            if (nmp.detection[t] > 1.0 || (t > 0 && nmp.detection[t] < nmp.detection[t - 1])) monotone = false;
        }
        for (std::size_t t = 0; t <= 3; ++t) worst_mc = std::max(worst_mc, std::abs(nmp.detection[t] - mc.detection[t]));
    }
    report("sentinel-machinery", worst_small < 1e-9 && monotone && worst_mc <= 0.05,
           fmt("path/triangle |Q_T nmp - exact| max %.2e; karate p=0.15 r=1: monotone and <= 1: %s, "
               "max |pi_S(t) - MC| for t <= 3: %.4f",
               worst_small, monotone ? "yes" : "no", worst_mc));
}

std::string rows_without_runtime(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    write_rows_header(out);
    write_rows(out, rows);
    std::istringstream in(out.str());
    std::string line, text;
    while (std::getline(in, line)) text += line.substr(0, line.rfind(',')) + '\n';
    return text;
}

void determinism() {
    const Network net = karate(0.2);
    bool same = true;
    int checked = 0;
    for (InterventionKind kind : {InterventionKind::Influence, InterventionKind::Vaccination, InterventionKind::Sentinel}) {
        ExperimentConfig cfg;
        cfg.intervention = kind;
        cfg.k = 1;
        cfg.p_values = {0.15, 0.3};
        cfg.radii = {0, 1};
        cfg.samples = 150;
        cfg.mc_sims = 3000;
        cfg.replicates = 2;
        cfg.master_seed = 31;
        std::string first;
        for (int threads : {1, 4, 2}) {
            cfg.threads = threads;
            const std::string text = rows_without_runtime(run_experiment(cfg, net));
            if (first.empty())
                first = text;
            else if (text != first)
                same = false;
            ++checked;
        }
    }
    report("determinism", same, fmt("%d runs across 3 interventions with 1, 4 and 2 threads; rows identical: %s",
                                    checked, same ? "yes" : "no"));
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void()>>> checks{
        {"tree-exactness", tree_exactness},
        {"tiny-loop-exactness", tiny_loop_exactness},
        {"r0-reduction", radius_zero_reduction},
        {"sampler-unbiasedness", sampler_unbiasedness},
        {"sampler-variance-ordering", sampler_variance_ordering},
        {"influence-sweep", influence_sweep},
        {"coreness-bias-sign", coreness_bias},
        {"sentinel-machinery", sentinel_machinery},
        {"determinism", determinism},
    };
    for (const auto& [name, fn] : checks) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(name, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
