#include "nmp/engine.hpp"
#include "nmp/errors.hpp"
#include "nmp/experiment.hpp"
#include "nmp/interventions.hpp"
#include "nmp/neighborhoods.hpp"
#include "nmp/network.hpp"
#include "nmp/oracle.hpp"
#include "nmp/percolation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace nmp;

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* stream = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file = std::make_unique<std::ofstream>(path);
        if (!*file) throw ConfigError("cannot open output file '" + path + "'");
        stream = file.get();
    }
    std::ostream& operator*() { return *stream; }
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Flags shared by the single-network subcommands.
struct GraphArgs {
    std::string graph;
    double p = 0.15;
    bool keep_file_p = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--graph", graph, "Edge list (u v [p] per line)")->required();
        cmd.add_option("--p", p, "Uniform transmission probability");
        cmd.add_flag("--file-p", keep_file_p, "Keep per-edge probabilities from the file");
    }
    Network load() const {
        Network net = load_edge_list_file(graph, p);
        return keep_file_p ? net : net.with_uniform_probability(p);
    }
};

struct EngineArgs {
    int radius = 1;
    int samples = 1500;
    int horizon = 0;
    std::string sampler = "bfs";
    std::uint64_t seed = 1;
    int threads = 1;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--r", radius, "Neighborhood radius");
        cmd.add_option("--samples", samples, "Percolation samples per neighborhood (M)");
        cmd.add_option("--horizon", horizon, "Number of sweeps (0: automatic)");
        cmd.add_option("--sampler", sampler, "bfs, nz or exact");
        cmd.add_option("--seed", seed, "Master seed");
        cmd.add_option("--threads", threads, "Worker threads");
    }
    EngineConfig config() const {
        EngineConfig cfg;
        cfg.radius = radius;
        cfg.samples = samples;
        if (horizon > 0) cfg.horizon = horizon;
        cfg.sampler = parse_sampler(sampler);
        cfg.master_seed = seed;
        cfg.threads = threads;
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neighborhood message passing for the independent cascade model"};
    app.require_subcommand(1);
    std::string out_path;
    app.add_option("--out", out_path, "Output file (default: stdout)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Sweep p and r over intervention sets, NMP against an oracle");
    std::string exp_graph, exp_intervention = "influence", exp_sets, exp_p = "0.15", exp_r = "1",
                exp_sampler = "bfs", exp_emit = "rows", exp_oracle = "mc";
    int exp_k = 0, exp_samples = 1500, exp_replicates = 20, exp_horizon = 0, exp_threads = 1;
    std::int64_t exp_mc = 100000;
    std::uint64_t exp_seed = 1;
    exp->add_option("--graph", exp_graph, "Edge list")->required();
    exp->add_option("--intervention", exp_intervention, "influence, vaccination or sentinel");
    exp->add_option("--k", exp_k, "Evaluate every set of this size");
    exp->add_option("--sets", exp_sets, "Explicit sets, e.g. \"0,1;2,3\"");
    exp->add_option("--p", exp_p, "Comma list or start:stop:step");
    exp->add_option("--r", exp_r, "Comma list of radii");
    exp->add_option("--samples", exp_samples, "Percolation samples per neighborhood (M)");
    exp->add_option("--mc-sims", exp_mc, "Monte Carlo cascades per set");
    exp->add_option("--replicates", exp_replicates, "Independent NMP sample sets");
    exp->add_option("--horizon", exp_horizon, "Number of sweeps (0: automatic)");
    exp->add_option("--sampler", exp_sampler, "bfs, nz or exact");
    exp->add_option("--oracle", exp_oracle, "mc or exact");
    exp->add_option("--seed", exp_seed, "Master seed");
    exp->add_option("--emit", exp_emit, "rows, summary, coreness or temporal");
    exp->add_option("--threads", exp_threads, "Worker threads");
    exp->add_option("--out", out_path, "Output file (default: stdout)");

    // marginals
    auto* marg = app.add_subcommand("marginals", "Run NMP and dump pi_i(t) as JSON");
    GraphArgs marg_graph;
    EngineArgs marg_engine;
    std::string marg_seeds;
    marg_graph.add_to(*marg);
    marg_engine.add_to(*marg);
    marg->add_option("--seeds", marg_seeds, "Seed nodes, e.g. \"0,5\"")->required();
    marg->add_option("--out", out_path, "Output file (default: stdout)");

    // neighborhoods
    auto* hood = app.add_subcommand("neighborhoods", "Neighborhood sizes as CSV");
    GraphArgs hood_graph;
    int hood_r = 1;
    hood_graph.add_to(*hood);
    hood->add_option("--r", hood_r, "Neighborhood radius");
    hood->add_option("--out", out_path, "Output file (default: stdout)");

    // samples
    auto* samp = app.add_subcommand("samples", "Reachability estimates for one neighborhood as JSON");
    GraphArgs samp_graph;
    int samp_node = 0, samp_r = 1, samp_m = 200;
    std::string samp_sampler = "bfs";
    std::uint64_t samp_seed = 1;
    samp_graph.add_to(*samp);
    samp->add_option("--node", samp_node, "Focal node");
    samp->add_option("--r", samp_r, "Neighborhood radius");
    samp->add_option("--samples", samp_m, "Samples (BFS) or sweeps (Newman-Ziff)");
    samp->add_option("--sampler", samp_sampler, "bfs, nz or exact");
    samp->add_option("--seed", samp_seed, "Seed");
    samp->add_option("--out", out_path, "Output file (default: stdout)");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Monte Carlo or exact marginals as CSV");
    GraphArgs orc_graph;
    std::string orc_seeds, orc_vaccinated, orc_sentinels, orc_method = "mc";
    std::int64_t orc_sims = 100000;
    std::uint64_t orc_seed = 1;
    int orc_horizon = 10, orc_threads = 1;
    orc_graph.add_to(*orc);
    orc->add_option("--seeds", orc_seeds, "Seed nodes (default: one uniform seed outside the vaccinated set)");
    orc->add_option("--vaccinated", orc_vaccinated, "Vaccinated nodes");
    orc->add_option("--sentinels", orc_sentinels, "Sentinel nodes");
    orc->add_option("--method", orc_method, "mc or exact");
    orc->add_option("--sims", orc_sims, "Monte Carlo cascades");
    orc->add_option("--seed", orc_seed, "Seed");
    orc->add_option("--horizon", orc_horizon, "Last time step reported");
    orc->add_option("--threads", orc_threads, "Worker threads");
    orc->add_option("--out", out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*exp) {
            ExperimentConfig cfg;
            cfg.graph = exp_graph;
            cfg.intervention = parse_intervention(exp_intervention);
            if (exp_k > 0) cfg.k = exp_k;
            if (!exp_sets.empty()) cfg.sets = parse_sets(exp_sets);
            cfg.p_values = parse_p_values(exp_p);
            cfg.radii = parse_int_list(exp_r);
            cfg.samples = exp_samples;
            cfg.mc_sims = exp_mc;
            cfg.replicates = exp_replicates;
            if (exp_horizon > 0) cfg.horizon = exp_horizon;
            cfg.sampler = parse_sampler(exp_sampler);
            cfg.oracle = parse_oracle(exp_oracle);
            cfg.master_seed = exp_seed;
            cfg.threads = exp_threads;
            const EmitKind emit = parse_emit(exp_emit);
            if (emit == EmitKind::Temporal && cfg.intervention != InterventionKind::Sentinel)
                throw ConfigError("--emit temporal needs --intervention sentinel");

            const Network net = load_edge_list_file(cfg.graph, cfg.p_values.front());
            cfg.validate(net);
            Output out(out_path);
            std::size_t unconverged = 0;
            if (emit == EmitKind::Rows) write_rows_header(*out);
            else if (emit == EmitKind::Temporal) write_temporal(*out, {});
            const auto rows = run_experiment(cfg, net, [&](std::span<const ResultRow> block) {
                for (const auto& r : block) unconverged += !r.converged;
                if (emit == EmitKind::Rows) write_rows(*out, block);
                if (emit == EmitKind::Temporal) {
                    std::ostringstream tmp;
                    write_temporal(tmp, block);
                    const std::string text = tmp.str();
                    // Drop the two header lines already written.
                    const auto body = text.find('\n', text.find('\n') + 1) + 1;
                    *out << text.substr(body);
                    (*out).flush();
                }
            });
            if (emit == EmitKind::Summary) {
                const Summary s = summarize(rows);
                for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
                write_summary(*out, s);
            } else if (emit == EmitKind::Coreness) {
                write_coreness(*out, coreness_scatter(rows));
            }
            if (unconverged > 0)
                std::cerr << "warning: " << unconverged << " NMP rows did not converge within the horizon\n";
        } else if (*marg) {
            const Network net = marg_graph.load();
            const EngineConfig cfg = marg_engine.config();
            const NodeSet seeds = parse_sets(marg_seeds).front();
            seeds.check_bounds(net.node_count());
            const NmpResult res = run_nmp(net, SeedVector::indicator(net.node_count(), seeds), cfg);
            Output out(out_path);
            write_history_json(*out, res.marginals);
        } else if (*hood) {
            const Network net = hood_graph.load();
            Output out(out_path);
            write_neighborhood_sizes(*out, NeighborhoodCache(net, hood_r));
        } else if (*samp) {
            const Network net = samp_graph.load();
            if (samp_node < 0 || samp_node >= net.node_count()) throw ConfigError("--node out of range");
            const Neighborhood nb = build_neighborhood(net, samp_node, samp_r);
            StreamRng rng(derive_seed(samp_seed, {static_cast<std::uint64_t>(samp_node)}));
            SampleSet set;
            switch (parse_sampler(samp_sampler)) {
            case SamplerKind::Bfs: set = sample_bfs(net, nb.edges, samp_node, samp_m, rng); break;
            case SamplerKind::NewmanZiff: set = sample_newman_ziff(net, nb.edges, samp_node, samp_m, rng, false); break;
            case SamplerKind::Exact: set = enumerate_exact(net, nb.edges, samp_node); break;
            }
            nlohmann::ordered_json doc;
            doc["focal"] = samp_node;
            doc["radius"] = samp_r;
            doc["sampler"] = std::string(to_string(set.sampler));
            doc["edges"] = nb.edges.size();
            doc["outcomes"] = set.samples.size();
            nlohmann::ordered_json reach = nlohmann::ordered_json::object();
            for (NodeId k : set.nodes)
                if (k != samp_node) reach[std::to_string(k)] = estimate_reachability(set, k);
            doc["reachability"] = reach;
            Output out(out_path);
            *out << doc.dump(2) << '\n';
        } else if (*orc) {
            const Network net = orc_graph.load();
            OracleContext ctx;
            ctx.horizon = orc_horizon;
            if (!orc_vaccinated.empty()) ctx.vaccinated = parse_sets(orc_vaccinated).front();
            if (!orc_sentinels.empty()) ctx.sentinels = parse_sets(orc_sentinels).front();
            ctx.vaccinated.check_bounds(net.node_count());
            ctx.sentinels.check_bounds(net.node_count());
            if (!orc_seeds.empty()) {
                NodeSet seeds = parse_sets(orc_seeds).front();
                seeds.check_bounds(net.node_count());
                ctx.seeds = FixedSeeds{seeds};
            } else {
                std::vector<NodeId> eligible;
                for (NodeId v = 0; v < net.node_count(); ++v)
                    if (!ctx.vaccinated.contains(v)) eligible.push_back(v);
                ctx.seeds = UniformSingleSeed{NodeSet(std::move(eligible))};
            }
            const OracleEstimate est = orc_method == "exact" ? exact_enumerate(net, ctx)
                                       : orc_method == "mc"
                                           ? mc_estimate(net, ctx, orc_sims, orc_seed, orc_threads)
                                           : throw ConfigError("unknown --method '" + orc_method + "'");
            Output out(out_path);
            *out << "node,pi,se\n";
            for (NodeId v = 0; v < net.node_count(); ++v)
                *out << v << ',' << fmt(est.marginals[v]) << ',' << fmt(est.marginal_se[v]) << '\n';
            if (!est.detection_cdf.empty()) {
                *out << "\nt,pi_s,se\n";
                for (std::size_t t = 0; t < est.detection_cdf.size(); ++t)
                    *out << t << ',' << fmt(est.detection_cdf[t]) << ',' << fmt(est.detection_cdf_se[t]) << '\n';
            }
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
