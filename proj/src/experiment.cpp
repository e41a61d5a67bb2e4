#include "nmp/experiment.hpp"

#include "nmp/errors.hpp"
#include "nmp/parallel.hpp"
#include "nmp/rng.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace nmp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxSets = 5'000'000;

std::string fmt(double x) {
    if (std::isnan(x)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : "NA"; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    for (std::size_t start = 0;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view s, std::string_view what) {
    s = trim(s);
    if (s == "NA") return kNaN;
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("cannot read " + std::string(what) + " from '" + std::string(s) + "'");
    return x;
}

long long to_integer(std::string_view s, std::string_view what) {
    s = trim(s);
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("cannot read " + std::string(what) + " from '" + std::string(s) + "'");
    return x;
}

std::uint64_t set_key(const NodeSet& set) {
    std::uint64_t h = mix64(set.size());
    for (NodeId v : set) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return h;
}

std::uint64_t p_key(double p) { return std::bit_cast<std::uint64_t>(p); }

int method_rank(std::string_view m) { return m == "nmp" ? 1 : 0; }

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

std::vector<NodeSet> resolve_sets(const ExperimentConfig& cfg, const Network& net) {
    return cfg.k ? enumerate_sets(net.node_count(), *cfg.k) : cfg.sets;
}

InterventionSpec spec_for(const ExperimentConfig& cfg, const NodeSet& set) {
    InterventionSpec spec;
    spec.kind = cfg.intervention;
    spec.set = set;
    return spec;
}

ResultRow row_from(const QualityReport& rep, double p, const std::vector<int>& core) {
    ResultRow row;
    row.intervention = rep.spec.kind;
    row.set = rep.spec.set;
    row.p = p;
    row.method = rep.method.label();
    row.q = rep.q;
    row.q_se = rep.q_se;
    row.mean_coreness = mean_coreness(core, rep.spec.set);
    row.converged = rep.converged;
    row.runtime_ms = rep.runtime_ms;
    row.detection = rep.detection;
    return row;
}

} // namespace

EmitKind parse_emit(std::string_view name) {
    if (name == "rows") return EmitKind::Rows;
    if (name == "summary") return EmitKind::Summary;
    if (name == "coreness") return EmitKind::Coreness;
    if (name == "temporal") return EmitKind::Temporal;
    throw ConfigError("unknown --emit value '" + std::string(name) + "'");
}

OracleKind parse_oracle(std::string_view name) {
    if (name == "mc") return OracleKind::MonteCarlo;
    if (name == "exact") return OracleKind::Exact;
    throw ConfigError("unknown oracle '" + std::string(name) + "'");
}

void ExperimentConfig::validate(const Network& net) const {
    const int n = net.node_count();
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (mc_sims < 1) throw ConfigError("mc-sims must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
    if (horizon && *horizon < 1) throw ConfigError("horizon must be >= 1");
    if (p_values.empty()) throw ConfigError("no p values");
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p = " + fmt(p) + " outside [0,1]");
    if (radii.empty()) throw ConfigError("no radii");
    for (int r : radii)
        if (r < 0 || r > kDefaultMaxRadius)
            throw ConfigError("radius " + std::to_string(r) + " outside [0," + std::to_string(kDefaultMaxRadius) + "]");
    if (k.has_value() == !sets.empty()) throw ConfigError("give exactly one of k or an explicit set list");
    if (k) {
        if (*k < 1) throw ConfigError("k must be >= 1");
        if (*k > n) throw ConfigError("k = " + std::to_string(*k) + " exceeds N = " + std::to_string(n));
        if (binomial(n, *k) > static_cast<double>(kMaxSets))
            throw ConfigError("C(" + std::to_string(n) + "," + std::to_string(*k) + ") sets is too many to enumerate");
    }
    for (const auto& s : sets) {
        if (s.empty()) throw ConfigError("empty intervention set");
        try {
            s.check_bounds(n);
        } catch (const UsageError& e) {
            throw ConfigError(e.what());
        }
    }
    if (oracle == OracleKind::Exact) {
        for (double p : p_values)
            if (p > 0.0 && p < 1.0 && net.edge_count() > kMaxExactEdges)
                throw ConfigError("exact oracle needs at most " + std::to_string(kMaxExactEdges) + " uncertain edges");
    }
    if (intervention == InterventionKind::Sentinel) diameter(net); // DomainError when disconnected
}

std::vector<double> parse_p_values(std::string_view text) {
    std::vector<double> out;
    const auto range = split(text, ':');
    if (range.size() == 3) {
        const double start = to_double(range[0], "p start"), stop = to_double(range[1], "p stop"),
                     step = to_double(range[2], "p step");
        if (!(step > 0.0) || stop < start) throw ConfigError("bad p range '" + std::string(text) + "'");
        for (int i = 0;; ++i) {
            const double p = start + i * step;
            if (p > stop + 1e-9 * step) break;
            out.push_back(std::round(p * 1e12) / 1e12);
        }
        return out;
    }
    if (range.size() != 1) throw ConfigError("bad p list '" + std::string(text) + "'");
    for (auto part : split(text, ',')) out.push_back(to_double(part, "p"));
    return out;
}

std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    for (auto part : split(text, ',')) out.push_back(static_cast<int>(to_integer(part, "integer")));
    return out;
}

std::vector<NodeSet> parse_sets(std::string_view text) {
    std::vector<NodeSet> out;
    for (auto part : split(text, ';')) {
        std::string members(trim(part));
        std::replace(members.begin(), members.end(), ',', ' ');
        std::istringstream in(members);
        std::vector<NodeId> ids;
        std::string tok;
        while (in >> tok) ids.push_back(static_cast<NodeId>(to_integer(tok, "node id")));
        if (ids.empty()) throw ConfigError("empty set in '" + std::string(text) + "'");
        try {
            out.emplace_back(std::move(ids));
        } catch (const UsageError& e) {
            throw ConfigError(e.what());
        }
    }
    return out;
}

std::vector<NodeSet> enumerate_sets(int n, int k) {
    std::vector<NodeSet> out;
    if (k < 1 || k > n) return out;
    std::vector<NodeId> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.emplace_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

bool row_less(const ResultRow& a, const ResultRow& b) {
    return std::tuple(a.p, a.set, method_rank(a.method), a.method, a.radius, a.replicate) <
           std::tuple(b.p, b.set, method_rank(b.method), b.method, b.radius, b.replicate);
}

double mean_coreness(const std::vector<int>& core, const NodeSet& set) {
    if (set.empty()) return 0.0;
    double sum = 0.0;
    for (NodeId v : set) sum += core[static_cast<std::size_t>(v)];
    return sum / static_cast<double>(set.size());
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw UsageError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

int sweep_horizon(const ExperimentConfig& cfg, const Network& net) {
    if (!cfg.horizon) return std::max(net.node_count(), 1);
    int lookback = 0;
    for (int r : cfg.radii) lookback = std::max(lookback, NeighborhoodCache(net, r).max_lookback());
    if (*cfg.horizon < lookback)
        throw ConfigError("horizon " + std::to_string(*cfg.horizon) + " is shorter than the neighborhood lookback " +
                          std::to_string(lookback));
    return *cfg.horizon;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Network& net, const RowBlockSink& sink) {
    cfg.validate(net);
    const int horizon = sweep_horizon(cfg, net);
    const auto sets = resolve_sets(cfg, net);
    const auto core = coreness(net);
    const bool shared_model = cfg.intervention == InterventionKind::Influence;

    struct NmpJob {
        int radius;
        int replicate;
        std::size_t set; // ignored with a shared model
    };

    std::vector<ResultRow> all;
    for (double p : cfg.p_values) {
        const Network net_p = net.with_uniform_probability(p);
        std::vector<NmpJob> jobs;
        for (int r : cfg.radii)
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                if (shared_model) jobs.push_back({r, rep, 0});
                else
                    for (std::size_t s = 0; s < sets.size(); ++s) jobs.push_back({r, rep, s});
            }

        std::vector<std::vector<ResultRow>> nmp_out(jobs.size());
        parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
            const NmpJob& job = jobs[j];
            EngineConfig ecfg;
            ecfg.radius = job.radius;
            ecfg.samples = cfg.samples;
            ecfg.horizon = cfg.horizon;
            ecfg.tol = cfg.tol;
            ecfg.sampler = cfg.sampler;
            ecfg.master_seed = derive_seed(cfg.master_seed,
                                           {1, p_key(p), static_cast<std::uint64_t>(job.radius),
                                            static_cast<std::uint64_t>(job.replicate)});
            auto emit = [&](const QualityReport& rep) {
                ResultRow row = row_from(rep, p, core);
                row.radius = job.radius;
                row.samples = cfg.samples;
                row.replicate = job.replicate;
                row.q_se = kNaN;
                nmp_out[j].push_back(std::move(row));
            };
            if (shared_model) {
                const NmpModel model(net_p, ecfg);
                for (const auto& s : sets) emit(evaluate_nmp(net_p, spec_for(cfg, s), ecfg, &model));
            } else {
                emit(evaluate_nmp(net_p, spec_for(cfg, sets[job.set]), ecfg));
            }
        });

        std::vector<ResultRow> oracle_out(sets.size());
        parallel_for(sets.size(), cfg.threads, [&](std::size_t s) {
            const InterventionSpec spec = spec_for(cfg, sets[s]);
            const QualityReport rep =
                cfg.oracle == OracleKind::Exact
                    ? evaluate_exact(net_p, spec, horizon)
                    : evaluate_mc(net_p, spec, cfg.mc_sims, derive_seed(cfg.master_seed, {2, p_key(p), set_key(sets[s])}),
                                  horizon);
            oracle_out[s] = row_from(rep, p, core);
            if (cfg.intervention == InterventionKind::Sentinel && cfg.oracle == OracleKind::MonteCarlo)
                oracle_out[s].q_se = kNaN;
        });

        std::vector<ResultRow> block;
        for (auto& v : nmp_out)
            for (auto& row : v) block.push_back(std::move(row));
        for (auto& row : oracle_out) block.push_back(std::move(row));
        std::sort(block.begin(), block.end(), row_less);
        if (sink) sink(block);
        for (auto& row : block) all.push_back(std::move(row));
    }
    return all;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RowBlockSink& sink) {
    return run_experiment(cfg, load_edge_list_file(cfg.graph, cfg.p_values.empty() ? 0.0 : cfg.p_values.front()), sink);
}

void write_rows_header(std::ostream& out) {
    out << kRowsSchema << '\n'
        << "intervention,set,p,r,M,method,replicate,Q,q_se,mean_coreness,converged,runtime_ms\n";
}

void write_rows(std::ostream& out, std::span<const ResultRow> rows) {
    for (const auto& r : rows) {
        out << to_string(r.intervention) << ',' << r.set.to_string() << ',' << fmt(r.p) << ','
            << (r.radius < 0 ? "NA" : std::to_string(r.radius)) << ','
            << (r.samples <= 0 ? "NA" : std::to_string(r.samples)) << ',' << r.method << ',' << r.replicate << ','
            << fmt(r.q) << ',' << fmt(r.q_se) << ',' << fmt(r.mean_coreness) << ',' << (r.converged ? 1 : 0) << ','
            << fmt(r.runtime_ms) << '\n';
    }
    out.flush();
}

std::vector<ResultRow> read_rows(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("intervention,", 0) == 0) continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 12) throw ConfigError("row has " + std::to_string(f.size()) + " fields, expected 12");
        ResultRow r;
        r.intervention = parse_intervention(trim(f[0]));
        r.set = parse_sets(f[1]).front();
        r.p = to_double(f[2], "p");
        r.radius = trim(f[3]) == "NA" ? -1 : static_cast<int>(to_integer(f[3], "r"));
        r.samples = trim(f[4]) == "NA" ? 0 : static_cast<int>(to_integer(f[4], "M"));
        r.method = std::string(trim(f[5]));
        r.replicate = static_cast<int>(to_integer(f[6], "replicate"));
        r.q = to_double(f[7], "Q");
        r.q_se = to_double(f[8], "q_se");
        r.mean_coreness = to_double(f[9], "mean_coreness");
        r.converged = to_integer(f[10], "converged") != 0;
        r.runtime_ms = to_double(f[11], "runtime_ms");
        rows.push_back(std::move(r));
    }
    return rows;
}

Summary summarize(std::span<const ResultRow> rows) {
    using RefKey = std::tuple<InterventionKind, double, NodeSet>;
    using GroupKey = std::tuple<InterventionKind, int, double, int>;
    std::map<RefKey, const ResultRow*> ref;
    std::map<GroupKey, std::map<int, std::vector<const ResultRow*>>> groups;
    Summary out;

    for (const auto& r : rows) {
        if (r.is_oracle()) {
            if (!ref.emplace(RefKey{r.intervention, r.p, r.set}, &r).second)
                out.warnings.push_back("duplicate oracle row for set {" + r.set.to_string() + "} at p=" + fmt(r.p));
        } else {
            groups[GroupKey{r.intervention, static_cast<int>(r.set.size()), r.p, r.radius}][r.replicate].push_back(&r);
        }
    }

    for (const auto& [key, by_rep] : groups) {
        const auto& [kind, k, p, radius] = key;
        SummaryRow s;
        s.intervention = kind;
        s.k = k;
        s.p = p;
        s.radius = radius;

        std::vector<double> rep_eps, rep_tau;
        std::map<NodeSet, const ResultRow*> used_refs;
        for (const auto& [rep, members] : by_rep) {
            std::vector<double> q_nmp, q_ref;
            for (const ResultRow* row : members) {
                const auto it = ref.find(RefKey{kind, p, row->set});
                if (it == ref.end()) {
                    out.warnings.push_back("no oracle row for set {" + row->set.to_string() + "} at p=" + fmt(p) +
                                           ", r=" + std::to_string(radius) + ", replicate " + std::to_string(rep));
                    continue;
                }
                q_nmp.push_back(row->q);
                q_ref.push_back(it->second->q);
                used_refs.emplace(row->set, it->second);
            }
            if (q_nmp.empty()) continue;
            double eps = 0.0;
            for (std::size_t i = 0; i < q_nmp.size(); ++i) eps += q_nmp[i] - q_ref[i];
            rep_eps.push_back(eps / static_cast<double>(q_nmp.size()));
            if (q_nmp.size() >= 2)
                if (auto tau = kendall_tau(q_nmp, q_ref)) rep_tau.push_back(*tau);
        }
        if (rep_eps.empty()) continue;

        s.sets = static_cast<int>(used_refs.size());
        s.replicates = static_cast<int>(rep_eps.size());
        s.mean_eps = std::accumulate(rep_eps.begin(), rep_eps.end(), 0.0) / static_cast<double>(rep_eps.size());
        s.eps_lo = percentile(rep_eps, 0.025);
        s.eps_hi = percentile(rep_eps, 0.975);
        double q_sum = 0.0, var_sum = 0.0;
        for (const auto& [set, row] : used_refs) {
            q_sum += row->q;
            var_sum += row->q_se * row->q_se;
        }
        const auto n_sets = static_cast<double>(used_refs.size());
        s.ref_mean_q = q_sum / n_sets;
        s.ref_se = std::sqrt(var_sum) / n_sets;
        if (!rep_tau.empty()) {
            s.tau = std::accumulate(rep_tau.begin(), rep_tau.end(), 0.0) / static_cast<double>(rep_tau.size());
            s.tau_lo = percentile(rep_tau, 0.025);
            s.tau_hi = percentile(rep_tau, 0.975);
        }
        out.rows.push_back(s);
    }
    return out;
}

void write_summary(std::ostream& out, const Summary& summary) {
    out << kSummarySchema << '\n'
        << "# p_c=" << fmt(kKarateCriticalP) << '\n'
        << "intervention,k,p,r,sets,replicates,mean_eps,eps_lo,eps_hi,ref_mean_q,ref_se,tau,tau_lo,tau_hi\n";
    for (const auto& s : summary.rows) {
        out << to_string(s.intervention) << ',' << s.k << ',' << fmt(s.p) << ',' << s.radius << ',' << s.sets << ','
            << s.replicates << ',' << fmt(s.mean_eps) << ',' << fmt(s.eps_lo) << ',' << fmt(s.eps_hi) << ','
            << fmt(s.ref_mean_q) << ',' << fmt(s.ref_se) << ',' << fmt(s.tau) << ',' << fmt(s.tau_lo) << ','
            << fmt(s.tau_hi) << '\n';
    }
    out.flush();
}

std::vector<CorenessPoint> coreness_scatter(std::span<const ResultRow> rows) {
    using RefKey = std::tuple<InterventionKind, double, NodeSet>;
    using Key = std::tuple<InterventionKind, double, int, NodeSet>;
    std::map<RefKey, const ResultRow*> ref;
    std::map<Key, std::vector<const ResultRow*>> nmp;
    for (const auto& r : rows) {
        if (r.is_oracle()) ref.emplace(RefKey{r.intervention, r.p, r.set}, &r);
        else nmp[Key{r.intervention, r.p, r.radius, r.set}].push_back(&r);
    }
    std::vector<CorenessPoint> out;
    for (const auto& [key, members] : nmp) {
        const auto& [kind, p, radius, set] = key;
        const auto it = ref.find(RefKey{kind, p, set});
        if (it == ref.end()) continue;
        CorenessPoint pt;
        pt.intervention = kind;
        pt.set = set;
        pt.p = p;
        pt.radius = radius;
        pt.mean_coreness = members.front()->mean_coreness;
        for (const ResultRow* r : members) pt.q_nmp += r->q;
        pt.q_nmp /= static_cast<double>(members.size());
        pt.q_ref = it->second->q;
        pt.eps = pt.q_nmp - pt.q_ref;
        out.push_back(std::move(pt));
    }
    return out;
}

void write_coreness(std::ostream& out, std::span<const CorenessPoint> points) {
    out << kCorenessSchema << '\n' << "intervention,set,p,r,mean_coreness,q_nmp,q_ref,eps\n";
    for (const auto& pt : points) {
        out << to_string(pt.intervention) << ',' << pt.set.to_string() << ',' << fmt(pt.p) << ',' << pt.radius << ','
            << fmt(pt.mean_coreness) << ',' << fmt(pt.q_nmp) << ',' << fmt(pt.q_ref) << ',' << fmt(pt.eps) << '\n';
    }
    out.flush();
}

void write_temporal(std::ostream& out, std::span<const ResultRow> rows) {
    out << kTemporalSchema << '\n' << "intervention,set,p,r,method,replicate,t,pi_s\n";
    for (const auto& r : rows) {
        for (std::size_t t = 0; t < r.detection.size(); ++t) {
            out << to_string(r.intervention) << ',' << r.set.to_string() << ',' << fmt(r.p) << ','
                << (r.radius < 0 ? "NA" : std::to_string(r.radius)) << ',' << r.method << ',' << r.replicate << ','
                << t << ',' << fmt(r.detection[t]) << '\n';
        }
    }
    out.flush();
}

} // namespace nmp
