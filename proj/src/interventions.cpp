#include "nmp/interventions.hpp"

#include "nmp/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace nmp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_indicator(const SeedVector& s) {
    const auto v = s.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || x == 1.0; });
}

// Seeding handed to the oracles for vaccination and sentinel runs.
SeedModel oracle_background(const Network& net, const InterventionSpec& spec) {
    if (spec.background) {
        if (!is_indicator(*spec.background)) return IndependentSeeds{*spec.background};
        std::vector<NodeId> seeds;
        for (NodeId v = 0; v < net.node_count(); ++v)
            if ((*spec.background)[v] == 1.0) seeds.push_back(v);
        return FixedSeeds{NodeSet(std::move(seeds))};
    }
    std::vector<NodeId> eligible;
    for (NodeId v = 0; v < net.node_count(); ++v)
        if (!spec.set.contains(v)) eligible.push_back(v);
    return UniformSingleSeed{NodeSet(std::move(eligible))};
}

SeedVector nmp_background(const Network& net, const InterventionSpec& spec) {
    if (spec.background) {
        if (static_cast<int>(spec.background->size()) != net.node_count())
            throw UsageError("background seed vector length != N");
        return *spec.background;
    }
    return SeedVector::uniform_excluding(net.node_count(), spec.set);
}

bool covers_everything(const Network& net, const InterventionSpec& spec) {
    return static_cast<int>(spec.set.size()) == net.node_count();
}

QualityReport from_oracle(const Network& net, const InterventionSpec& spec, const OracleEstimate& est) {
    QualityReport rep;
    rep.spec = spec;
    rep.marginals = est.marginals;
    switch (spec.kind) {
    case InterventionKind::Influence:
        rep.q = est.expected_size;
        rep.q_se = est.size_se;
        break;
    case InterventionKind::Vaccination:
        rep.q = -est.expected_size;
        rep.q_se = est.size_se;
        break;
    case InterventionKind::Sentinel: {
        rep.detection = est.detection_cdf;
        rep.q = quality_sentinel(rep.detection, diameter(net)).q;
        break;
    }
    }
    return rep;
}

OracleContext oracle_context(const Network& net, const InterventionSpec& spec, int horizon) {
    OracleContext ctx;
    ctx.horizon = horizon;
    switch (spec.kind) {
    case InterventionKind::Influence: ctx.seeds = FixedSeeds{spec.set}; break;
    case InterventionKind::Vaccination:
        ctx.seeds = oracle_background(net, spec);
        ctx.vaccinated = spec.set;
        break;
    case InterventionKind::Sentinel:
        ctx.seeds = oracle_background(net, spec);
        ctx.sentinels = spec.set;
        break;
    }
    return ctx;
}

} // namespace

std::string_view to_string(InterventionKind kind) {
    switch (kind) {
    case InterventionKind::Influence: return "influence";
    case InterventionKind::Vaccination: return "vaccination";
    case InterventionKind::Sentinel: return "sentinel";
    }
    return "?";
}

InterventionKind parse_intervention(std::string_view name) {
    if (name == "influence") return InterventionKind::Influence;
    if (name == "vaccination") return InterventionKind::Vaccination;
    if (name == "sentinel") return InterventionKind::Sentinel;
    throw ConfigError("unknown intervention '" + std::string(name) + "'");
}

void InterventionSpec::validate(int node_count) const {
    if (set.empty()) throw UsageError("intervention set is empty");
    set.check_bounds(node_count);
    if (background && static_cast<int>(background->size()) != node_count)
        throw UsageError("background seed vector length != N");
}

std::string Method::label() const {
    switch (kind) {
    case MethodKind::Nmp: return "nmp";
    case MethodKind::MonteCarlo: return "mc";
    case MethodKind::Exact: return "exact";
    }
    return "?";
}

double quality_influence(std::span<const double> final_marginals) {
    return std::accumulate(final_marginals.begin(), final_marginals.end(), 0.0);
}

double quality_vaccination(std::span<const double> final_marginals) {
    return -std::accumulate(final_marginals.begin(), final_marginals.end(), 0.0);
}

SentinelQuality quality_sentinel(std::span<const double> detection_cdf, int diameter) {
    SentinelQuality out;
    if (detection_cdf.empty()) {
        out.q = diameter;
        return out;
    }
    for (std::size_t t = 1; t < detection_cdf.size(); ++t)
        out.detection_mass += static_cast<double>(t) * (detection_cdf[t] - detection_cdf[t - 1]);
    out.detected = detection_cdf.back();
    out.q = (1.0 - out.detected) * diameter + out.detection_mass;
    return out;
}

std::vector<double> detection_probability(const MarginalHistory& hist, const NodeSet& sentinels) {
    std::vector<double> out(static_cast<std::size_t>(hist.horizon) + 1);
    for (int t = 0; t <= hist.horizon; ++t) {
        double miss = 1.0;
        for (NodeId s : sentinels) miss *= 1.0 - hist.at(s, t);
        out[t] = 1.0 - miss;
    }
    return out;
}

double error_eps(const QualityReport& estimate, const QualityReport& reference) {
    if (estimate.spec.kind != reference.spec.kind || estimate.spec.set != reference.spec.set)
        throw UsageError("error_eps needs reports for the same intervention");
    return estimate.q - reference.q;
}

std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw UsageError("kendall_tau: rankings differ in length");
    if (a.size() < 2) throw UsageError("kendall_tau: needs at least two items");
    double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) continue;
            if (da == 0.0) ties_a += 1;
            else if (db == 0.0) ties_b += 1;
            else if ((da > 0) == (db > 0)) concordant += 1;
            else discordant += 1;
        }
    }
    const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
    if (denom == 0.0) return std::nullopt;
    return (concordant - discordant) / denom;
}

std::optional<double> kendall_tau(const std::vector<std::pair<NodeSet, double>>& a,
                                  const std::vector<std::pair<NodeSet, double>>& b) {
    if (a.size() != b.size()) throw UsageError("kendall_tau: rankings cover different sets");
    auto sorted = [](std::vector<std::pair<NodeSet, double>> v) {
        std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        return v;
    };
    const auto sa = sorted(a), sb = sorted(b);
    std::vector<double> qa, qb;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (sa[i].first != sb[i].first) throw UsageError("kendall_tau: rankings cover different sets");
        if (i > 0 && sa[i].first == sa[i - 1].first) throw UsageError("kendall_tau: duplicate set");
        qa.push_back(sa[i].second);
        qb.push_back(sb[i].second);
    }
    return kendall_tau(qa, qb);
}

QualityReport evaluate_nmp(const Network& net, const InterventionSpec& spec, const EngineConfig& cfg,
                           const NmpModel* shared) {
    spec.validate(net.node_count());
    const auto start = Clock::now();
    QualityReport rep;
    rep.spec = spec;
    rep.method = {MethodKind::Nmp, cfg.radius, cfg.samples, 0};

    if (spec.kind != InterventionKind::Influence && covers_everything(net, spec)) {
        rep.q = spec.kind == InterventionKind::Vaccination ? 0.0 : diameter(net);
        rep.marginals.assign(static_cast<std::size_t>(net.node_count()), 0.0);
        rep.warning = "intervention covers every node; nothing left to seed";
        rep.runtime_ms = elapsed_ms(start);
        return rep;
    }

    NmpResult result;
    switch (spec.kind) {
    case InterventionKind::Influence: {
        const SeedVector s = SeedVector::indicator(net.node_count(), spec.set);
        result = shared ? shared->run(s) : NmpModel(net, cfg).run(s);
        break;
    }
    case InterventionKind::Vaccination: {
        const Network immunized = net.with_isolated(spec.set);
        const SeedVector s = nmp_background(net, spec);
        for (NodeId v : spec.set)
            if (s[v] > 0.0) throw UsageError("vaccinated node " + std::to_string(v) + " has seed mass");
        result = NmpModel(immunized, cfg).run(s);
        break;
    }
    case InterventionKind::Sentinel: {
        const SeedVector s = nmp_background(net, spec);
        result = NmpModel(net, cfg, spec.set).run(s);
        break;
    }
    }

    const SteadyState ss = steady_state(result.marginals, cfg.tol);
    rep.converged = ss.converged;
    if (!ss.converged) rep.warning = "marginals not converged at the horizon";
    rep.marginals = ss.pi;
    switch (spec.kind) {
    case InterventionKind::Influence: rep.q = quality_influence(rep.marginals); break;
    case InterventionKind::Vaccination: rep.q = quality_vaccination(rep.marginals); break;
    case InterventionKind::Sentinel:
        rep.detection = detection_probability(result.marginals, spec.set);
        rep.q = quality_sentinel(rep.detection, diameter(net)).q;
        break;
    }
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

QualityReport evaluate_mc(const Network& net, const InterventionSpec& spec, std::int64_t sims,
                          std::uint64_t seed, int horizon, int threads) {
    spec.validate(net.node_count());
    const auto start = Clock::now();
    QualityReport rep;
    if (spec.kind != InterventionKind::Influence && covers_everything(net, spec)) {
        rep.spec = spec;
        rep.q = spec.kind == InterventionKind::Vaccination ? 0.0 : diameter(net);
        rep.marginals.assign(static_cast<std::size_t>(net.node_count()), 0.0);
        rep.warning = "intervention covers every node; nothing left to seed";
    } else {
        rep = from_oracle(net, spec, mc_estimate(net, oracle_context(net, spec, horizon), sims, seed, threads));
    }
    rep.method = {MethodKind::MonteCarlo, 0, 0, sims};
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

QualityReport evaluate_exact(const Network& net, const InterventionSpec& spec, int horizon) {
    spec.validate(net.node_count());
    const auto start = Clock::now();
    QualityReport rep;
    if (spec.kind != InterventionKind::Influence && covers_everything(net, spec)) {
        rep.spec = spec;
        rep.q = spec.kind == InterventionKind::Vaccination ? 0.0 : diameter(net);
        rep.marginals.assign(static_cast<std::size_t>(net.node_count()), 0.0);
        rep.warning = "intervention covers every node; nothing left to seed";
    } else {
        rep = from_oracle(net, spec, exact_enumerate(net, oracle_context(net, spec, horizon)));
    }
    rep.method = {MethodKind::Exact, 0, 0, 0};
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

} // namespace nmp
