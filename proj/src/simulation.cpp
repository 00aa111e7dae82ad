#include "contextua/simulation.hpp"

#include "contextua/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace contextua {

namespace {

std::string describe_run(const Scenario& sc, const Run& run) {
    std::ostringstream os;
    for (std::size_t k = 0; k < run.size(); ++k) {
        if (k) os << " | ";
        os << "{";
        for (std::size_t i = 0; i < run[k].domain.size(); ++i) {
            MeasurementId x = run[k].domain[i];
            if (i) os << ", ";
            os << sc.label(x) << "=" << sc.outcome_labels(x)[run[k].values[i]];
        }
        os << "}";
    }
    return os.str();
}

}  // namespace

DeterministicSimulation::DeterministicSimulation(ScenarioPtr source, ScenarioPtr target, int rounds, Route f,
                                                 Translate g, std::optional<DependencySets> declared)
    : source_(std::move(source)), target_(std::move(target)), rounds_(rounds), f_(std::move(f)), g_(std::move(g)),
      declared_(std::move(declared)) {
    require(source_ && target_, ErrorCode::InvalidArgument, "simulation needs source and target scenarios");
    require(rounds_ >= 1, ErrorCode::InvalidArgument, "simulation needs at least one round");
    if (declared_) {
        require(target_->is_multipartite() && source_->is_multipartite(), ErrorCode::InvalidArgument,
                "dependency sets need multipartite scenarios");
        for (const auto* sets : {&declared_->in, &declared_->out}) {
            require(sets->size() == static_cast<std::size_t>(rounds_), ErrorCode::InvalidArgument,
                    "dependency sets need one entry per round");
            for (const auto& per_round : *sets)
                require(per_round.size() == target_->site_count(), ErrorCode::InvalidArgument,
                        "dependency sets need one entry per target site");
        }
    }
}

DeterministicSimulation DeterministicSimulation::identity(ScenarioPtr scenario) {
    std::optional<DependencySets> declared;
    if (scenario->is_multipartite()) {
        DependencySets d;
        std::vector<std::vector<std::size_t>> own(scenario->site_count());
        for (std::size_t i = 0; i < own.size(); ++i) own[i] = {i};
        d.in = {own};
        d.out = {own};
        declared = d;
    }
    return DeterministicSimulation(
        scenario, scenario, 1, [](MeasurementId y, const Run&) { return Context{y}; },
        [](MeasurementId, const Run& run) { return run.front().values.front(); }, declared);
}

DeterministicSimulation DeterministicSimulation::from_tables(ScenarioPtr source, ScenarioPtr target,
                                                             std::vector<MeasurementProtocol> f,
                                                             std::vector<std::vector<Outcome>> g) {
    require(f.size() == target->size() && g.size() == target->size(), ErrorCode::InvalidArgument,
            "need one protocol and one outcome table per target measurement");
    int rounds = f.empty() ? 1 : f.front().rounds();
    for (std::size_t y = 0; y < f.size(); ++y) {
        require(f[y].rounds() == rounds, ErrorCode::InvalidArgument, "protocols must share a round count");
        auto report = validate_protocol(f[y], *source);
        require(report.ok, ErrorCode::ProtocolMismatch, report.message);
        require(g[y].size() == f[y].run_count(), ErrorCode::InvalidArgument,
                "outcome table size differs from the protocol's run count");
        for (Outcome o : g[y])
            require(o < target->outcome_count(static_cast<MeasurementId>(y)), ErrorCode::InvalidArgument,
                    "outcome table value out of range");
    }
    auto fs = std::make_shared<std::vector<MeasurementProtocol>>(std::move(f));
    auto gs = std::make_shared<std::vector<std::vector<Outcome>>>(std::move(g));
    auto src = source;
    return DeterministicSimulation(
        source, target, rounds,
        [fs, src](MeasurementId y, const Run& prefix) {
            return (*fs)[y].context_at(static_cast<int>(prefix.size()) + 1, prefix, *src);
        },
        [fs, gs, src](MeasurementId y, const Run& run) { return (*gs)[y][(*fs)[y].run_index(run, *src)]; });
}

MeasurementProtocol DeterministicSimulation::protocol(MeasurementId y) const {
    return MeasurementProtocol::build(rounds_, *source_, [&](const Run& prefix) { return f_(y, prefix); });
}

Run DeterministicSimulation::project(MeasurementId y, const Run& block) const {
    Run own;
    own.reserve(block.size());
    for (const auto& s : block) {
        Context c = f_(y, own);
        require(context_subset(c, s.domain), ErrorCode::ProtocolMismatch,
                "joint run does not contain the routed context of " + target_->label(y));
        own.push_back(restrict_section(s, c));
    }
    return own;
}

MeasurementProtocol DeterministicSimulation::context_protocol(const Context& c) const {
    std::vector<MeasurementProtocol> parts;
    for (MeasurementId y : c) parts.push_back(protocol(y));
    if (parts.empty()) return MeasurementProtocol::empty(rounds_, *source_);
    return parallel_product(parts, *source_);
}

MeasurementProtocol DeterministicSimulation::compose(const MeasurementProtocol& target_protocol) const {
    const auto n = static_cast<std::size_t>(rounds_);
    auto rule = [&](const Run& prefix) {
        std::size_t block = prefix.size() / n;
        Run target_prefix;
        for (std::size_t b = 0; b < block; ++b) {
            Context c = target_protocol.context_at(static_cast<int>(b) + 1, target_prefix, *target_);
            Run joint(prefix.begin() + static_cast<long>(b * n), prefix.begin() + static_cast<long>((b + 1) * n));
            LocalSection s{c, {}};
            for (MeasurementId y : c) s.values.push_back(g_(y, project(y, joint)));
            target_prefix.push_back(std::move(s));
        }
        Context c = target_protocol.context_at(static_cast<int>(block) + 1, target_prefix, *target_);
        Run partial(prefix.begin() + static_cast<long>(block * n), prefix.end());
        Context out;
        for (MeasurementId y : c) {
            Context part = f_(y, project(y, partial));
            require(contexts_disjoint(out, part), ErrorCode::IncompatibleProtocols,
                    "translations within one target context share a source measurement");
            out = context_union(out, part);
        }
        return out;
    };
    MeasurementProtocol composed = MeasurementProtocol::build(target_protocol.rounds() * rounds_, *source_, rule);
    auto report = validate_protocol(composed, *source_);
    require(report.ok, ErrorCode::IncompatibleProtocols, report.message);
    return composed;
}

Run DeterministicSimulation::translate_run(const MeasurementProtocol& target_protocol, const Run& source_run) const {
    const auto n = static_cast<std::size_t>(rounds_);
    require(source_run.size() == n * static_cast<std::size_t>(target_protocol.rounds()), ErrorCode::ProtocolMismatch,
            "source run length does not match the composed protocol");
    Run out;
    for (int b = 0; b < target_protocol.rounds(); ++b) {
        Context c = target_protocol.context_at(b + 1, out, *target_);
        Run joint(source_run.begin() + static_cast<long>(b * n), source_run.begin() + static_cast<long>((b + 1) * n));
        LocalSection s{c, {}};
        for (MeasurementId y : c) s.values.push_back(g_(y, project(y, joint)));
        out.push_back(std::move(s));
    }
    return out;
}

void DeterministicSimulation::check_compatible() const {
    for (const auto& c : target_->maximal_contexts()) context_protocol(c);
}

Simulation::Simulation(std::vector<WeightedSimulation> terms) : terms_(std::move(terms)) {
    require(!terms_.empty(), ErrorCode::InvalidArgument, "simulation needs at least one deterministic term");
    std::vector<Prob> weights;
    for (const auto& t : terms_) {
        require(t.sim.source()->same_as(*source()) && t.sim.target()->same_as(*target()),
                ErrorCode::ScenarioMismatch, "simulation terms disagree on source or target");
        require(t.sim.rounds() == rounds(), ErrorCode::InvalidArgument, "simulation terms disagree on rounds");
        require(t.weight.to_double() >= -1e-12, ErrorCode::InvalidArgument, "negative simulation weight");
        weights.push_back(t.weight);
    }
    Prob total = sum(weights);
    if (total.exact()) require(total.rational() == 1, ErrorCode::InvalidArgument, "simulation weights must sum to 1");
    else require(std::abs(total.to_double() - 1.0) < 1e-9, ErrorCode::InvalidArgument,
                 "simulation weights must sum to 1");
}

Simulation Simulation::deterministic(DeterministicSimulation t) {
    return Simulation({WeightedSimulation{Prob::one(), std::move(t)}});
}

Behaviour pushforward(const Simulation& sim, const Behaviour& b) {
    require(b.scenario()->same_as(*sim.source()), ErrorCode::ScenarioMismatch,
            "behaviour scenario differs from the simulation source");
    require(b.rounds() % sim.rounds() == 0, ErrorCode::ProtocolMismatch,
            "behaviour rounds are not a multiple of the simulation depth");
    int k = b.rounds() / sim.rounds();
    return Behaviour(sim.target(), k, [sim, b](const MeasurementProtocol& p) {
        const Scenario& src = *sim.source();
        std::vector<Prob> out(p.run_count(), Prob::zero());
        for (const auto& term : sim.terms()) {
            if (term.weight.is_zero()) continue;
            MeasurementProtocol q = term.sim.compose(p);
            auto table = b.table(q);
            auto runs = q.runs(src);
            for (std::size_t i = 0; i < runs.size(); ++i) {
                if (table[i].is_zero()) continue;
                Run target_run = term.sim.translate_run(p, runs[i]);
                out[p.run_index(target_run, *sim.target())] += term.weight * table[i];
            }
        }
        return out;
    });
}

Behaviour pushforward(const Simulation& sim, const EmpiricalModel& e) {
    require(e.scenario()->same_as(*sim.source()), ErrorCode::ScenarioMismatch,
            "model scenario differs from the simulation source");
    return pushforward(sim, e.as_behaviour(sim.rounds()));
}

std::optional<EmpiricalModel> promote_to_model(const Behaviour& b, double tolerance) {
    require(b.rounds() == 1, ErrorCode::ProtocolMismatch, "only single-round behaviours promote to models");
    std::vector<std::vector<Prob>> tables;
    for (const auto& c : b.scenario()->maximal_contexts()) tables.push_back(b.table(c));
    EmpiricalModel e(b.scenario(), std::move(tables));
    if (!check_no_signalling(e, tolerance).ok) return std::nullopt;
    return e;
}

Game pullback(const Simulation& sim, const Game& game) {
    require(game.scenario()->same_as(*sim.target()), ErrorCode::ScenarioMismatch,
            "game scenario differs from the simulation target");
    const Scenario& src = *sim.source();
    std::vector<GameTerm> terms;
    for (const auto& t : sim.terms()) {
        if (t.weight.is_zero()) continue;
        for (const auto& term : game.terms()) {
            MeasurementProtocol q = t.sim.compose(term.protocol);
            auto runs = q.runs(src);
            std::vector<std::size_t> accepting;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                std::size_t target_index = term.protocol.run_index(t.sim.translate_run(term.protocol, runs[i]),
                                                                   *sim.target());
                if (std::binary_search(term.accepting.begin(), term.accepting.end(), target_index))
                    accepting.push_back(i);
            }
            terms.push_back(GameTerm{t.weight * term.weight, std::move(q), std::move(accepting)});
        }
    }
    std::optional<Rational> bound = game.classical_bound();
    return Game("pullback(" + game.name() + ")", sim.source(), game.rounds() * sim.rounds(), std::move(terms),
                bound);
}

namespace {

// Runs of f(y) by DFS over the route; false once more than `cap` runs were seen.
bool enumerate_runs(const DeterministicSimulation& t, MeasurementId y, std::size_t cap, std::vector<Run>& out) {
    const Scenario& sc = *t.source();
    Run prefix;
    std::function<bool()> walk = [&]() -> bool {
        if (prefix.size() == static_cast<std::size_t>(t.rounds())) {
            out.push_back(prefix);
            return out.size() <= cap;
        }
        Context c = t.route(y, prefix);
        std::size_t n = sc.section_count(c);
        for (std::size_t k = 0; k < n; ++k) {
            prefix.push_back(sc.section(c, k));
            bool ok = walk();
            prefix.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    return walk();
}

Run random_run(const DeterministicSimulation& t, MeasurementId y, std::mt19937_64& rng) {
    const Scenario& sc = *t.source();
    Run prefix;
    while (prefix.size() < static_cast<std::size_t>(t.rounds())) {
        Context c = t.route(y, prefix);
        std::uniform_int_distribution<std::size_t> pick(0, sc.section_count(c) - 1);
        prefix.push_back(sc.section(c, pick(rng)));
    }
    return prefix;
}

bool in_sites(const Scenario& sc, MeasurementId x, const std::vector<std::size_t>& sites) {
    return std::binary_search(sites.begin(), sites.end(), sc.site_of(x));
}

Context outside(const Scenario& sc, const Context& c, const std::vector<std::size_t>& sites) {
    Context out;
    for (MeasurementId x : c)
        if (!in_sites(sc, x, sites)) out.push_back(x);
    return out;
}

bool follows_route(const DeterministicSimulation& t, MeasurementId y, const Run& run, std::size_t upto) {
    for (std::size_t m = 0; m < upto && m < run.size(); ++m) {
        Run prefix(run.begin(), run.begin() + static_cast<long>(m));
        if (t.route(y, prefix) != run[m].domain) return false;
    }
    return true;
}

}  // namespace

DependencySets dependency_sets(const DeterministicSimulation& t, const DependencyCheckOptions& opts) {
    require(t.declared().has_value(), ErrorCode::InvalidArgument, "simulation has no declared dependency sets");
    const DependencySets& d = *t.declared();
    const Scenario& src = *t.source();
    const Scenario& tgt = *t.target();
    std::mt19937_64 rng(opts.seed);
    const auto n = static_cast<std::size_t>(t.rounds());
    const auto& spec = tgt.multipartite_spec();

    for (std::size_t j = 0; j < tgt.site_count(); ++j) {
        std::vector<MeasurementId> ys;
        for (std::size_t z = 0; z < spec.settings[j].size(); ++z) ys.push_back(tgt.measurement(j, z));
        for (MeasurementId y : ys) {
            std::vector<Run> runs;
            if (!enumerate_runs(t, y, opts.exhaustive_runs, runs)) {
                runs.clear();
                for (std::size_t s = 0; s < opts.samples; ++s) runs.push_back(random_run(t, y, rng));
            }
            for (const Run& run : runs) {
                for (std::size_t k = 0; k < n; ++k) {
                    // In: the part of the round-k context outside In_k(j) may not depend on z.
                    Run prefix(run.begin(), run.begin() + static_cast<long>(k));
                    Context mine = outside(src, run[k].domain, d.in[k][j]);
                    for (MeasurementId other : ys) {
                        if (other == y || !follows_route(t, other, prefix, k)) continue;
                        if (outside(src, t.route(other, prefix), d.in[k][j]) != mine)
                            fail(ErrorCode::DeclarationInconsistent,
                                 "round " + std::to_string(k + 1) + " context of " + tgt.label(y) + " and " +
                                     tgt.label(other) + " differ outside In at prefix " + describe_run(src, prefix));
                    }
                    // Out: g may not read round-k outcomes outside Out_k(j).
                    Outcome base = t.translate(y, run);
                    for (std::size_t pos = 0; pos < run[k].domain.size(); ++pos) {
                        MeasurementId x = run[k].domain[pos];
                        if (in_sites(src, x, d.out[k][j])) continue;
                        for (Outcome v = 0; v < src.outcome_count(x); ++v) {
                            if (v == run[k].values[pos]) continue;
                            Run changed = run;
                            changed[k].values[pos] = v;
                            if (!follows_route(t, y, changed, n)) continue;
                            if (t.translate(y, changed) != base)
                                fail(ErrorCode::DeclarationInconsistent,
                                     "outcome of " + tgt.label(y) + " reads " + src.label(x) + " in round " +
                                         std::to_string(k + 1) + ": runs " + describe_run(src, run) + " vs " +
                                         describe_run(src, changed));
                        }
                    }
                }
            }
        }
    }
    return d;
}

}  // namespace contextua
