#include "contextua/distribution.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace contextua {

namespace {

std::vector<std::string> pair_labels(int d) {
    std::vector<std::string> out;
    for (int p1 = 0; p1 < d; ++p1)
        for (int p2 = 0; p2 < d; ++p2) out.push_back(weyl_text({p1, p2}));
    return out;
}

ProjectiveMeasurement labelled_bell_basis(int d) { return ProjectiveMeasurement(pair_labels(d), bell_basis(d).projectors()); }

void check_site_labels(const std::vector<std::string>& sites) {
    std::set<std::string> seen;
    for (const auto& s : sites) {
        require(s.find_first_of("@>/") == std::string::npos, ErrorCode::LabelCollision,
                "base site label '" + s + "' uses a reserved character (@, >, /)");
        require(seen.insert(s).second, ErrorCode::LabelCollision, "duplicate base site '" + s + "'");
    }
}

WeylLabel bell_outcome(int d, Outcome o) { return {static_cast<int>(o) / d, static_cast<int>(o) % d}; }

}  // namespace

ScenarioPtr weyl_scenario(const std::vector<std::string>& sites, int d) {
    require(d >= 2, ErrorCode::InvalidArgument, "dimension must be at least 2");
    MultipartiteScenario spec;
    spec.sites = sites;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        spec.settings.push_back(pair_labels(d));
        spec.outcomes.push_back(std::vector<std::vector<std::string>>(static_cast<std::size_t>(d * d),
                                                                      numeric_labels(static_cast<std::size_t>(d))));
    }
    return Scenario::multipartite(std::move(spec));
}

WeylLabel weyl_setting(int d, std::size_t index) {
    return {static_cast<int>(index / static_cast<std::size_t>(d)), static_cast<int>(index % static_cast<std::size_t>(d))};
}

std::string weyl_text(WeylLabel p) { return std::to_string(p.p1) + "," + std::to_string(p.p2); }

Game ghz_weyl_game() {
    auto sc = weyl_scenario({"A", "B", "C"}, 2);
    const std::size_t x = 2, y = 3;  // settings "1,0" and "1,1"
    // Promise rows carry an even number of Y, so the sign flip of D(1,1) = -Y cancels.
    std::vector<std::vector<std::size_t>> rows{{x, x, x}, {x, y, y}, {y, x, y}, {y, y, x}};
    std::vector<std::pair<Prob, MeasurementProtocol>> queries;
    for (const auto& row : rows) {
        Context c;
        for (std::size_t i = 0; i < 3; ++i) c.push_back(sc->measurement(i, row[i]));
        queries.push_back({Prob(ratio(1, 4)), MeasurementProtocol::single(c, *sc)});
    }
    return Game::from_predicate(
        "ghz-weyl", sc, queries,
        [rows, y](std::size_t k, const Run& run) {
            unsigned target = (rows[k][0] == y || rows[k][1] == y || rows[k][2] == y) ? 1u : 0u;
            return (run[0].values[0] + run[0].values[1] + run[0].values[2]) % 2 == target;
        },
        Rational(3, 4));
}

DistributedScenario::DistributedScenario(DistributionKind kind, RootedGraph graph, int d, ScenarioPtr base)
    : kind_(kind), graph_(std::move(graph)), d_(d), base_(std::move(base)) {
    require(base_->is_multipartite(), ErrorCode::InvalidArgument, "distribution needs a multipartite base scenario");
    const auto& bspec = base_->multipartite_spec();
    check_site_labels(bspec.sites);
    const bool two = kind_ == DistributionKind::TwoRound;
    const std::size_t r = graph_.root();
    const auto pairs = pair_labels(d_);
    const std::size_t npairs = pairs.size();

    MultipartiteScenario spec;
    std::vector<std::vector<DistributedSetting>> meaning;
    for (std::size_t i = 0; i < bspec.sites.size(); ++i) {
        for (std::size_t v = 0; v < graph_.size(); ++v) {
            spec.sites.push_back(bspec.sites[i] + "@" + graph_.label(v));
            std::vector<std::string> settings;
            std::vector<std::vector<std::string>> outcomes;
            std::vector<DistributedSetting> info;
            auto add = [&](std::string label, std::vector<std::string> outs, DistributedSetting s) {
                settings.push_back(std::move(label));
                outcomes.push_back(std::move(outs));
                info.push_back(s);
            };
            using K = DistributedSetting::Kind;
            if (v == r) {
                if (two)
                    for (std::size_t x = 0; x < bspec.settings[i].size(); ++x)
                        add("x:" + bspec.settings[i][x], bspec.outcomes[i][x], {K::Endpoint, i, v, kNoNode, kNoNode, x, {}});
                for (std::size_t w : graph_.neighbours(v))
                    add("bell:" + graph_.label(w), pairs, {K::Bell, i, v, kNoNode, w, 0, {}});
                if (!two)
                    for (std::size_t p = 0; p < npairs; ++p)
                        add("weyl:" + pairs[p], numeric_labels(static_cast<std::size_t>(d_)),
                            {K::Endpoint, i, v, kNoNode, kNoNode, p, {}});
            } else {
                for (std::size_t w : graph_.neighbours(v))
                    for (std::size_t w2 : graph_.neighbours(v))
                        if (w != w2)
                            add("bell:" + graph_.label(w) + ":" + graph_.label(w2), pairs, {K::Bell, i, v, w, w2, 0, {}});
                for (std::size_t w : graph_.neighbours(v)) {
                    if (two) {
                        for (std::size_t x = 0; x < bspec.settings[i].size(); ++x)
                            for (std::size_t p = 0; p < npairs; ++p)
                                add("x:" + bspec.settings[i][x] + ":" + graph_.label(w) + ":" + pairs[p],
                                    bspec.outcomes[i][x], {K::Endpoint, i, v, w, kNoNode, x, weyl_setting(d_, p)});
                    } else {
                        for (std::size_t p = 0; p < npairs; ++p)
                            add("weyl:" + graph_.label(w) + ":" + pairs[p], numeric_labels(static_cast<std::size_t>(d_)),
                                {K::Endpoint, i, v, w, kNoNode, p, {}});
                    }
                }
            }
            if (two) add("•", {"•"}, {K::Identity, i, v, kNoNode, kNoNode, 0, {}});
            spec.settings.push_back(std::move(settings));
            spec.outcomes.push_back(std::move(outcomes));
            meaning.push_back(std::move(info));
        }
    }
    scenario_ = Scenario::multipartite(std::move(spec));
    settings_.resize(scenario_->size());
    for (std::size_t s = 0; s < meaning.size(); ++s)
        for (std::size_t k = 0; k < meaning[s].size(); ++k) settings_[scenario_->measurement(s, k)] = meaning[s][k];
}

MeasurementId DistributedScenario::lookup(std::size_t i, std::size_t v, const std::string& setting) const {
    return scenario_->id_of(scenario_->multipartite_spec().sites.at(site(i, v)) + "/" + setting);
}

MeasurementId DistributedScenario::bell(std::size_t i, std::size_t v, std::size_t from, std::size_t to) const {
    if (from == kNoNode) return lookup(i, v, "bell:" + graph_.label(to));
    return lookup(i, v, "bell:" + graph_.label(from) + ":" + graph_.label(to));
}

MeasurementId DistributedScenario::endpoint(std::size_t i, std::size_t v, std::size_t prev, std::size_t base_setting,
                                            WeylLabel conjugation) const {
    const auto& x = base_->multipartite_spec().settings.at(i).at(base_setting);
    if (kind_ == DistributionKind::TwoRound) {
        if (prev == kNoNode) return lookup(i, v, "x:" + x);
        return lookup(i, v, "x:" + x + ":" + graph_.label(prev) + ":" + weyl_text(conjugation));
    }
    if (prev == kNoNode) return lookup(i, v, "weyl:" + x);
    return lookup(i, v, "weyl:" + graph_.label(prev) + ":" + x);
}

MeasurementId DistributedScenario::identity(std::size_t i, std::size_t v) const {
    require(kind_ == DistributionKind::TwoRound, ErrorCode::InvalidArgument, "only the two-round scenario has •");
    return lookup(i, v, "•");
}

std::string DistributedScenario::qudit(std::size_t i, std::size_t v, std::size_t w) const {
    return base_->multipartite_spec().sites.at(i) + "@" + graph_.label(v) + ">" + graph_.label(w);
}

std::vector<std::string> DistributedScenario::qudits(std::size_t i, std::size_t v) const {
    std::vector<std::string> out;
    if (v == graph_.root()) out.push_back(base_->multipartite_spec().sites.at(i));
    for (std::size_t w : graph_.neighbours(v)) out.push_back(qudit(i, v, w));
    return out;
}

QuantumRealization DistributedRealization::base_realization() const {
    return make_realization(layout->base(), psi,
                            [&](std::size_t i, std::size_t x) { return pi.at(i).at(x); });
}

std::size_t DistributedRealization::qudit_count() const {
    return psi.qudit_count() + 2 * psi.qudit_count() * layout->graph().edges().size();
}

QuantumRealization DistributedRealization::statevector() const {
    const int d = layout->dim();
    double amplitudes = std::pow(static_cast<double>(d), static_cast<double>(qudit_count()));
    require(amplitudes <= static_cast<double>(amplitude_cap()), ErrorCode::AmplitudeCapExceeded,
            "|psi,G> needs " + std::to_string(static_cast<unsigned long long>(amplitudes)) + " amplitudes");
    const auto& g = layout->graph();
    const std::size_t n_base = psi.qudit_count();
    QuditState state = psi;
    Vector phi = bell_vector(d, {0, 0});
    for (std::size_t i = 0; i < n_base; ++i)
        for (auto [v, w] : g.edges())
            state = QuditState::tensor(state, QuditState({layout->qudit(i, v, w), layout->qudit(i, w, v)}, d, phi));

    const auto& sc = *layout->scenario();
    QuantumRealization r{layout->scenario(), state, {}, {}, {}};
    for (std::size_t i = 0; i < n_base; ++i)
        for (std::size_t v = 0; v < g.size(); ++v) r.site_qudits.push_back(layout->qudits(i, v));
    const ProjectiveMeasurement bell = labelled_bell_basis(d);
    const Matrix id = Matrix::Identity(d, d);
    for (MeasurementId x = 0; x < sc.size(); ++x) {
        const auto& s = layout->setting(x);
        using K = DistributedSetting::Kind;
        const bool at_root = s.node == g.root();
        switch (s.kind) {
        case K::Bell:
            r.measurements.push_back(bell);
            r.targets.push_back({at_root ? psi.labels()[s.base_site] : layout->qudit(s.base_site, s.node, s.from),
                                 layout->qudit(s.base_site, s.node, s.to)});
            break;
        case K::Endpoint: {
            const auto& m = pi.at(s.base_site).at(s.base_setting);
            r.measurements.push_back(s.conjugation == WeylLabel{} ? m : m.conjugated(weyl_operator(d, s.conjugation)));
            r.targets.push_back({at_root ? psi.labels()[s.base_site] : layout->qudit(s.base_site, s.node, s.from)});
            break;
        }
        case K::Identity:
            r.measurements.push_back(ProjectiveMeasurement({"•"}, {id}));
            r.targets.push_back({layout->qudits(s.base_site, s.node).front()});
            break;
        }
    }
    validate_realization(r);
    return r;
}

DistributedSimulation::DistributedSimulation(std::shared_ptr<const DistributedScenario> layout, PathDistribution paths,
                                             TeleportConvention convention)
    : layout_(std::move(layout)), paths_(std::move(paths)), convention_(convention) {
    std::string problem = check_path_distribution(layout_->graph(), paths_);
    require(problem.empty(), ErrorCode::HypothesisUnmet, "path distribution: " + problem);
}

std::size_t DistributedSimulation::choice_count() const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < base_sites(); ++i) {
        if (total > SIZE_MAX / paths_.paths.size()) return SIZE_MAX;
        total *= paths_.paths.size();
    }
    return total;
}

Prob DistributedSimulation::weight(const std::vector<std::size_t>& choice) const {
    Prob w = Prob::one();
    for (std::size_t c : choice) w *= paths_.weights.at(c);
    return w;
}

DeterministicSimulation DistributedSimulation::deterministic(const std::vector<std::size_t>& choice) const {
    require(choice.size() == base_sites(), ErrorCode::InvalidArgument, "need one path per base site");
    auto chosen = std::make_shared<std::vector<Path>>();
    for (std::size_t c : choice) chosen->push_back(paths_.paths.at(c));
    auto layout = layout_;
    const int d = layout->dim();
    const TeleportConvention conv = convention_;

    // Bell chain of a path, without its endpoint.
    auto chain = [layout](std::size_t i, const Path& p) {
        Context out;
        for (std::size_t j = 0; j + 1 < p.size(); ++j)
            out.push_back(layout->bell(i, p[j], j == 0 ? kNoNode : p[j - 1], p[j + 1]));
        std::sort(out.begin(), out.end());
        return out;
    };
    auto accumulated = [layout, d, conv](const Run& run) {
        std::vector<WeylLabel> bells;
        for (const auto& s : run)
            for (std::size_t k = 0; k < s.domain.size(); ++k)
                if (layout->setting(s.domain[k]).kind == DistributedSetting::Kind::Bell)
                    bells.push_back(bell_outcome(d, s.values[k]));
        return accumulated_weyl(d, bells, conv.bell_sign);
    };

    DependencySets declared;
    const std::size_t n_sites = base_sites();
    const ScenarioPtr base = layout->base();
    if (layout->kind() == DistributionKind::SingleRound) {
        declared.in.assign(1, std::vector<std::vector<std::size_t>>(n_sites));
        declared.out.assign(1, std::vector<std::vector<std::size_t>>(n_sites));
        for (std::size_t i = 0; i < n_sites; ++i) {
            const Path& p = (*chosen)[i];
            declared.in[0][i] = {layout->site(i, p.back())};
            for (std::size_t v : p) declared.out[0][i].push_back(layout->site(i, v));
            std::sort(declared.out[0][i].begin(), declared.out[0][i].end());
        }
        return DeterministicSimulation(
            layout->scenario(), layout->base(), 1,
            [layout, chosen, chain, base](MeasurementId y, const Run&) {
                std::size_t i = base->site_of(y);
                const Path& p = (*chosen)[i];
                Context c = chain(i, p);
                c.push_back(layout->endpoint(i, p.back(), p.size() > 1 ? p[p.size() - 2] : kNoNode, base->setting_of(y)));
                std::sort(c.begin(), c.end());
                return c;
            },
            [layout, chosen, accumulated, d, conv, base](MeasurementId y, const Run& run) {
                std::size_t i = base->site_of(y);
                const Path& p = (*chosen)[i];
                MeasurementId end =
                    layout->endpoint(i, p.back(), p.size() > 1 ? p[p.size() - 2] : kNoNode, base->setting_of(y));
                int measured = static_cast<int>(*run.front().value_of(end));
                return static_cast<Outcome>(routed_outcome(d, weyl_setting(d, base->setting_of(y)), measured,
                                                           accumulated(run), conv.correction_sign));
            },
            declared);
    }

    declared.in.assign(2, std::vector<std::vector<std::size_t>>(n_sites));
    declared.out.assign(2, std::vector<std::vector<std::size_t>>(n_sites));
    for (std::size_t i = 0; i < n_sites; ++i) {
        std::size_t end = layout->site(i, (*chosen)[i].back());
        declared.in[1][i] = {end};
        declared.out[1][i] = {end};
    }
    return DeterministicSimulation(
        layout->scenario(), layout->base(), 2,
        [layout, chosen, chain, accumulated, base](MeasurementId y, const Run& prefix) {
            std::size_t i = base->site_of(y);
            const Path& p = (*chosen)[i];
            if (prefix.empty()) return chain(i, p);
            std::size_t prev = p.size() > 1 ? p[p.size() - 2] : kNoNode;
            return Context{layout->endpoint(i, p.back(), prev, base->setting_of(y), accumulated(prefix))};
        },
        [](MeasurementId, const Run& run) { return run[1].values.front(); }, declared);
}

Simulation DistributedSimulation::enumerate(std::size_t cap) const {
    std::size_t total = choice_count();
    require(total <= cap, ErrorCode::SearchSpaceTooLarge,
            "simulation has " + std::to_string(total) + " deterministic terms, cap " + std::to_string(cap));
    std::vector<std::size_t> radices(base_sites(), paths_.paths.size());
    std::vector<WeightedSimulation> terms;
    for (std::size_t k = 0; k < total; ++k) {
        auto choice = radix_digits(k, radices);
        terms.push_back({weight(choice), deterministic(choice)});
    }
    return Simulation(std::move(terms));
}

std::vector<std::size_t> DistributedSimulation::sample(std::mt19937_64& rng) const {
    std::vector<double> w;
    for (const auto& p : paths_.weights) w.push_back(p.to_double());
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < base_sites(); ++i) out.push_back(pick(rng));
    return out;
}

Distributed build_single_round(const std::vector<std::string>& sites, int d, const QuditState& psi,
                               const RootedGraph& g, TeleportConvention convention) {
    require(psi.labels() == sites, ErrorCode::LabelCollision, "psi must carry one qudit per base site, in order");
    require(psi.dim() == d, ErrorCode::DimensionMismatch, "psi has the wrong qudit dimension");
    auto layout = std::make_shared<const DistributedScenario>(DistributionKind::SingleRound, g, d, weyl_scenario(sites, d));
    std::vector<std::vector<ProjectiveMeasurement>> pi(sites.size());
    for (auto& row : pi)
        for (std::size_t p = 0; p < static_cast<std::size_t>(d * d); ++p) row.push_back(weyl_measurement(d, weyl_setting(d, p)));
    return Distributed{layout, DistributedRealization{layout, psi, std::move(pi)},
                       DistributedSimulation(layout, min_path_distribution(g), convention)};
}

Distributed build_two_round(ScenarioPtr base, int d, const QuditState& psi,
                            const std::function<ProjectiveMeasurement(std::size_t, std::size_t)>& pi,
                            const RootedGraph& g) {
    require(psi.labels() == base->multipartite_spec().sites, ErrorCode::LabelCollision,
            "psi must carry one qudit per base site, in order");
    require(psi.dim() == d, ErrorCode::DimensionMismatch, "psi has the wrong qudit dimension");
    auto layout = std::make_shared<const DistributedScenario>(DistributionKind::TwoRound, g, d, base);
    std::vector<std::vector<ProjectiveMeasurement>> table(base->site_count());
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t x = 0; x < base->multipartite_spec().settings[i].size(); ++x) {
            table[i].push_back(pi(i, x));
            require(table[i].back().labels() == base->multipartite_spec().outcomes[i][x], ErrorCode::OutcomeLabelMismatch,
                    "pi outcome labels differ from the base scenario");
            require(table[i].back().dimension() == d, ErrorCode::DimensionMismatch, "pi must act on one qudit");
        }
    return Distributed{layout, DistributedRealization{layout, psi, std::move(table)},
                       DistributedSimulation(layout, min_path_distribution(g))};
}

namespace {

std::size_t bell_count(const DistributedScenario& layout, const Run& run) {
    std::size_t n = 0;
    for (const auto& s : run)
        for (MeasurementId x : s.domain) n += layout.setting(x).kind == DistributedSetting::Kind::Bell;
    return n;
}

}  // namespace

std::vector<Prob> teleportation_backend_table(const Distributed& dist, const std::vector<std::size_t>& choice,
                                              const Context& target_context) {
    const auto& layout = *dist.layout;
    auto t = dist.simulation.deterministic(choice);
    auto target = MeasurementProtocol::single(target_context, *layout.base());
    auto q = t.compose(target);
    auto base = context_distribution(dist.realization.base_realization(), target_context);
    const double pair_weight = 1.0 / static_cast<double>(layout.dim() * layout.dim());
    std::vector<Prob> out;
    for (const auto& run : q.runs(*layout.scenario())) {
        LocalSection s = t.translate_run(target, run).front();
        out.push_back(Prob(base[layout.base()->section_index(s)] *
                           std::pow(pair_weight, static_cast<double>(bell_count(layout, run)))));
    }
    return out;
}

TeleportationSampler::TeleportationSampler(const Distributed& dist, DeterministicSimulation t, Context target_context)
    : layout_(dist.layout), convention_(dist.simulation.convention()), t_(std::move(t)),
      target_(std::move(target_context)) {
    auto probs = context_distribution(dist.realization.base_realization(), target_);
    base_ = std::discrete_distribution<std::size_t>(probs.begin(), probs.end());
}

const Context& TeleportationSampler::route(MeasurementId y, const Run& own) const {
    std::vector<Outcome> key{static_cast<Outcome>(own.size())};
    for (const auto& s : own) key.insert(key.end(), s.values.begin(), s.values.end());
    auto [it, fresh] = routes_.try_emplace({y, std::move(key)});
    if (fresh) it->second = t_.route(y, own);
    return it->second;
}

Run TeleportationSampler::draw(std::mt19937_64& rng) const {
    using K = DistributedSetting::Kind;
    const auto& layout = *layout_;
    const auto& base = *layout.base();
    const int d = layout.dim();
    LocalSection target = base.section(target_, base_(rng));
    std::uniform_int_distribution<Outcome> uniform_pair(0, static_cast<Outcome>(d * d - 1));

    Run joint(static_cast<std::size_t>(t_.rounds()));
    for (std::size_t k = 0; k < target_.size(); ++k) {
        MeasurementId y = target_[k];
        Run own;
        std::vector<WeylLabel> bells;
        for (int round = 0; round < t_.rounds(); ++round) {
            const Context& ctx = route(y, own);
            LocalSection s{ctx, std::vector<Outcome>(ctx.size(), 0)};
            for (std::size_t j = 0; j < ctx.size(); ++j)
                if (layout.setting(ctx[j]).kind == K::Bell) {
                    s.values[j] = uniform_pair(rng);
                    bells.push_back(bell_outcome(d, s.values[j]));
                }
            for (std::size_t j = 0; j < ctx.size(); ++j) {
                if (layout.setting(ctx[j]).kind != K::Endpoint) continue;
                long long want = target.values[k];
                if (layout.kind() == DistributionKind::SingleRound) {
                    // measured = routed - sign * c(p, P)
                    WeylLabel p = weyl_setting(d, base.setting_of(y));
                    WeylLabel acc = accumulated_weyl(d, bells, convention_.bell_sign);
                    want -= convention_.correction_sign * commutation_phase(d, p, acc);
                }
                s.values[j] = static_cast<Outcome>(mod(want, d));
            }
            own.push_back(s);
            auto& slot = joint[static_cast<std::size_t>(round)];
            slot = section_union(slot, s);
        }
    }
    return joint;
}

Run teleportation_backend_sample(const Distributed& dist, const std::vector<std::size_t>& choice,
                                 const Context& target_context, std::mt19937_64& rng) {
    return TeleportationSampler(dist, dist.simulation.deterministic(choice), target_context).draw(rng);
}

StructuredSetting parse_structured(const DistributedScenario& layout, const Context& joint) {
    require(layout.kind() == DistributionKind::SingleRound, ErrorCode::UnstructuredSetting,
            "joint settings are parsed for the single-round scenario only");
    using K = DistributedSetting::Kind;
    const auto& g = layout.graph();
    std::map<std::size_t, std::map<std::size_t, MeasurementId>> by_site;  // i -> node -> measurement
    for (MeasurementId x : joint) by_site[layout.setting(x).base_site][layout.setting(x).node] = x;
    StructuredSetting out;
    for (const auto& [i, nodes] : by_site) {
        Path path{g.root()};
        std::size_t prev = kNoNode;
        std::optional<std::size_t> setting;
        while (true) {
            auto it = nodes.find(path.back());
            if (it == nodes.end())
                fail(ErrorCode::UnstructuredSetting, "chain of base site " + std::to_string(i) + " breaks at node " +
                                                         g.label(path.back()));
            const auto& s = layout.setting(it->second);
            if (s.from != prev)
                fail(ErrorCode::UnstructuredSetting, "measurement at node " + g.label(path.back()) +
                                                         " does not continue the chain");
            if (s.kind == K::Endpoint) {
                setting = s.base_setting;
                break;
            }
            prev = path.back();
            path.push_back(s.to);
        }
        if (!g.is_path(path) || path.size() != nodes.size())
            fail(ErrorCode::UnstructuredSetting, "joint setting of base site " + std::to_string(i) + " is not a routed path");
        out.base_sites.push_back(i);
        out.paths.push_back(path);
        out.base_settings.push_back(*setting);
    }
    return out;
}

TeleportationSampler structured_sampler(const Distributed& dist, const Context& joint) {
    const auto& layout = *dist.layout;
    StructuredSetting parsed = parse_structured(layout, joint);
    // Unqueried base sites take the trivial path; only t.route is consulted,
    // so this explicit family needs no endpoint uniformity.
    auto routed = std::make_shared<std::vector<Path>>(layout.base()->site_count(), Path{layout.graph().root()});
    Context target;
    for (std::size_t k = 0; k < parsed.base_sites.size(); ++k) {
        (*routed)[parsed.base_sites[k]] = parsed.paths[k];
        target.push_back(layout.base()->measurement(parsed.base_sites[k], parsed.base_settings[k]));
    }
    std::sort(target.begin(), target.end());
    auto lay = dist.layout;
    DeterministicSimulation t(
        layout.scenario(), layout.base(), 1,
        [lay, routed](MeasurementId y, const Run&) {
            const auto& base = *lay->base();
            std::size_t i = base.site_of(y);
            const Path& p = (*routed)[i];
            Context c;
            for (std::size_t j = 0; j + 1 < p.size(); ++j)
                c.push_back(lay->bell(i, p[j], j == 0 ? kNoNode : p[j - 1], p[j + 1]));
            c.push_back(lay->endpoint(i, p.back(), p.size() > 1 ? p[p.size() - 2] : kNoNode, base.setting_of(y)));
            std::sort(c.begin(), c.end());
            return c;
        },
        [](MeasurementId, const Run&) -> Outcome { return 0; });
    Context routed_joint;
    for (MeasurementId y : target) {
        Context c = t.route(y, {});
        routed_joint.insert(routed_joint.end(), c.begin(), c.end());
    }
    std::sort(routed_joint.begin(), routed_joint.end());
    require(routed_joint == joint, ErrorCode::UnstructuredSetting, "joint setting is not a routed context");
    return TeleportationSampler(dist, std::move(t), std::move(target));
}

LocalSection teleportation_backend_sample(const Distributed& dist, const Context& joint, std::mt19937_64& rng) {
    return structured_sampler(dist, joint).draw(rng).front();
}

CircuitAccounting quantum_circuit_accounting(const DistributedScenario& layout) {
    const auto& g = layout.graph();
    const std::size_t n_i = layout.base()->site_count();
    CircuitAccounting a;
    a.depth = layout.rounds() + 1;
    a.n_gates = 1 + n_i * g.edges().size() + static_cast<std::size_t>(layout.rounds()) * n_i * g.size();
    a.max_fan_in = std::max(n_i, g.degree() + 2);
    std::size_t exact = n_i;
    if (!g.edges().empty()) exact = std::max<std::size_t>(exact, 2);
    for (std::size_t i = 0; i < n_i; ++i)
        for (std::size_t v = 0; v < g.size(); ++v) exact = std::max(exact, layout.qudits(i, v).size() + 1);
    a.max_fan_in_exact = exact;
    return a;
}

}  // namespace contextua
