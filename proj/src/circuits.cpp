#include "contextua/circuits.hpp"

#include "contextua/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

namespace contextua {

namespace {

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double sigma_of(double p, std::size_t n) { return n ? std::sqrt(p * (1 - p) / static_cast<double>(n)) : 0.0; }

std::size_t pow_size(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t k = 0; k < exp; ++k) r *= base;
    return r;
}

}  // namespace

NodeId Circuit::add_input(std::size_t alphabet, std::string label) {
    require(alphabet >= 1, ErrorCode::InvalidArgument, "wire alphabet must be nonempty");
    order_.clear();
    inputs_.push_back(nodes_.size());
    nodes_.push_back({Kind::Input, alphabet, {}, {}, 0, std::move(label)});
    return nodes_.size() - 1;
}

NodeId Circuit::add_seed(std::size_t alphabet) {
    require(alphabet >= 1, ErrorCode::InvalidArgument, "seed alphabet must be nonempty");
    order_.clear();
    seeds_.push_back(nodes_.size());
    nodes_.push_back({Kind::Seed, alphabet, {}, {}, 0, {}});
    return nodes_.size() - 1;
}

NodeId Circuit::add_gate(std::vector<NodeId> in, std::size_t alphabet, std::vector<Outcome> table) {
    require(alphabet >= 1, ErrorCode::InvalidArgument, "gate alphabet must be nonempty");
    require(!table.empty(), ErrorCode::InvalidArgument, "gate table is empty");
    order_.clear();
    nodes_.push_back({Kind::Gate, alphabet, std::move(in), std::move(table), 0, {}});
    return nodes_.size() - 1;
}

NodeId Circuit::add_gate(std::vector<NodeId> in, std::size_t alphabet,
                         const std::function<Outcome(const std::vector<Outcome>&)>& rule) {
    std::vector<std::size_t> radices;
    for (NodeId n : in) radices.push_back(node(n).alphabet);
    std::size_t size = radix_product(radices);
    std::vector<Outcome> table(size);
    for (std::size_t k = 0; k < size; ++k) {
        auto digits = radix_digits(k, radices);
        table[k] = rule(std::vector<Outcome>(digits.begin(), digits.end()));
    }
    return add_gate(std::move(in), alphabet, std::move(table));
}

NodeId Circuit::add_hashed_gate(std::vector<NodeId> in, std::size_t alphabet, std::uint64_t salt) {
    require(alphabet >= 1, ErrorCode::InvalidArgument, "gate alphabet must be nonempty");
    order_.clear();
    nodes_.push_back({Kind::Gate, alphabet, std::move(in), {}, salt, {}});
    return nodes_.size() - 1;
}

NodeId Circuit::add_output(NodeId source, std::string label) {
    order_.clear();
    outputs_.push_back(nodes_.size());
    nodes_.push_back({Kind::Output, 0, {source}, {}, 0, std::move(label)});
    return nodes_.size() - 1;
}

const std::vector<NodeId>& Circuit::topological_order() const {
    if (!order_.empty() || nodes_.empty()) return order_;
    std::vector<std::size_t> pending(nodes_.size(), 0);
    std::vector<std::vector<NodeId>> consumers(nodes_.size());
    for (NodeId n = 0; n < nodes_.size(); ++n)
        for (NodeId m : nodes_[n].in) {
            require(m < nodes_.size(), ErrorCode::InvalidArgument, "wire references an unknown node");
            consumers[m].push_back(n);
            ++pending[n];
        }
    std::deque<NodeId> ready;
    for (NodeId n = 0; n < nodes_.size(); ++n)
        if (!pending[n]) ready.push_back(n);
    std::vector<NodeId> order;
    while (!ready.empty()) {
        NodeId n = ready.front();
        ready.pop_front();
        order.push_back(n);
        for (NodeId m : consumers[n])
            if (!--pending[m]) ready.push_back(m);
    }
    require(order.size() == nodes_.size(), ErrorCode::CyclicGraph, "circuit has a cycle");
    order_ = std::move(order);
    return order_;
}

void Circuit::validate() const {
    for (NodeId n = 0; n < nodes_.size(); ++n) {
        const Node& g = nodes_[n];
        switch (g.kind) {
        case Kind::Input:
        case Kind::Seed:
            require(g.in.empty(), ErrorCode::InvalidArgument, "inputs and seeds read no wires");
            break;
        case Kind::Output:
            require(g.in.size() == 1, ErrorCode::InvalidArgument, "an output reads exactly one wire");
            require(g.in[0] < nodes_.size() && nodes_[g.in[0]].kind != Kind::Output, ErrorCode::InvalidArgument,
                    "an output must read an input, seed or gate");
            break;
        case Kind::Gate: {
            require(!g.in.empty(), ErrorCode::InvalidArgument, "a gate reads at least one wire");
            std::vector<std::size_t> radices;
            for (NodeId m : g.in) {
                require(m < nodes_.size() && nodes_[m].kind != Kind::Output, ErrorCode::InvalidArgument,
                        "a gate must read inputs, seeds or gates");
                radices.push_back(nodes_[m].alphabet);
            }
            if (!g.table.empty()) {
                require(g.table.size() == radix_product(radices), ErrorCode::InvalidArgument,
                        "gate table size differs from its in-wire alphabet product");
                for (Outcome v : g.table)
                    require(v < g.alphabet, ErrorCode::InvalidArgument, "gate table value outside its alphabet");
            }
            break;
        }
        }
    }
    topological_order();
}

std::vector<Outcome> Circuit::evaluate(const std::vector<Outcome>& inputs, const std::vector<Outcome>& seeds) const {
    require(inputs.size() == inputs_.size() && seeds.size() == seeds_.size(), ErrorCode::InvalidArgument,
            "wrong number of input or seed values");
    std::vector<Outcome> value(nodes_.size(), 0);
    for (std::size_t k = 0; k < inputs_.size(); ++k) value[inputs_[k]] = inputs[k];
    for (std::size_t k = 0; k < seeds_.size(); ++k) value[seeds_[k]] = seeds[k];
    for (NodeId n : topological_order()) {
        const Node& g = nodes_[n];
        if (g.kind == Kind::Output) {
            value[n] = value[g.in[0]];
        } else if (g.kind == Kind::Gate) {
            if (g.table.empty()) {
                std::uint64_t h = mix(g.salt);
                for (NodeId m : g.in) h = mix(h ^ value[m]);
                value[n] = static_cast<Outcome>(h % g.alphabet);
            } else {
                std::size_t idx = 0;
                for (NodeId m : g.in) idx = idx * nodes_[m].alphabet + value[m];
                value[n] = g.table[idx];
            }
        }
    }
    std::vector<Outcome> out;
    out.reserve(outputs_.size());
    for (NodeId n : outputs_) out.push_back(value[n]);
    return out;
}

std::size_t Circuit::seed_space() const {
    std::size_t total = 1;
    for (NodeId s : seeds_) {
        if (total > SIZE_MAX / nodes_[s].alphabet) return SIZE_MAX;
        total *= nodes_[s].alphabet;
    }
    return total;
}

LightconeMaps lightcones(const Circuit& c) {
    const auto& order = c.topological_order();
    const auto& nodes = c.nodes();
    std::vector<std::set<std::size_t>> reach(nodes.size());  // node -> input indices reaching it
    std::vector<std::size_t> input_index(nodes.size(), SIZE_MAX);
    for (std::size_t k = 0; k < c.inputs().size(); ++k) input_index[c.inputs()[k]] = k;
    for (NodeId n : order) {
        if (input_index[n] != SIZE_MAX) reach[n].insert(input_index[n]);
        for (NodeId m : nodes[n].in) reach[n].insert(reach[m].begin(), reach[m].end());
    }
    LightconeMaps maps;
    maps.forward.resize(c.inputs().size());
    for (std::size_t o = 0; o < c.outputs().size(); ++o) {
        const auto& r = reach[c.outputs()[o]];
        maps.backward.emplace_back(r.begin(), r.end());
        for (std::size_t i : r) maps.forward[i].push_back(o);
    }
    return maps;
}

std::size_t depth(const Circuit& c) {
    std::vector<std::size_t> level(c.nodes().size(), 0);
    for (NodeId n : c.topological_order()) {
        const auto& g = c.node(n);
        std::size_t below = 0;
        for (NodeId m : g.in) below = std::max(below, level[m]);
        level[n] = below + (g.kind == Circuit::Kind::Gate ? 1 : 0);
    }
    std::size_t d = 0;
    for (NodeId o : c.outputs()) d = std::max(d, level[o]);
    return d;
}

std::size_t max_fan_in(const Circuit& c) {
    std::size_t k = 0;
    for (const auto& g : c.nodes())
        if (g.kind == Circuit::Kind::Gate) k = std::max(k, g.in.size());
    return k;
}

std::size_t CircuitStrategy::idle_symbol(std::size_t site) const {
    return scenario->multipartite_spec().settings.at(site).size();
}

void CircuitStrategy::validate() const {
    require(scenario && scenario->is_multipartite(), ErrorCode::InvalidArgument,
            "circuit strategies need a multipartite scenario");
    require(rounds >= 1, ErrorCode::InvalidArgument, "rounds must be positive");
    const std::size_t sites = scenario->site_count();
    require(in.size() == sites && out.size() == sites, ErrorCode::InvalidArgument, "one wire list per site");
    circuit.validate();
    for (std::size_t i = 0; i < sites; ++i) {
        require(in[i].size() == static_cast<std::size_t>(rounds) && out[i].size() == static_cast<std::size_t>(rounds),
                ErrorCode::InvalidArgument, "one wire per site and round");
        for (int j = 0; j < rounds; ++j) {
            require(in[i][j] < circuit.inputs().size() && out[i][j] < circuit.outputs().size(),
                    ErrorCode::InvalidArgument, "wire index out of range");
            require(circuit.node(circuit.inputs()[in[i][j]]).alphabet == idle_symbol(i) + 1, ErrorCode::InvalidArgument,
                    "input wire alphabet must be the site's settings plus the idle symbol");
        }
    }
    if (rounds == 1) return;
    std::vector<int> round_of_input(circuit.inputs().size(), -1);
    for (std::size_t i = 0; i < sites; ++i)
        for (int j = 0; j < rounds; ++j) round_of_input[in[i][j]] = j;
    auto maps = lightcones(circuit);
    for (std::size_t i = 0; i < sites; ++i)
        for (int j = 0; j < rounds; ++j)
            for (std::size_t k : maps.backward[out[i][j]])
                require(round_of_input[k] <= j, ErrorCode::PreconditionViolated,
                        "round " + std::to_string(j + 1) + " output of site " + std::to_string(i) +
                            " reads a later-round input");
}

Run CircuitStrategy::run(const MeasurementProtocol& p, const std::vector<Outcome>& seeds) const {
    require(p.rounds() == rounds, ErrorCode::ProtocolMismatch, "protocol and strategy round counts differ");
    const auto& sc = *scenario;
    std::vector<Outcome> inputs(circuit.inputs().size());
    for (std::size_t i = 0; i < in.size(); ++i)
        for (int j = 0; j < rounds; ++j) inputs[in[i][j]] = static_cast<Outcome>(idle_symbol(i));
    Run run;
    const ProtocolNode* node = &p.root();
    for (int j = 0; j < rounds; ++j) {
        for (MeasurementId x : node->context) inputs[in[sc.site_of(x)][j]] = static_cast<Outcome>(sc.setting_of(x));
        auto outputs = circuit.evaluate(inputs, seeds);
        LocalSection s{node->context, {}};
        for (MeasurementId x : node->context)
            s.values.push_back(static_cast<Outcome>(outputs[out[sc.site_of(x)][j]] % sc.outcome_count(x)));
        if (j + 1 < rounds) node = &node->next.at(sc.section_index(s));
        run.push_back(std::move(s));
    }
    return run;
}

std::vector<Outcome> CircuitStrategy::random_seeds(std::mt19937_64& rng) const {
    std::vector<Outcome> seeds;
    for (NodeId s : circuit.seeds()) {
        std::uniform_int_distribution<std::size_t> pick(0, circuit.node(s).alphabet - 1);
        seeds.push_back(static_cast<Outcome>(pick(rng)));
    }
    return seeds;
}

CircuitStrategy make_strategy(ScenarioPtr scenario, int rounds,
                              const std::function<void(Circuit&, const std::vector<std::vector<NodeId>>&)>& build) {
    require(scenario->is_multipartite(), ErrorCode::InvalidArgument, "circuit strategies need a multipartite scenario");
    CircuitStrategy s;
    s.scenario = scenario;
    s.rounds = rounds;
    const auto& spec = scenario->multipartite_spec();
    std::vector<std::vector<NodeId>> inputs(spec.sites.size());
    for (std::size_t i = 0; i < spec.sites.size(); ++i)
        for (int j = 0; j < rounds; ++j) {
            s.in.resize(spec.sites.size());
            s.in[i].push_back(s.circuit.inputs().size());
            inputs[i].push_back(s.circuit.add_input(spec.settings[i].size() + 1,
                                                    "in:" + spec.sites[i] + ":" + std::to_string(j + 1)));
        }
    build(s.circuit, inputs);
    require(s.circuit.outputs().size() == spec.sites.size() * static_cast<std::size_t>(rounds),
            ErrorCode::InvalidArgument, "strategy builder must add one output per site and round");
    s.out.assign(spec.sites.size(), {});
    for (std::size_t i = 0; i < spec.sites.size(); ++i)
        for (int j = 0; j < rounds; ++j) s.out[i].push_back(i * static_cast<std::size_t>(rounds) + static_cast<std::size_t>(j));
    s.validate();
    return s;
}

Behaviour behaviour_of(const CircuitStrategy& s, const BehaviourOptions& opts) {
    s.validate();
    if (opts.mode == BehaviourMode::Exact) {
        const std::size_t space = s.circuit.seed_space();
        require(space <= opts.seed_space_cap, ErrorCode::SeedSpaceTooLarge,
                "seed space " + (space == SIZE_MAX ? std::string("overflows") : std::to_string(space)) + " exceeds cap " +
                    std::to_string(opts.seed_space_cap));
    }
    auto strategy = std::make_shared<const CircuitStrategy>(s);
    return Behaviour(s.scenario, s.rounds, [strategy, opts](const MeasurementProtocol& p) {
        const auto& sc = *strategy->scenario;
        std::vector<std::size_t> counts(p.run_count(), 0);
        std::vector<Prob> table(p.run_count());
        if (opts.mode == BehaviourMode::Exact) {
            std::vector<std::size_t> radices;
            for (NodeId n : strategy->circuit.seeds()) radices.push_back(strategy->circuit.node(n).alphabet);
            const std::size_t space = radix_product(radices);
            for (std::size_t k = 0; k < space; ++k) {
                auto digits = radix_digits(k, radices);
                ++counts[p.run_index(strategy->run(p, std::vector<Outcome>(digits.begin(), digits.end())), sc)];
            }
            for (std::size_t r = 0; r < counts.size(); ++r)
                table[r] = Prob(ratio(static_cast<long>(counts[r]), static_cast<long>(space)));
            return table;
        }
        std::uint64_t h = mix(opts.seed);
        for (auto w : p.key()) h = mix(h ^ w);
        std::mt19937_64 rng(h);
        for (std::size_t k = 0; k < opts.samples; ++k) ++counts[p.run_index(strategy->run(p, strategy->random_seeds(rng)), sc)];
        for (std::size_t r = 0; r < counts.size(); ++r)
            table[r] = Prob(static_cast<double>(counts[r]) / static_cast<double>(opts.samples));
        return table;
    });
}

CircuitStrategy random_layered_strategy(ScenarioPtr scenario, int rounds, const RandomCircuitSpec& spec,
                                        std::mt19937_64& rng) {
    require(spec.fan_in >= 1 && spec.depth >= 1, ErrorCode::InvalidArgument, "K and D must be positive");
    const auto& mp = scenario->multipartite_spec();
    const std::size_t sites = mp.sites.size();
    std::vector<std::size_t> out_alphabet(sites, 1);
    std::size_t widest_input = 1;
    for (std::size_t i = 0; i < sites; ++i) {
        for (const auto& o : mp.outcomes[i]) out_alphabet[i] = std::max(out_alphabet[i], o.size());
        widest_input = std::max(widest_input, mp.settings[i].size() + 1);
    }
    const std::size_t wire = spec.wire_alphabet ? spec.wire_alphabet : widest_input;
    return make_strategy(scenario, rounds, [&](Circuit& c, const std::vector<std::vector<NodeId>>& inputs) {
        std::vector<NodeId> seeds;
        for (std::size_t k = 0; k < spec.seeds; ++k) seeds.push_back(c.add_seed(spec.seed_alphabet));
        // layer[j][i]: current wire of site i in round j
        std::vector<std::vector<NodeId>> layer(static_cast<std::size_t>(rounds), std::vector<NodeId>(sites));
        for (std::size_t i = 0; i < sites; ++i)
            for (int j = 0; j < rounds; ++j) layer[static_cast<std::size_t>(j)][i] = inputs[i][static_cast<std::size_t>(j)];
        for (std::size_t l = 1; l <= spec.depth; ++l) {
            auto next = layer;
            for (std::size_t j = 0; j < layer.size(); ++j)
                for (std::size_t i = 0; i < sites; ++i) {
                    std::vector<NodeId> pool(seeds);
                    std::size_t lo = spec.window && i > spec.window ? i - spec.window : 0;
                    std::size_t hi = spec.window ? std::min(sites - 1, i + spec.window) : sites - 1;
                    for (std::size_t j2 = 0; j2 <= j; ++j2)
                        for (std::size_t i2 = lo; i2 <= hi; ++i2)
                            if (!(i2 == i && j2 == j)) pool.push_back(layer[j2][i2]);
                    std::shuffle(pool.begin(), pool.end(), rng);
                    std::vector<NodeId> in{layer[j][i]};
                    for (std::size_t k = 0; k + 1 < spec.fan_in && k < pool.size(); ++k) in.push_back(pool[k]);
                    next[j][i] = c.add_hashed_gate(in, l == spec.depth ? out_alphabet[i] : wire, rng());
                }
            layer = std::move(next);
        }
        for (std::size_t i = 0; i < sites; ++i)
            for (std::size_t j = 0; j < layer.size(); ++j) c.add_output(layer[j][i]);
    });
}

CircuitStrategy local_strategy(ScenarioPtr scenario, int rounds,
                               const std::function<Outcome(std::size_t, int, std::size_t)>& answer) {
    const auto& mp = scenario->multipartite_spec();
    return make_strategy(scenario, rounds, [&](Circuit& c, const std::vector<std::vector<NodeId>>& inputs) {
        for (std::size_t i = 0; i < mp.sites.size(); ++i) {
            std::size_t alphabet = 1;
            for (const auto& o : mp.outcomes[i]) alphabet = std::max(alphabet, o.size());
            const std::size_t idle = mp.settings[i].size();
            for (int j = 0; j < rounds; ++j)
                c.add_output(c.add_gate({inputs[i][static_cast<std::size_t>(j)]}, alphabet,
                                        [&](const std::vector<Outcome>& v) -> Outcome {
                                            return v[0] == idle ? 0 : answer(i, j, v[0]);
                                        }));
        }
    });
}

LightconeChecker::LightconeChecker(const CircuitStrategy& c) : strategy_(&c) {
    const auto& circuit = c.circuit;
    const std::size_t words = (circuit.inputs().size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> bits(circuit.nodes().size(), std::vector<std::uint64_t>(words, 0));
    for (std::size_t k = 0; k < circuit.inputs().size(); ++k) bits[circuit.inputs()[k]][k / 64] |= std::uint64_t{1} << (k % 64);
    for (NodeId n : circuit.topological_order())
        for (NodeId m : circuit.node(n).in)
            for (std::size_t w = 0; w < words; ++w) bits[n][w] |= bits[m][w];
    for (NodeId o : circuit.outputs()) reach_.push_back(bits[o]);
}

std::optional<LightconeViolation> LightconeChecker::check(const DeterministicSimulation& t) const {
    const auto& c = *strategy_;
    require(t.source()->same_as(*c.scenario), ErrorCode::ScenarioMismatch, "simulation source is not the strategy scenario");
    require(t.rounds() == c.rounds, ErrorCode::ProtocolMismatch, "simulation and strategy round counts differ");
    DependencySets sets = t.declared() ? *t.declared() : dependency_sets(t);
    const std::size_t n = static_cast<std::size_t>(t.rounds());
    for (std::size_t k = 0; k + 1 < n; ++k)
        for (const auto& s : sets.in[k])
            require(s.empty(), ErrorCode::PreconditionViolated, "In_k must be empty before the last round");
    const auto& in = sets.in[n - 1];
    const auto& out = sets.out[n - 1];
    for (std::size_t j = 0; j < out.size(); ++j)
        for (std::size_t jp = 0; jp < in.size(); ++jp) {
            if (j == jp) continue;
            for (std::size_t b : out[j])
                for (std::size_t a : in[jp]) {
                    std::size_t k = c.in[a][n - 1];
                    if (reach_[c.out[b][n - 1]][k / 64] >> (k % 64) & 1) return LightconeViolation{j, jp};
                }
        }
    return std::nullopt;
}

std::optional<LightconeViolation> lightcone_condition(const DeterministicSimulation& t, const CircuitStrategy& c) {
    return LightconeChecker(c).check(t);
}

Run simulated_run(const CircuitStrategy& s, const DeterministicSimulation& t, const Context& target,
                  const std::vector<Outcome>& seeds) {
    require(t.source()->same_as(*s.scenario), ErrorCode::ScenarioMismatch, "simulation source is not the strategy scenario");
    require(t.rounds() == s.rounds, ErrorCode::ProtocolMismatch, "simulation and strategy round counts differ");
    const auto& sc = *s.scenario;
    std::vector<Outcome> inputs(s.circuit.inputs().size());
    for (std::size_t i = 0; i < s.in.size(); ++i)
        for (int j = 0; j < s.rounds; ++j) inputs[s.in[i][static_cast<std::size_t>(j)]] = static_cast<Outcome>(s.idle_symbol(i));
    std::vector<Run> own(target.size());
    for (int j = 0; j < s.rounds; ++j) {
        std::vector<Context> ctx(target.size());
        std::map<std::size_t, MeasurementId> used;  // site -> measurement this round
        for (std::size_t k = 0; k < target.size(); ++k) {
            ctx[k] = t.route(target[k], own[k]);
            for (MeasurementId x : ctx[k]) {
                auto [it, fresh] = used.try_emplace(sc.site_of(x), x);
                require(fresh || it->second == x, ErrorCode::IncompatibleProtocols,
                        "two target measurements use one source site in the same round");
                inputs[s.in[sc.site_of(x)][static_cast<std::size_t>(j)]] = static_cast<Outcome>(sc.setting_of(x));
            }
        }
        auto outputs = s.circuit.evaluate(inputs, seeds);
        for (std::size_t k = 0; k < target.size(); ++k) {
            LocalSection sec{ctx[k], {}};
            for (MeasurementId x : ctx[k])
                sec.values.push_back(
                    static_cast<Outcome>(outputs[s.out[sc.site_of(x)][static_cast<std::size_t>(j)]] % sc.outcome_count(x)));
            own[k].push_back(std::move(sec));
        }
    }
    LocalSection result{target, {}};
    for (std::size_t k = 0; k < target.size(); ++k) result.values.push_back(t.translate(target[k], own[k]));
    return {result};
}

double union_bound(std::size_t j, std::size_t fan_in, std::size_t depth, const DistributedScenario& layout) {
    const double a = layout.kind() == DistributionKind::SingleRound ? static_cast<double>(layout.graph().radius()) : 1.0;
    const double eps = 1.0 / static_cast<double>(layout.graph().size());
    return static_cast<double>(j * j) * static_cast<double>(pow_size(fan_in, depth)) * a * eps;
}

BoundReport bound_union(const CircuitStrategy& c, const DistributedSimulation& sim, const DistributedScenario& layout,
                        std::size_t samples, std::uint64_t seed) {
    require(samples > 0, ErrorCode::InvalidArgument, "need at least one sample");
    require(c.scenario->same_as(*layout.scenario()), ErrorCode::ScenarioMismatch,
            "strategy does not act on the distributed scenario");
    BoundReport r;
    r.analytic = union_bound(sim.base_sites(), max_fan_in(c.circuit), depth(c.circuit), layout);
    LightconeChecker checker(c);
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < samples; ++k)
        if (checker.check(sim.deterministic(sim.sample(rng)))) ++r.failures;
    r.samples = samples;
    r.frequency = static_cast<double>(r.failures) / static_cast<double>(samples);
    r.sigma = sigma_of(r.frequency, samples);
    r.interval = wilson_interval(r.failures, samples);
    r.pass = r.frequency <= r.analytic + 3 * r.sigma;
    return r;
}

CFBoundReport cf_bound_experiment(const CircuitStrategy& c, const Simulation& sim, double analytic) {
    CFBoundReport r;
    CFOptions maximal;
    maximal.maximal_only = true;
    r.cf = contextual_fraction(pushforward(sim, behaviour_of(c)), maximal).cf;
    r.analytic = analytic;
    r.pass = r.cf.to_double() <= analytic + 1e-9;
    return r;
}

SuccessEstimate sampled_success(const CircuitStrategy& c,
                                const std::function<DeterministicSimulation(std::mt19937_64&)>& draw_simulation,
                                const Game& game, std::size_t samples, std::uint64_t seed) {
    require(game.rounds() == 1, ErrorCode::PreconditionViolated, "sampled success needs a single-round target game");
    require(samples > 0, ErrorCode::InvalidArgument, "need at least one sample");
    std::vector<double> weights;
    for (const auto& t : game.terms()) weights.push_back(t.weight.to_double());
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::mt19937_64 rng(seed);
    SuccessEstimate e;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto& term = game.terms()[pick(rng)];
        auto t = draw_simulation(rng);
        Run run = simulated_run(c, t, term.protocol.root().context, c.random_seeds(rng));
        std::size_t idx = term.protocol.run_index(run, *game.scenario());
        e.wins += std::binary_search(term.accepting.begin(), term.accepting.end(), idx);
    }
    e.samples = samples;
    e.p = static_cast<double>(e.wins) / static_cast<double>(samples);
    e.sigma = sigma_of(e.p, samples);
    e.interval = wilson_interval(e.wins, samples);
    return e;
}

RestrictionReport restriction_experiment(const CircuitStrategy& c, std::size_t keep, std::size_t trials,
                                         std::uint64_t seed, double tolerance) {
    require(c.rounds == 1, ErrorCode::PreconditionViolated, "restrictions are defined for single-round strategies");
    const auto& mp = c.scenario->multipartite_spec();
    const std::size_t n = mp.sites.size();
    require(keep >= 1 && keep <= n && n >= 2, ErrorCode::InvalidArgument, "restriction size must be in [1, |I|]");
    Behaviour b = behaviour_of(c);
    CFOptions maximal;
    maximal.maximal_only = true;
    std::mt19937_64 rng(seed);
    RestrictionReport r;
    r.trials = trials;
    for (std::size_t k = 0; k < trials; ++k) {
        std::vector<std::size_t> sites(n);
        std::iota(sites.begin(), sites.end(), 0);
        std::shuffle(sites.begin(), sites.end(), rng);
        std::vector<std::size_t> kept(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(keep));
        std::sort(kept.begin(), kept.end());
        std::map<std::size_t, std::size_t> fixed;
        for (std::size_t q = keep; q < n; ++q) {
            std::uniform_int_distribution<std::size_t> pick(0, mp.settings[sites[q]].size() - 1);
            fixed[sites[q]] = pick(rng);
        }
        auto cf = contextual_fraction(restrict_behaviour(b, kept, fixed), maximal).cf;
        if (cf.to_double() > tolerance) ++r.contextual;
    }
    r.frequency = trials ? static_cast<double>(r.contextual) / static_cast<double>(trials) : 0.0;
    r.sigma = sigma_of(r.frequency, trials);
    const double cone = static_cast<double>(pow_size(max_fan_in(c.circuit), depth(c.circuit)));
    r.epsilon = static_cast<double>(keep * (keep - 1)) / static_cast<double>(n - 1);
    r.classical_bound = r.epsilon * cone;
    r.quantum_bound = r.epsilon * cone * cone;
    r.pass = r.frequency <= r.classical_bound + 3 * r.sigma;
    return r;
}

}  // namespace contextua
