#pragma once

#include "contextua/distribution.hpp"
#include "contextua/game.hpp"
#include "contextua/model.hpp"
#include "contextua/simulation.hpp"
#include "contextua/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace contextua {

using NodeId = std::size_t;

// Classical circuit: a DAG of input, seed, gate and output nodes. Gates are
// lookup tables indexed by their in-wire values, first in-wire most
// significant; a hashed gate stands for a pseudo-random table fixed by its
// salt. Seeds are uniform over their alphabet. Nodes may reference
// later nodes; acyclicity is checked when the circuit is first evaluated.
class Circuit {
public:
    enum class Kind { Input, Seed, Gate, Output };
    struct Node {
        Kind kind;
        std::size_t alphabet = 0;
        std::vector<NodeId> in;
        std::vector<Outcome> table;  // gates only; empty for hashed gates
        std::uint64_t salt = 0;
        std::string label;
    };

    NodeId add_input(std::size_t alphabet, std::string label = {});
    NodeId add_seed(std::size_t alphabet);
    NodeId add_gate(std::vector<NodeId> in, std::size_t alphabet, std::vector<Outcome> table);
    NodeId add_gate(std::vector<NodeId> in, std::size_t alphabet,
                    const std::function<Outcome(const std::vector<Outcome>&)>& rule);
    NodeId add_hashed_gate(std::vector<NodeId> in, std::size_t alphabet, std::uint64_t salt);
    NodeId add_output(NodeId source, std::string label = {});

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId n) const { return nodes_.at(n); }
    const std::vector<NodeId>& inputs() const { return inputs_; }
    const std::vector<NodeId>& seeds() const { return seeds_; }
    const std::vector<NodeId>& outputs() const { return outputs_; }

    // Checks table shapes and wire references; throws CyclicGraph on a cycle.
    void validate() const;
    const std::vector<NodeId>& topological_order() const;

    // Output values (in outputs() order) for input values (inputs() order) and seed values (seeds() order).
    std::vector<Outcome> evaluate(const std::vector<Outcome>& inputs, const std::vector<Outcome>& seeds) const;
    // Seed space size, saturating at SIZE_MAX.
    std::size_t seed_space() const;

private:
    std::vector<Node> nodes_;
    std::vector<NodeId> inputs_, seeds_, outputs_;
    mutable std::vector<NodeId> order_;
};

// Indices into inputs() / outputs().
struct LightconeMaps {
    std::vector<std::vector<std::size_t>> forward;   // input -> outputs it reaches
    std::vector<std::vector<std::size_t>> backward;  // output -> inputs reaching it
};

LightconeMaps lightcones(const Circuit& c);
// Gates on the longest path from an input or seed to an output.
std::size_t depth(const Circuit& c);
std::size_t max_fan_in(const Circuit& c);

// Circuit strategy for a multipartite scenario over `rounds` rounds. Input
// wire in[i][j] has alphabet |X_i| + 1, the last symbol being the idle input.
// An output wire value v on setting x decodes to outcome v mod |O_x|; idle
// sites produce no outcome.
struct CircuitStrategy {
    ScenarioPtr scenario;
    int rounds = 1;
    Circuit circuit;
    std::vector<std::vector<std::size_t>> in, out;  // [site][round] -> index into inputs() / outputs()

    // Checks wiring, alphabets and round ordering: no round-j output reads a later-round input.
    void validate() const;
    std::size_t idle_symbol(std::size_t site) const;

    // Runs a protocol tree with fixed seeds.
    Run run(const MeasurementProtocol& p, const std::vector<Outcome>& seeds) const;
    std::vector<Outcome> random_seeds(std::mt19937_64& rng) const;
};

// Wires a fresh strategy skeleton: one input and one output slot per (site, round).
// `build` receives the circuit with inputs already added and must add one
// output per (site, round) in site-major order.
CircuitStrategy make_strategy(ScenarioPtr scenario, int rounds,
                              const std::function<void(Circuit&, const std::vector<std::vector<NodeId>>& inputs)>& build);

enum class BehaviourMode { Exact, Sampled };
struct BehaviourOptions {
    BehaviourMode mode = BehaviourMode::Exact;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::size_t seed_space_cap = std::size_t{1} << 20;
};
Behaviour behaviour_of(const CircuitStrategy& s, const BehaviourOptions& opts = {});

// Layered random circuit: per round and layer, the gate of site i reads its own
// wire from the layer below plus K - 1 wires drawn from that layer (all rounds
// up to the current one) and the seeds.
struct RandomCircuitSpec {
    std::size_t fan_in = 2;   // K
    std::size_t depth = 1;    // D
    std::size_t seeds = 0;    // shared seed wires
    std::size_t seed_alphabet = 2;
    std::size_t wire_alphabet = 0;  // intermediate layers; 0 = largest input alphabet
    std::size_t window = 0;         // > 0: draw other wires only from sites within this index distance
};
CircuitStrategy random_layered_strategy(ScenarioPtr scenario, int rounds, const RandomCircuitSpec& spec,
                                        std::mt19937_64& rng);
// Every site answers from its own current input only (depth 1, fan-in 1).
CircuitStrategy local_strategy(ScenarioPtr scenario, int rounds,
                               const std::function<Outcome(std::size_t site, int round, std::size_t setting)>& answer);

// The lightcone condition for t: no target site's round-n input sites reach
// another target site's round-n output sites. Returns the first violating
// (j, j'), with j' influencing j.
struct LightconeViolation {
    std::size_t j, j_prime;
};
std::optional<LightconeViolation> lightcone_condition(const DeterministicSimulation& t, const CircuitStrategy& c);
// Same check against precomputed backward lightcones (as input-index bitsets).
class LightconeChecker {
public:
    explicit LightconeChecker(const CircuitStrategy& c);
    std::optional<LightconeViolation> check(const DeterministicSimulation& t) const;

private:
    const CircuitStrategy* strategy_;
    std::vector<std::vector<std::uint64_t>> reach_;  // output index -> bitset over inputs
};

// Runs the strategy through t on a target context with fixed seeds; returns the target run.
Run simulated_run(const CircuitStrategy& s, const DeterministicSimulation& t, const Context& target,
                  const std::vector<Outcome>& seeds);

struct BoundReport {
    double analytic = 0;  // |J|^2 K^D A eps
    std::size_t failures = 0, samples = 0;
    double frequency = 0;
    double sigma = 0;
    Interval interval;
    bool pass = false;  // frequency <= analytic + 3 sigma
};

// Union-bound experiment over the path distribution of a structured simulation.
// A = rad(G) for single-round and 1 for two-round simulations; eps = 1/|V|.
BoundReport bound_union(const CircuitStrategy& c, const DistributedSimulation& sim, const DistributedScenario& layout,
                        std::size_t samples, std::uint64_t seed);
double union_bound(std::size_t j, std::size_t fan_in, std::size_t depth, const DistributedScenario& layout);

struct CFBoundReport {
    Prob cf;
    double analytic = 0;
    bool pass = false;
};
// cf of the pushforward of the exact strategy behaviour through every term of sim.
CFBoundReport cf_bound_experiment(const CircuitStrategy& c, const Simulation& sim, double analytic);

struct SuccessEstimate {
    std::size_t wins = 0, samples = 0;
    double p = 0, sigma = 0;
    Interval interval;
};
// p_S of the pushforward of a strategy through a sampled simulation on a
// single-round target game, by Monte Carlo.
SuccessEstimate sampled_success(const CircuitStrategy& c,
                                const std::function<DeterministicSimulation(std::mt19937_64&)>& draw_simulation,
                                const Game& game, std::size_t samples, std::uint64_t seed);

struct RestrictionReport {
    std::size_t trials = 0, contextual = 0;
    double frequency = 0, sigma = 0;
    double epsilon = 0;          // k(k-1)/(N-1)
    double classical_bound = 0;  // eps K^D
    double quantum_bound = 0;    // eps (K^D)^2
    bool pass = false;           // frequency <= classical_bound + 3 sigma
};
// Samples restrictions (U, I') with |I'| = keep, U uniform, and counts contextual restricted behaviours.
RestrictionReport restriction_experiment(const CircuitStrategy& c, std::size_t keep, std::size_t trials,
                                         std::uint64_t seed, double tolerance = 1e-9);

}  // namespace contextua
