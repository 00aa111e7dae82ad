#pragma once

#include "contextua/game.hpp"
#include "contextua/model.hpp"
#include "contextua/scenario.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace contextua {

// Per round (outer, 0-based) and target site (inner): sorted source site indices.
struct DependencySets {
    std::vector<std::vector<std::vector<std::size_t>>> in, out;
};

// A deterministic n-round simulation S -> T. The measurement translation is a
// rule giving the round-k context of f(y) from the earlier sections of f(y)'s
// own run; trees are materialized only when a query needs them, so large
// structured simulations stay cheap to construct and sample.
class DeterministicSimulation {
public:
    using Route = std::function<Context(MeasurementId y, const Run& prefix)>;
    using Translate = std::function<Outcome(MeasurementId y, const Run& run)>;

    DeterministicSimulation(ScenarioPtr source, ScenarioPtr target, int rounds, Route f, Translate g,
                            std::optional<DependencySets> declared = std::nullopt);

    // Identity on a scenario: y is measured directly and its outcome copied.
    static DeterministicSimulation identity(ScenarioPtr scenario);
    // Explicit protocols per target measurement with outcome tables indexed by run.
    static DeterministicSimulation from_tables(ScenarioPtr source, ScenarioPtr target,
                                               std::vector<MeasurementProtocol> f,
                                               std::vector<std::vector<Outcome>> g);

    const ScenarioPtr& source() const { return source_; }
    const ScenarioPtr& target() const { return target_; }
    int rounds() const { return rounds_; }
    const std::optional<DependencySets>& declared() const { return declared_; }

    Context route(MeasurementId y, const Run& prefix) const { return f_(y, prefix); }
    Outcome translate(MeasurementId y, const Run& run) const { return g_(y, run); }

    MeasurementProtocol protocol(MeasurementId y) const;
    // Parallel product over the measurements of a target context; throws
    // IncompatibleProtocols when the product is not valid.
    MeasurementProtocol context_protocol(const Context& c) const;
    // Source protocol of k*n rounds running the k-round target protocol block by block.
    MeasurementProtocol compose(const MeasurementProtocol& target_protocol) const;
    // Target run produced by a run of compose(target_protocol).
    Run translate_run(const MeasurementProtocol& target_protocol, const Run& source_run) const;

    // Projection of a joint block onto y's own protocol.
    Run project(MeasurementId y, const Run& block) const;

    // Compatibility over every maximal context of the target.
    void check_compatible() const;

private:
    ScenarioPtr source_, target_;
    int rounds_;
    Route f_;
    Translate g_;
    std::optional<DependencySets> declared_;
};

struct WeightedSimulation {
    Prob weight;
    DeterministicSimulation sim;
};

// Finitely supported distribution over deterministic simulations.
class Simulation {
public:
    explicit Simulation(std::vector<WeightedSimulation> terms);
    static Simulation deterministic(DeterministicSimulation t);

    const std::vector<WeightedSimulation>& terms() const { return terms_; }
    const ScenarioPtr& source() const { return terms_.front().sim.source(); }
    const ScenarioPtr& target() const { return terms_.front().sim.target(); }
    int rounds() const { return terms_.front().sim.rounds(); }

private:
    std::vector<WeightedSimulation> terms_;
};

// Behaviour on the target with b.rounds() / n rounds.
Behaviour pushforward(const Simulation& sim, const Behaviour& b);
Behaviour pushforward(const Simulation& sim, const EmpiricalModel& e);

// Single-round behaviour to empirical model, after check_no_signalling;
// nullopt when the tables signal.
std::optional<EmpiricalModel> promote_to_model(const Behaviour& b, double tolerance = 1e-9);

// Game on the source with k*n rounds. The target game's classical bound is
// carried over: noncontextual sources push forward to noncontextual targets,
// so it stays a valid (possibly loose) bound.
Game pullback(const Simulation& sim, const Game& game);

struct DependencyCheckOptions {
    std::size_t exhaustive_runs = 4096;  // per target measurement before switching to sampling
    std::size_t samples = 2000;
    std::uint64_t seed = 1;
};

// Validates the declared In/Out sets and returns them. Requires multipartite
// source and target. Throws DeclarationInconsistent naming a witness.
DependencySets dependency_sets(const DeterministicSimulation& t, const DependencyCheckOptions& opts = {});

}  // namespace contextua
