#pragma once

#include "contextua/numeric.hpp"
#include "contextua/scenario.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace contextua {

class Behaviour;

// One probability table per maximal context, aligned with
// scenario->maximal_contexts() and indexed by Scenario::section_index.
class EmpiricalModel {
public:
    EmpiricalModel(ScenarioPtr scenario, std::vector<std::vector<Prob>> tables);
    static EmpiricalModel from_function(ScenarioPtr scenario, const std::function<Prob(const LocalSection&)>& p);

    const ScenarioPtr& scenario() const { return scenario_; }
    const std::vector<Context>& contexts() const { return contexts_; }
    const std::vector<std::vector<Prob>>& tables() const { return tables_; }
    const std::vector<Prob>& table(const Context& maximal) const;
    std::size_t context_index(const Context& maximal) const;
    bool exact() const;

    // Distribution over sections_of(c) for any context c, marginalized from the
    // first maximal context containing it.
    std::vector<Prob> marginal(const Context& c) const;
    Prob probability(const LocalSection& s) const;

    Behaviour as_behaviour(int rounds) const;
    EmpiricalModel to_double() const;

private:
    ScenarioPtr scenario_;
    std::vector<Context> contexts_;
    std::map<Context, std::size_t> index_;
    std::vector<std::vector<Prob>> tables_;
};

class PossibilisticModel {
public:
    PossibilisticModel(ScenarioPtr scenario, std::vector<std::vector<bool>> supports);
    static PossibilisticModel support_of(const EmpiricalModel& e);

    const ScenarioPtr& scenario() const { return scenario_; }
    const std::vector<Context>& contexts() const { return contexts_; }
    const std::vector<std::vector<bool>>& supports() const { return supports_; }
    std::size_t context_index(const Context& maximal) const;
    const std::vector<bool>& support(const Context& maximal) const { return supports_[context_index(maximal)]; }
    std::vector<LocalSection> supported_sections(const Context& maximal) const;
    // Possibility of a section of any context (projected from the first maximal
    // context containing it).
    bool possible(const LocalSection& s) const;
    // Flasque-beneath-the-cover check: every pair of maximal contexts projects
    // to the same support on their overlap.
    bool flasque() const;

private:
    ScenarioPtr scenario_;
    std::vector<Context> contexts_;
    std::map<Context, std::size_t> index_;
    std::vector<std::vector<bool>> supports_;
};

// Lazily evaluated n-round behaviour, memoized per queried protocol.
class Behaviour {
public:
    using Generator = std::function<std::vector<Prob>(const MeasurementProtocol&)>;

    Behaviour(ScenarioPtr scenario, int rounds, Generator generator);

    const ScenarioPtr& scenario() const { return scenario_; }
    int rounds() const { return rounds_; }
    std::vector<Prob> table(const MeasurementProtocol& p) const;
    // Single-round convenience.
    std::vector<Prob> table(const Context& c) const;
    std::size_t cached_tables() const;

private:
    struct Memo {
        std::mutex mutex;
        std::map<std::vector<std::uint32_t>, std::vector<Prob>> tables;
    };
    ScenarioPtr scenario_;
    int rounds_;
    Generator generator_;
    std::shared_ptr<Memo> memo_;
};

// Marginalizes a distribution over sections of `from` onto the subcontext `to`.
std::vector<Prob> marginalize(const Scenario& scenario, const Context& from, const std::vector<Prob>& table,
                              const Context& to);

}  // namespace contextua
