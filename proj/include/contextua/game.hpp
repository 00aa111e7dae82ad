#pragma once

#include "contextua/numeric.hpp"
#include "contextua/scenario.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace contextua {

struct GameTerm {
    Prob weight;
    MeasurementProtocol protocol;
    std::vector<std::size_t> accepting;  // sorted indices into protocol.runs()
};

// A distribution over (protocol, accepting set of runs) with its classical bound.
class Game {
public:
    Game(std::string name, ScenarioPtr scenario, int rounds, std::vector<GameTerm> terms,
         std::optional<Rational> classical_bound);

    // Builds each term's accepting set from a predicate on runs.
    static Game from_predicate(std::string name, ScenarioPtr scenario,
                               const std::vector<std::pair<Prob, MeasurementProtocol>>& queries,
                               const std::function<bool(std::size_t term, const Run&)>& accept,
                               std::optional<Rational> classical_bound);

    const std::string& name() const { return name_; }
    const ScenarioPtr& scenario() const { return scenario_; }
    int rounds() const { return rounds_; }
    const std::vector<GameTerm>& terms() const { return terms_; }
    const std::optional<Rational>& classical_bound() const { return classical_bound_; }
    Game with_classical_bound(Rational gamma) const;

private:
    std::string name_;
    ScenarioPtr scenario_;
    int rounds_;
    std::vector<GameTerm> terms_;
    std::optional<Rational> classical_bound_;
};

// Best success over deterministic global assignments, by exhaustive enumeration
// of the measurements the game actually queries.
Rational classical_bound_by_enumeration(const Game& game, std::size_t cap = 100'000'000);

}  // namespace contextua
