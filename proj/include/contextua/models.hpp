#pragma once

#include "contextua/game.hpp"
#include "contextua/model.hpp"
#include "contextua/quantum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace contextua {

struct NamedModel {
    std::string name;
    ScenarioPtr scenario;
    std::optional<EmpiricalModel> empirical;  // absent for possibilistic-only fixtures
    PossibilisticModel possibilistic;
    std::optional<QuantumRealization> realization;
};

// Two sites A, B with settings {a, a'} and {b, b'}, binary outcomes.
ScenarioPtr bell_scenario();
// Sites A, B, C with settings X, Y, binary outcomes.
ScenarioPtr ghz_scenario();
// The nine Mermin-square observables; contexts are its rows and columns.
ScenarioPtr mermin_square_scenario();
// Alice (columns) and Bob (rows), settings 1..3, outcome triples "x1x2x3".
ScenarioPtr magic_square_scenario();

NamedModel ghz_model();
NamedModel chsh_model();  // Bell state with the cos(pi/8) bases
NamedModel bell_model();  // the 1/2, 3/8 table, realized with real bases at 0, -pi/6, 0, pi/6
NamedModel pr_box();
NamedModel hardy_model();  // exact probabilities supported on the Hardy table
NamedModel mermin_square_model();
NamedModel magic_square_model();  // quantum strategy on two Bell pairs

std::vector<NamedModel> all_fixtures();
NamedModel fixture_by_name(const std::string& name);

Game chsh_game();
Game ghz_game();
Game magic_square_game();
// Accepts every run of every context: success 1 for any behaviour.
Game trivial_game(ScenarioPtr scenario);

std::vector<Game> all_games();
Game game_by_name(const std::string& name);

}  // namespace contextua
