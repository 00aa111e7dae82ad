#pragma once

#include "contextua/game.hpp"
#include "contextua/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace contextua {

struct NoSignallingReport {
    bool ok = true;
    Context first, second;  // offending pair of maximal contexts
    MeasurementId measurement = 0;
    Prob gap = Prob::zero();
};

NoSignallingReport check_no_signalling(const EmpiricalModel& e, double tolerance = 1e-9);

enum class PossibilisticClass { Noncontextual, LogicallyContextual, StronglyContextual };
std::string to_string(PossibilisticClass c);

struct Classification {
    PossibilisticClass kind = PossibilisticClass::Noncontextual;
    std::vector<LocalSection> non_extendable;  // supported sections with no global extension
    std::size_t global_sections_found = 0;
};

Classification classify_possibilistic(const PossibilisticModel& m, std::size_t cap = 100'000'000);

// Global sections of a possibilistic model, by pruned depth-first search.
std::vector<std::vector<Outcome>> global_sections(const PossibilisticModel& m, std::size_t limit,
                                                  std::size_t cap = 100'000'000);

enum class Arithmetic { Auto, Exact, Double };

struct CFOptions {
    Arithmetic arithmetic = Arithmetic::Auto;
    std::size_t max_assignments = std::size_t{1} << 24;  // search nodes while enumerating
    std::size_t max_columns = std::size_t{1} << 16;      // LP columns after zero-row presolve
    // Behaviours only: constrain maximal contexts alone instead of every context.
    // A signalling behaviour can differ on subcontexts (idle sites feed the
    // idle symbol), which the full check counts as contextuality.
    bool maximal_only = false;
};

struct CFRow {
    Context context;
    std::size_t section = 0;
    Prob bound;
};

struct CFResult {
    Prob ncf;
    Prob cf;
    bool exact = true;
    std::size_t assignment_count = 0;  // global assignments, indexed lexicographically in measurement order
    std::vector<std::pair<std::size_t, Prob>> witness;  // nonzero weights only, by increasing index
    std::vector<CFRow> rows;
    std::vector<Prob> dual;  // one multiplier per row; a noncontextuality-inequality witness
    std::size_t pivots = 0;
};

CFResult contextual_fraction(const EmpiricalModel& e, CFOptions options = {});
// Single-round behaviours: constraints over every context of the downward
// closure, since no-signalling is not assumed.
CFResult contextual_fraction(const Behaviour& b, CFOptions options = {});

// Restriction of a global assignment (digits over all measurements) to a context.
LocalSection assignment_section(const std::vector<Outcome>& assignment, const Context& c);

Prob success_probability(const Behaviour& b, const Game& g);
Prob success_probability(const EmpiricalModel& e, const Game& g);

struct ResourceReport {
    Prob p_success;
    Rational classical_bound;
    Prob cf;
    Prob slack;
    bool holds = true;
};

ResourceReport resource_inequality_check(const EmpiricalModel& e, const Game& g, double tolerance = 1e-9);
ResourceReport resource_inequality_check(const Behaviour& b, const Game& g, double tolerance = 1e-9);

// Keep the listed sites; every other site is measured with the fixed setting
// and its outcome is marginalized.
Behaviour restrict_behaviour(const Behaviour& b, const std::vector<std::size_t>& keep,
                             const std::map<std::size_t, std::size_t>& fixed);

}  // namespace contextua
