#pragma once

#include "contextua/cohomology.hpp"
#include "contextua/model.hpp"
#include "contextua/scenario.hpp"

#include "json.hpp"

#include <string>

namespace contextua {

using Json = nlohmann::json;

// scenario.v1. Multipartite: {sites, settings: {site: [...]}, outcomes: {"site/setting": [...]}}.
// Explicit covers: {measurements, outcomes: {measurement: [...]}, contexts: [[...]]}.
Json scenario_to_json(const Scenario& s);
ScenarioPtr scenario_from_json(const Json& j);

// A probability as JSON: exact values become "n/d" strings, inexact ones numbers.
Json prob_to_json(const Prob& p);
// Accepts "n/d", "n", decimal strings (read exactly) and JSON numbers (read as doubles).
Prob prob_from_json(const Json& j);

// model.v1: {schema, scenario, tables: [{context: [labels], probabilities: [...]}]}.
// Tables follow the scenario's maximal contexts; probabilities follow section order
// (mixed radix over the context in measurement order, first measurement most significant).
Json model_to_json(const EmpiricalModel& e, const std::string& name = {});
EmpiricalModel model_from_json(const Json& j);
// Possibilistic variant: tables carry "support": [0|1, ...]. Probability tables are
// also accepted and reduced to their support.
Json possibilistic_to_json(const PossibilisticModel& m, const std::string& name = {});
PossibilisticModel possibilistic_from_json(const Json& j);

// {context: [labels], outcomes: [labels]}.
Json section_to_json(const Scenario& s, const LocalSection& sec);
LocalSection section_from_json(const Scenario& s, const Json& j);

// weyl.v1: {d, qudits, generators: [...], cap?, state?: [[re, im], ...] | basis?: index}.
struct WeylSpec {
    int d = 2;
    std::size_t qudits = 1;
    std::vector<WeylElement> generators;
    std::size_t cap = 4096;
    std::optional<Vector> state;
};
WeylSpec weyl_spec_from_json(const Json& j);
BundleModel bundle_model_from_spec(const WeylSpec& spec);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
EmpiricalModel import_model(const std::string& path);
void export_model(const EmpiricalModel& e, const std::string& path, const std::string& name = {});

}  // namespace contextua
