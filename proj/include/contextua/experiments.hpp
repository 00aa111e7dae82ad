#pragma once

#include "contextua/graph.hpp"
#include "contextua/serialize.hpp"

#include <map>
#include <string>

namespace contextua {

// One experiment run: a deterministic payload for a resolved config, plus
// optional CSV tables keyed by file name.
struct ExperimentResult {
    Json payload;
    std::map<std::string, std::string> csv;
    std::map<std::string, Json> files;  // extra JSON artifacts (distribute)
    bool passed = true;
    std::string failure;
};

// Validates a config and fills defaults. Throws ConfigInvalid.
// Kinds: cf, obstruct, game-eval, distribute, bound, restriction.
Json resolve_config(const Json& config);
ExperimentResult run_experiment(const Json& resolved);
// {tool, version, config, seed, wall_time_s, passed, failure?, payload}.
Json result_envelope(const Json& resolved, const ExperimentResult& r, double wall_time_s);

// "line:n", "hypergrid:n,k", "tree:k,depth". Throws ConfigInvalid.
RootedGraph parse_graph(const std::string& text);

}  // namespace contextua
