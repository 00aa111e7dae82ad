// contextua: batch experiment driver. stdout carries only the result envelope.

#include "contextua/error.hpp"
#include "contextua/experiments.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace contextua;

namespace {

enum Exit : int { Ok = 0, Failed = 1, BadConfig = 2, BadSchema = 3, LibraryError = 4, Unexpected = 5 };

struct Flags {
    std::string config_path;
    Json overrides = Json::object();
};

// Registers a flag that lands in the config only when given.
template <class T>
void flag(CLI::App* app, Flags& f, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<T>(name, [&f, key](const T& v) { f.overrides[key] = v; }, help);
}

void write_outputs(const std::filesystem::path& dir, const Json& envelope, const ExperimentResult& r) {
    std::filesystem::create_directories(dir);
    write_json_file((dir / "envelope.json").string(), envelope);
    for (const auto& [name, body] : r.csv) std::ofstream(dir / name) << body;
    for (const auto& [name, j] : r.files) write_json_file((dir / name).string(), j);
}

int run(const Json& raw) {
    const auto resolved = resolve_config(raw);
    const auto start = std::chrono::steady_clock::now();
    auto result = run_experiment(resolved);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    const auto envelope = result_envelope(resolved, result, wall.count());
    if (resolved.contains("out")) write_outputs(resolved["out"].get<std::string>(), envelope, result);
    std::cout << envelope.dump(2) << '\n';
    if (!result.passed) {
        std::cerr << "contextua: experiment failed: " << result.failure << '\n';
        return Failed;
    }
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextua: contextuality analysis and shallow-circuit experiments"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed;
    std::string out;
    app.add_option("--seed", seed, "master seed")->configurable(false);
    app.add_option("--out", out, "directory for envelope.json, CSV tables and artifacts");

    Flags f;
    std::string kind;
    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", f.config_path, "JSON config file");
        s->add_option("--seed", seed, "master seed");
        s->add_option("--out", out, "output directory");
        s->callback([&kind, name] { kind = name; });
        return s;
    };

    auto* cf = sub("cf", "contextual fraction of an empirical model");
    flag<std::string>(cf, f, "--model", "model", "fixture name or model.v1 file");
    cf->add_flag_callback("--exact", [&f] { f.overrides["arithmetic"] = "exact"; }, "force exact rational LP");
    flag<std::string>(cf, f, "--arithmetic", "arithmetic", "auto, exact or double");

    auto* ob = sub("obstruct", "cohomological obstructions of sections");
    flag<std::string>(ob, f, "--model", "model", "fixture name or model.v1 file");
    flag<std::string>(ob, f, "--weyl", "weyl", "weyl.v1 file");
    flag<std::string>(ob, f, "--method", "method", "cech, bundle or avn");
    ob->add_option_function<std::string>(
        "--section", [&f](const std::string& p) { f.overrides["section"] = read_json_file(p); }, "section JSON file");

    auto* ge = sub("game-eval", "success probability and resource inequality");
    flag<std::string>(ge, f, "--game", "game", "chsh, ghz or magic-square");
    flag<std::string>(ge, f, "--strategy", "strategy", "quantum, classical, fixture name or model.v1 file");

    auto* di = sub("distribute", "distribute a game over a graph");
    flag<std::string>(di, f, "--game", "game", "ghz, chsh or magic-square");
    flag<std::string>(di, f, "--graph", "graph", "line:n, hypergrid:n,k or tree:k,depth");
    flag<int>(di, f, "--rounds", "rounds", "1 or 2");

    auto* bo = sub("bound", "union bound for shallow classical circuits");
    flag<std::string>(bo, f, "--graph", "graph", "line:n, hypergrid:n,k or tree:k,depth");
    flag<int>(bo, f, "--rounds", "rounds", "1 or 2");
    flag<int>(bo, f, "--sites", "sites", "base sites for single-round layouts");
    flag<std::string>(bo, f, "--game", "game", "game for two-round layouts");
    flag<std::string>(bo, f, "--circuit", "circuit", "local or random:K,D[,seed]");
    flag<int>(bo, f, "--trials", "trials", "number of sampled circuits");
    flag<int>(bo, f, "--samples", "samples", "samples per circuit");

    auto* re = sub("restriction", "contextuality of restricted random circuits");
    flag<int>(re, f, "--sites", "sites", "number of binary sites");
    flag<int>(re, f, "--keep", "keep", "sites kept after restriction");
    flag<std::string>(re, f, "--circuit", "circuit", "local or random:K,D[,seed]");
    flag<int>(re, f, "--trials", "trials", "number of restrictions");

    auto* rn = app.add_subcommand("run", "run a JSON config of any kind");
    rn->add_option("--config", f.config_path, "JSON config file")->required();
    rn->add_option("--seed", seed, "master seed");
    rn->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cerr << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        std::cerr << "contextua: " << e.what() << '\n';
        return BadConfig;
    }

    try {
        Json config = f.config_path.empty() ? Json::object() : read_json_file(f.config_path);
        if (!kind.empty()) {
            require(!config.contains("kind") || config["kind"] == kind, ErrorCode::ConfigInvalid,
                    "config kind does not match the subcommand");
            config["kind"] = kind;
        }
        for (const auto& [k, v] : f.overrides.items()) config[k] = v;
        if (seed) config["seed"] = *seed;
        if (!out.empty()) config["out"] = out;
        return run(config);
    } catch (const Error& e) {
        std::cerr << "contextua: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::ConfigInvalid: return BadConfig;
            case ErrorCode::SchemaViolation: return BadSchema;
            case ErrorCode::ExperimentFailed: return Failed;
            default: return LibraryError;
        }
    } catch (const std::exception& e) {
        std::cerr << "contextua: unexpected error: " << e.what() << '\n';
        return Unexpected;
    }
}
