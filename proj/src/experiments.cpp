#include "contextua/experiments.hpp"

#include "contextua/analysis.hpp"
#include "contextua/circuits.hpp"
#include "contextua/distribution.hpp"
#include "contextua/models.hpp"
#include "contextua/stats.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace contextua {

namespace {

void config(bool ok, const std::string& what) { require(ok, ErrorCode::ConfigInvalid, what); }

const std::map<std::string, Json>& defaults(const std::string& kind) {
    static const std::map<std::string, std::map<std::string, Json>> table = {
        {"cf", {{"model", nullptr}, {"arithmetic", "auto"}}},
        {"obstruct", {{"model", nullptr}, {"weyl", nullptr}, {"method", "cech"}, {"section", nullptr}}},
        {"game-eval", {{"game", nullptr}, {"strategy", "quantum"}}},
        {"distribute", {{"game", "ghz"}, {"graph", nullptr}, {"rounds", 1}}},
        {"bound",
         {{"graph", "line:16"}, {"rounds", 1}, {"sites", 2}, {"game", "chsh"}, {"circuit", "random:2,1"},
          {"trials", 10}, {"samples", 1000}}},
        {"restriction", {{"sites", 8}, {"keep", 3}, {"circuit", "random:2,1"}, {"trials", 100}}},
    };
    auto it = table.find(kind);
    config(it != table.end(), "unknown experiment kind '" + kind + "'");
    return it->second;
}

std::size_t positive(const Json& c, const char* key) {
    config(c.at(key).is_number_integer() && c.at(key).get<long long>() > 0, std::string(key) + " must be a positive integer");
    return c.at(key).get<std::size_t>();
}

std::string text(const Json& c, const char* key) {
    config(c.at(key).is_string(), std::string(key) + " must be a string");
    return c.at(key).get<std::string>();
}

// A fixture name, a model.v1 path, or an inline model.v1 object.
Json model_document(const Json& source) {
    if (source.is_object()) return source;
    config(source.is_string(), "model must be a fixture name, a path or an object");
    const auto name = source.get<std::string>();
    for (const auto& f : all_fixtures())
        if (f.name == name)
            return f.empirical ? model_to_json(*f.empirical, f.name) : possibilistic_to_json(f.possibilistic, f.name);
    config(std::filesystem::exists(name), "'" + name + "' is neither a fixture nor a readable file");
    return read_json_file(name);
}

Json certificate_json(const std::optional<Infeasibility>& c) {
    if (!c) return nullptr;
    return Json{{"kind", c->kind}, {"factor", c->factor.get_str()}, {"value", c->value.get_str()}};
}

struct CircuitChoice {
    bool local = false;
    RandomCircuitSpec spec;
    std::optional<std::uint64_t> seed;
};

CircuitChoice parse_circuit(const std::string& s) {
    CircuitChoice c;
    if (s == "local") {
        c.local = true;
        return c;
    }
    static const std::regex re(R"(random:(\d+),(\d+)(,(\d+))?)");
    std::smatch m;
    config(std::regex_match(s, m, re), "circuit must be 'local' or 'random:K,D[,seed]', got '" + s + "'");
    c.spec.fan_in = std::stoul(m[1]);
    c.spec.depth = std::stoul(m[2]);
    config(c.spec.fan_in >= 1 && c.spec.depth >= 1, "K and D must be positive");
    if (m[4].matched) c.seed = std::stoull(m[4]);
    return c;
}

CircuitStrategy make_circuit(const CircuitChoice& c, ScenarioPtr sc, int rounds, std::uint64_t seed) {
    if (c.local) return local_strategy(sc, rounds, [](std::size_t, int, std::size_t x) { return static_cast<Outcome>(x % 2); });
    std::mt19937_64 rng(seed);
    return random_layered_strategy(sc, rounds, c.spec, rng);
}

NamedModel quantum_fixture(const std::string& game) {
    auto f = fixture_by_name(game);
    config(f.realization.has_value(), "game '" + game + "' has no quantum realization fixture");
    return f;
}

Distributed distributed_for(const std::string& game, const RootedGraph& g, int rounds) {
    auto f = quantum_fixture(game);
    const auto& r = *f.realization;
    if (rounds == 1) return build_single_round(r.state.labels(), r.state.dim(), r.state, g);
    return build_two_round(f.scenario, r.state.dim(), r.state,
                           [&](std::size_t i, std::size_t x) { return r.measurements[f.scenario->measurement(i, x)]; }, g);
}

Json graph_json(const RootedGraph& g) {
    Json j{{"labels", Json::array()}, {"edges", Json::array()}, {"root", g.label(g.root())},
           {"radius", g.radius()}, {"degree", g.degree()}};
    for (std::size_t v = 0; v < g.size(); ++v) j["labels"].push_back(g.label(v));
    for (auto [a, b] : g.edges()) j["edges"].push_back({g.label(a), g.label(b)});
    return j;
}

Json accounting_json(const CircuitAccounting& a) {
    return {{"depth", a.depth}, {"max_fan_in", a.max_fan_in}, {"max_fan_in_exact", a.max_fan_in_exact}, {"n_gates", a.n_gates}};
}

// --- experiment kinds ------------------------------------------------------

ExperimentResult run_cf(const Json& c) {
    auto doc = model_document(c.at("model"));
    auto e = model_from_json(doc);
    CFOptions opts;
    const auto arith = text(c, "arithmetic");
    opts.arithmetic = arith == "exact" ? Arithmetic::Exact : arith == "double" ? Arithmetic::Double : Arithmetic::Auto;
    auto r = contextual_fraction(e, opts);
    ExperimentResult out;
    out.payload = {{"ncf", prob_to_json(r.ncf)},
                   {"cf", prob_to_json(r.cf)},
                   {"cf_double", r.cf.to_double()},
                   {"exact", r.exact},
                   {"assignment_count", r.assignment_count},
                   {"witness_size", r.witness.size()},
                   {"no_signalling", check_no_signalling(e).ok}};
    return out;
}

Json section_verdicts_cech(const SupportFamily& f, const std::vector<std::pair<std::size_t, std::size_t>>& which,
                           const std::function<Json(std::size_t, std::size_t)>& describe) {
    Json list = Json::array();
    for (auto [ci, si] : which) {
        auto r = cech_obstruction(f, ci, si);
        Json v = describe(ci, si);
        v["vanishes"] = r.vanishes;
        v["certificate"] = certificate_json(r.certificate);
        v["unknowns"] = r.unknowns;
        v["equations"] = r.equations;
        list.push_back(std::move(v));
    }
    return list;
}

ExperimentResult run_obstruct(const Json& c) {
    const auto method = text(c, "method");
    config(method == "cech" || method == "bundle" || method == "avn", "method must be cech, bundle or avn");
    config(c.at("model").is_null() != c.at("weyl").is_null(), "give exactly one of model and weyl");
    ExperimentResult out;
    out.payload["method"] = method;
    const auto& section = c.at("section");

    if (!c.at("model").is_null()) {
        config(method != "bundle", "the bundle method needs a weyl.v1 closed set");
        auto m = possibilistic_from_json(model_document(c.at("model")));
        const auto& sc = *m.scenario();
        if (method == "avn") {
            auto r = avn_check(m);
            out.payload.update({{"is_avn", r.is_avn}, {"d", r.d}, {"theory_size", r.theory.size()},
                                {"certificate", certificate_json(r.certificate)}});
            return out;
        }
        auto f = support_family(m);
        std::vector<std::pair<std::size_t, std::size_t>> which;
        if (!section.is_null()) {
            auto s = section_from_json(sc, section);
            config(std::find(f.contexts.begin(), f.contexts.end(), s.domain) != f.contexts.end(),
                   "section must be on a maximal context");
            const auto ci = m.context_index(s.domain);
            auto it = std::find(f.supports[ci].begin(), f.supports[ci].end(), s);
            config(it != f.supports[ci].end(), "section is not in the support");
            which.emplace_back(ci, static_cast<std::size_t>(it - f.supports[ci].begin()));
        } else {
            for (std::size_t ci = 0; ci < f.contexts.size(); ++ci)
                for (std::size_t si = 0; si < f.supports[ci].size(); ++si) which.emplace_back(ci, si);
        }
        auto list = section_verdicts_cech(f, which, [&](std::size_t ci, std::size_t si) {
            return section_to_json(sc, f.supports[ci][si]);
        });
        std::size_t vanishing = 0;
        for (const auto& v : list) vanishing += v["vanishes"].get<bool>();
        out.payload["sections"] = std::move(list);
        out.payload["vanishing"] = vanishing;
        out.payload["non_vanishing"] = which.size() - vanishing;
        return out;
    }

    auto spec = weyl_spec_from_json(c.at("weyl").is_string() ? read_json_file(c.at("weyl").get<std::string>()) : c.at("weyl"));
    auto m = bundle_model_from_spec(spec);
    auto f = support_family(m);
    out.payload["contexts"] = m.contexts.size();
    if (method == "avn") {
        auto r = avn_check(f, m.d);
        out.payload.update({{"is_avn", r.is_avn}, {"d", r.d}, {"theory_size", r.theory.size()},
                            {"certificate", certificate_json(r.certificate)}});
        return out;
    }
    std::vector<std::pair<std::size_t, std::size_t>> which;
    if (!section.is_null()) {
        config(section.contains("context") && section.contains("section"), "weyl sections are {context, section} indices");
        const auto ci = section.at("context").get<std::size_t>(), si = section.at("section").get<std::size_t>();
        config(ci < m.contexts.size() && si < m.sections[ci].size(), "section index out of range");
        which.emplace_back(ci, si);
    } else {
        for (std::size_t ci = 0; ci < m.contexts.size(); ++ci)
            for (std::size_t si = 0; si < m.sections[ci].size(); ++si) which.emplace_back(ci, si);
    }
    auto describe = [&](std::size_t ci, std::size_t si) {
        Json v{{"context", ci}, {"section", si}, {"elements", Json::array()}, {"values", m.sections[ci][si]}};
        for (auto x : m.contexts[ci]) v["elements"].push_back(m.labels[x]);
        return v;
    };
    Json list = Json::array();
    if (method == "cech") {
        list = section_verdicts_cech(f, which, describe);
    } else {
        auto b = bundle_of(m);
        for (auto [ci, si] : which) {
            auto r = section_obstruction(m, b, ci, si);
            Json v = describe(ci, si);
            v["vanishes"] = r.vanishes;
            v["certificate"] = certificate_json(r.certificate);
            if (r.extension) {
                Json ext = Json::object();
                for (std::size_t base = 0; base < r.extension->size(); ++base)
                    ext[b.base().label(base)] = b.total().label((*r.extension)[base]);
                v["extension"] = std::move(ext);
            }
            list.push_back(std::move(v));
        }
    }
    std::size_t vanishing = 0;
    for (const auto& v : list) vanishing += v["vanishes"].get<bool>();
    out.payload["sections"] = std::move(list);
    out.payload["vanishing"] = vanishing;
    out.payload["non_vanishing"] = which.size() - vanishing;
    return out;
}

ExperimentResult run_game_eval(const Json& c) {
    const auto name = text(c, "game");
    Game game = [&] {
        try {
            return game_by_name(name);
        } catch (const Error&) {
            fail(ErrorCode::ConfigInvalid, "unknown game '" + name + "'");
        }
    }();
    const auto strategy = text(c, "strategy");
    const Rational gamma = game.classical_bound() ? *game.classical_bound() : classical_bound_by_enumeration(game);
    ExperimentResult out;
    out.payload = {{"game", name}, {"strategy", strategy}, {"gamma", gamma.get_str()}};
    if (strategy == "classical") {
        out.payload["p_S"] = gamma.get_str();
        out.payload["p_S_double"] = gamma.get_d();
        return out;
    }
    EmpiricalModel e = strategy == "quantum" ? *quantum_fixture(name).empirical : model_from_json(model_document(strategy));
    auto r = resource_inequality_check(e, game);
    out.payload.update({{"p_S", prob_to_json(r.p_success)},
                        {"p_S_double", r.p_success.to_double()},
                        {"cf", prob_to_json(r.cf)},
                        {"slack", prob_to_json(r.slack)},
                        {"resource_inequality", r.holds}});
    if (!r.holds) {
        out.passed = false;
        out.failure = "p_S exceeds gamma + cf";
    }
    return out;
}

ExperimentResult run_distribute(const Json& c) {
    const auto game = text(c, "game");
    auto g = parse_graph(text(c, "graph"));
    const int rounds = static_cast<int>(positive(c, "rounds"));
    config(rounds == 1 || rounds == 2, "rounds must be 1 or 2");
    auto dist = distributed_for(game, g, rounds);
    const auto& layout = *dist.layout;
    auto acc = quantum_circuit_accounting(layout);

    Json sim{{"kind", rounds == 1 ? "single-round" : "two-round"}, {"d", layout.dim()}, {"graph", graph_json(g)},
             {"paths", Json::array()}, {"settings", Json::array()}};
    const auto& paths = dist.simulation.paths();
    for (std::size_t k = 0; k < paths.paths.size(); ++k) {
        Json nodes = Json::array();
        for (auto v : paths.paths[k]) nodes.push_back(g.label(v));
        sim["paths"].push_back({{"weight", prob_to_json(paths.weights[k])}, {"nodes", nodes}});
    }
    const auto& sc = *layout.scenario();
    auto node_label = [&](std::size_t v) -> Json { return v == kNoNode ? Json(nullptr) : Json(g.label(v)); };
    for (MeasurementId x = 0; x < sc.size(); ++x) {
        const auto& s = layout.setting(x);
        const char* kind = s.kind == DistributedSetting::Kind::Bell       ? "bell"
                           : s.kind == DistributedSetting::Kind::Endpoint ? "endpoint"
                                                                          : "identity";
        Json row{{"measurement", sc.label(x)}, {"kind", kind}, {"base_site", s.base_site}, {"node", node_label(s.node)}};
        if (s.kind == DistributedSetting::Kind::Bell) {
            row["from"] = node_label(s.from);
            row["to"] = node_label(s.to);
        } else if (s.kind == DistributedSetting::Kind::Endpoint) {
            row["from"] = node_label(s.from);
            row["base_setting"] = s.base_setting;
        }
        sim["settings"].push_back(std::move(row));
    }

    ExperimentResult out;
    out.payload = {{"game", game},
                   {"graph", graph_json(g)},
                   {"rounds", rounds},
                   {"d", layout.dim()},
                   {"measurements", sc.size()},
                   {"sites", sc.site_count()},
                   {"paths", paths.paths.size()},
                   {"accounting", accounting_json(acc)}};
    out.files["scenario.json"] = scenario_to_json(sc);
    out.files["simulation.json"] = std::move(sim);
    out.files["accounting.json"] = accounting_json(acc);
    return out;
}

ExperimentResult run_bound(const Json& c, std::uint64_t seed) {
    auto g = parse_graph(text(c, "graph"));
    const int rounds = static_cast<int>(positive(c, "rounds"));
    config(rounds == 1 || rounds == 2, "rounds must be 1 or 2");
    const auto circuit = parse_circuit(text(c, "circuit"));
    const auto trials = positive(c, "trials"), samples = positive(c, "samples");
    Distributed dist = [&] {
        if (rounds == 2) return distributed_for(text(c, "game"), g, 2);
        std::vector<std::string> sites;
        for (std::size_t i = 0; i < positive(c, "sites"); ++i) sites.push_back("s" + std::to_string(i));
        return build_single_round(sites, 2, QuditState::basis(sites, 2, std::vector<int>(sites.size(), 0)), g);
    }();
    const auto& layout = *dist.layout;
    const std::uint64_t base_seed = circuit.seed.value_or(seed);
    std::ostringstream csv;
    csv << "trial,circuit_seed,failures,samples,frequency,sigma,analytic,pass\n";
    ExperimentResult out;
    double analytic = 0, worst = 0;
    std::size_t failures = 0, total = 0, passing = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto cs = derive_seed(base_seed, t);
        auto strat = make_circuit(circuit, layout.scenario(), rounds, cs);
        auto r = bound_union(strat, dist.simulation, layout, samples, derive_seed(seed, 1'000'000 + t));
        analytic = r.analytic;
        worst = std::max(worst, r.frequency);
        failures += r.failures;
        total += r.samples;
        passing += r.pass;
        csv << t << ',' << cs << ',' << r.failures << ',' << r.samples << ',' << r.frequency << ',' << r.sigma << ','
            << r.analytic << ',' << (r.pass ? 1 : 0) << '\n';
    }
    out.csv["bound.csv"] = csv.str();
    out.payload = {{"graph", graph_json(g)}, {"rounds", rounds},     {"trials", trials},
                   {"analytic", analytic},   {"failures", failures}, {"samples", total},
                   {"max_frequency", worst}, {"passing_trials", passing}};
    if (passing != trials) {
        out.passed = false;
        out.failure = std::to_string(trials - passing) + " trial(s) exceeded the union bound by more than 3 sigma";
    }
    return out;
}

ExperimentResult run_restriction(const Json& c, std::uint64_t seed) {
    const auto n = positive(c, "sites"), keep = positive(c, "keep"), trials = positive(c, "trials");
    config(keep <= n, "keep must not exceed sites");
    const auto circuit = parse_circuit(text(c, "circuit"));
    MultipartiteScenario spec;
    for (std::size_t i = 0; i < n; ++i) {
        spec.sites.push_back("s" + std::to_string(i));
        spec.settings.push_back({"0", "1"});
        spec.outcomes.push_back({{"0", "1"}, {"0", "1"}});
    }
    auto sc = Scenario::multipartite(std::move(spec));
    auto strat = make_circuit(circuit, sc, 1, circuit.seed.value_or(seed));
    auto r = restriction_experiment(strat, keep, trials, derive_seed(seed, 0));
    ExperimentResult out;
    out.payload = {{"sites", n},
                   {"keep", keep},
                   {"trials", r.trials},
                   {"contextual", r.contextual},
                   {"frequency", r.frequency},
                   {"sigma", r.sigma},
                   {"epsilon", r.epsilon},
                   {"classical_bound", r.classical_bound},
                   {"quantum_bound", r.quantum_bound}};
    std::ostringstream csv;
    csv << "trials,contextual,frequency,sigma,epsilon,classical_bound,quantum_bound,pass\n"
        << r.trials << ',' << r.contextual << ',' << r.frequency << ',' << r.sigma << ',' << r.epsilon << ','
        << r.classical_bound << ',' << r.quantum_bound << ',' << (r.pass ? 1 : 0) << '\n';
    out.csv["restriction.csv"] = csv.str();
    if (!r.pass) {
        out.passed = false;
        out.failure = "contextual frequency exceeds the classical bound by more than 3 sigma";
    }
    return out;
}

std::optional<double> numeric(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            Rational q(j.get<std::string>(), 10);
            q.canonicalize();
            return q.get_d();
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

// Compares `expect` entries against the payload.
void check_expectations(const Json& expect, ExperimentResult& r) {
    for (const auto& [key, want] : expect.items()) {
        if (!r.payload.contains(key)) {
            r.passed = false;
            r.failure = "expected field '" + key + "' is missing";
            return;
        }
        const auto& got = r.payload.at(key);
        auto a = numeric(got), b = numeric(want);
        const bool ok = (a && b) ? std::abs(*a - *b) <= 1e-9 : got == want;
        if (!ok) {
            r.passed = false;
            r.failure = "expected " + key + " = " + want.dump() + ", got " + got.dump();
            return;
        }
    }
}

}  // namespace

RootedGraph parse_graph(const std::string& s) {
    static const std::regex re(R"((line|hypergrid|tree):(\d+)(,(\d+))?)");
    std::smatch m;
    config(std::regex_match(s, m, re), "graph must be line:n, hypergrid:n,k or tree:k,depth; got '" + s + "'");
    const auto a = std::stoul(m[2]);
    config(a >= 1, "graph parameters must be positive");
    if (m[1] == "line") {
        config(!m[4].matched, "line takes one parameter");
        return line(a);
    }
    config(m[4].matched, m[1].str() + " takes two parameters");
    const auto b = std::stoul(m[4]);
    config(b >= 1, "graph parameters must be positive");
    return m[1] == "hypergrid" ? hypergrid(a, b) : kary_tree(a, b);
}

Json resolve_config(const Json& in) {
    config(in.is_object(), "config must be a JSON object");
    config(in.contains("kind") && in.at("kind").is_string(), "config needs a string 'kind'");
    const auto kind = in.at("kind").get<std::string>();
    const auto& d = defaults(kind);
    Json out{{"kind", kind}, {"seed", 1}};
    for (const auto& [k, v] : d) out[k] = v;
    for (const auto& [k, v] : in.items()) {
        if (k == "kind") continue;
        const bool common = k == "seed" || k == "out" || k == "expect";
        config(common || d.count(k), "unknown field '" + k + "' for kind " + kind);
        out[k] = v;
    }
    config(out["seed"].is_number_unsigned() || (out["seed"].is_number_integer() && out["seed"].get<long long>() >= 0),
           "seed must be a nonnegative integer");
    if (out.contains("expect")) config(out["expect"].is_object(), "expect must be an object");
    if (out.contains("out")) config(out["out"].is_string(), "out must be a directory path");
    const std::set<std::string> required = kind == "cf" ? std::set<std::string>{"model"}
                                           : kind == "game-eval"  ? std::set<std::string>{"game"}
                                           : kind == "distribute" ? std::set<std::string>{"graph"}
                                                                  : std::set<std::string>{};
    for (const auto& k : required) config(!out[k].is_null(), "missing required field '" + k + "'");
    return out;
}

ExperimentResult run_experiment(const Json& c) {
    const auto kind = c.at("kind").get<std::string>();
    const auto seed = c.at("seed").get<std::uint64_t>();
    ExperimentResult r;
    if (kind == "cf") r = run_cf(c);
    else if (kind == "obstruct") r = run_obstruct(c);
    else if (kind == "game-eval") r = run_game_eval(c);
    else if (kind == "distribute") r = run_distribute(c);
    else if (kind == "bound") r = run_bound(c, seed);
    else if (kind == "restriction") r = run_restriction(c, seed);
    else fail(ErrorCode::ConfigInvalid, "unknown experiment kind '" + kind + "'");
    if (r.passed && c.contains("expect")) check_expectations(c.at("expect"), r);
    return r;
}

Json result_envelope(const Json& resolved, const ExperimentResult& r, double wall_time_s) {
    Json j{{"tool", "contextua"},
           {"version", CONTEXTUA_VERSION},
           {"config", resolved},
           {"seed", resolved.at("seed")},
           {"wall_time_s", wall_time_s},
           {"passed", r.passed},
           {"payload", r.payload}};
    if (!r.passed) j["failure"] = r.failure;
    if (!r.csv.empty()) {
        j["csv"] = Json::array();
        for (const auto& [name, body] : r.csv) j["csv"].push_back(name);
    }
    return j;
}

}  // namespace contextua
