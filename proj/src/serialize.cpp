#include "contextua/serialize.hpp"

#include <cmath>
#include <fstream>
#include <regex>

namespace contextua {

namespace {

void schema(bool ok, const std::string& what) { require(ok, ErrorCode::SchemaViolation, what); }

const Json& field(const Json& j, const char* key) {
    schema(j.is_object() && j.contains(key), std::string("missing field '") + key + "'");
    return j.at(key);
}

std::vector<std::string> string_list(const Json& j, const std::string& what) {
    schema(j.is_array(), what + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        schema(v.is_string(), what + " must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

void check_schema_tag(const Json& j, const std::string& tag) {
    if (j.is_object() && j.contains("schema"))
        schema(j.at("schema") == tag, "expected schema " + tag + ", found " + j.at("schema").dump());
}

std::vector<std::string> context_labels(const Scenario& s, const Context& c) {
    std::vector<std::string> out;
    for (auto x : c) out.push_back(s.label(x));
    return out;
}

Context context_of(const Scenario& s, const Json& j) {
    std::vector<MeasurementId> ids;
    for (const auto& label : string_list(j, "context")) {
        auto id = s.find(label);
        schema(id.has_value(), "unknown measurement '" + label + "'");
        ids.push_back(*id);
    }
    Context c(ids.begin(), ids.end());
    std::sort(c.begin(), c.end());
    schema(std::adjacent_find(c.begin(), c.end()) == c.end(), "repeated measurement in context");
    return c;
}

// Index of each table entry in the scenario's maximal contexts.
template <class F>
void for_each_table(const Scenario& s, const Json& tables, F&& f) {
    schema(tables.is_array(), "tables must be an array");
    const auto contexts = s.maximal_contexts();
    std::vector<char> seen(contexts.size(), 0);
    for (const auto& t : tables) {
        const auto c = context_of(s, field(t, "context"));
        auto it = std::find(contexts.begin(), contexts.end(), c);
        schema(it != contexts.end(), "table context " + s.context_to_string(c) + " is not maximal");
        const auto k = static_cast<std::size_t>(it - contexts.begin());
        schema(!seen[k], "duplicate table for " + s.context_to_string(c));
        seen[k] = 1;
        f(k, c, t);
    }
    for (std::size_t k = 0; k < contexts.size(); ++k)
        schema(seen[k], "missing table for " + s.context_to_string(contexts[k]));
}

}  // namespace

Json scenario_to_json(const Scenario& s) {
    Json j;
    j["schema"] = "scenario.v1";
    if (s.is_multipartite()) {
        const auto& spec = s.multipartite_spec();
        j["sites"] = spec.sites;
        j["settings"] = Json::object();
        j["outcomes"] = Json::object();
        for (std::size_t i = 0; i < spec.sites.size(); ++i) {
            j["settings"][spec.sites[i]] = spec.settings[i];
            for (std::size_t x = 0; x < spec.settings[i].size(); ++x)
                j["outcomes"][spec.sites[i] + "/" + spec.settings[i][x]] = spec.outcomes[i][x];
        }
        return j;
    }
    j["measurements"] = Json::array();
    j["outcomes"] = Json::object();
    for (MeasurementId x = 0; x < s.size(); ++x) {
        j["measurements"].push_back(s.label(x));
        j["outcomes"][s.label(x)] = s.outcome_labels(x);
    }
    j["contexts"] = Json::array();
    for (const auto& c : s.maximal_contexts()) j["contexts"].push_back(context_labels(s, c));
    return j;
}

ScenarioPtr scenario_from_json(const Json& j) {
    check_schema_tag(j, "scenario.v1");
    try {
        if (j.contains("sites")) {
            MultipartiteScenario spec;
            spec.sites = string_list(j.at("sites"), "sites");
            const auto& settings = field(j, "settings");
            const auto& outcomes = field(j, "outcomes");
            for (const auto& site : spec.sites) {
                schema(settings.contains(site), "no settings for site '" + site + "'");
                spec.settings.push_back(string_list(settings.at(site), "settings of " + site));
                std::vector<std::vector<std::string>> per;
                for (const auto& x : spec.settings.back()) {
                    const auto key = site + "/" + x;
                    schema(outcomes.contains(key), "no outcomes for '" + key + "'");
                    per.push_back(string_list(outcomes.at(key), "outcomes of " + key));
                }
                spec.outcomes.push_back(std::move(per));
            }
            return Scenario::multipartite(std::move(spec));
        }
        auto measurements = string_list(field(j, "measurements"), "measurements");
        const auto& outcomes = field(j, "outcomes");
        std::vector<std::vector<std::string>> out;
        for (const auto& m : measurements) {
            schema(outcomes.contains(m), "no outcomes for '" + m + "'");
            out.push_back(string_list(outcomes.at(m), "outcomes of " + m));
        }
        std::vector<std::vector<std::string>> contexts;
        const auto& cs = field(j, "contexts");
        schema(cs.is_array(), "contexts must be an array");
        for (const auto& c : cs) contexts.push_back(string_list(c, "context"));
        return Scenario::general(std::move(measurements), std::move(out), contexts);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaViolation) throw;
        fail(ErrorCode::SchemaViolation, std::string("invalid scenario: ") + e.what());
    }
}

Json prob_to_json(const Prob& p) {
    if (p.exact()) return p.rational().get_str();
    return p.to_double();
}

Prob prob_from_json(const Json& j) {
    if (j.is_number()) {
        const double v = j.get<double>();
        schema(std::isfinite(v) && v >= 0 && v <= 1, "probability out of range: " + j.dump());
        return Prob(v);
    }
    schema(j.is_string(), "probability must be a number or a string");
    const auto s = j.get<std::string>();
    static const std::regex rational(R"(\s*(\d+)\s*(/\s*(\d+))?\s*)");
    static const std::regex decimal(R"(\s*(\d*)\.(\d+)\s*)");
    std::smatch m;
    Rational q;
    if (std::regex_match(s, m, rational)) {
        schema(!m[3].matched || m[3].str().find_first_not_of('0') != std::string::npos, "zero denominator in " + s);
        q = Rational(Integer(m[1].str(), 10), Integer(m[3].matched ? m[3].str() : "1", 10));
    } else if (std::regex_match(s, m, decimal)) {
        const auto frac = m[2].str();
        q = Rational(Integer((m[1].str().empty() ? "0" : m[1].str()) + frac, 10), Integer("1" + std::string(frac.size(), '0'), 10));
    } else {
        fail(ErrorCode::SchemaViolation, "unparseable probability '" + s + "'");
    }
    q.canonicalize();
    schema(q <= 1, "probability above 1: " + s);
    return Prob(q);
}

Json model_to_json(const EmpiricalModel& e, const std::string& name) {
    const auto& s = *e.scenario();
    Json j;
    j["schema"] = "model.v1";
    if (!name.empty()) j["name"] = name;
    j["scenario"] = scenario_to_json(s);
    j["tables"] = Json::array();
    for (std::size_t k = 0; k < e.contexts().size(); ++k) {
        Json t;
        t["context"] = context_labels(s, e.contexts()[k]);
        t["probabilities"] = Json::array();
        for (const auto& p : e.tables()[k]) t["probabilities"].push_back(prob_to_json(p));
        j["tables"].push_back(std::move(t));
    }
    return j;
}

EmpiricalModel model_from_json(const Json& j) {
    check_schema_tag(j, "model.v1");
    auto s = scenario_from_json(field(j, "scenario"));
    std::vector<std::vector<Prob>> tables(s->maximal_context_count());
    for_each_table(*s, field(j, "tables"), [&](std::size_t k, const Context& c, const Json& t) {
        const auto& ps = field(t, "probabilities");
        schema(ps.is_array() && ps.size() == s->section_count(c),
               "table for " + s->context_to_string(c) + " needs " + std::to_string(s->section_count(c)) + " entries");
        for (const auto& p : ps) tables[k].push_back(prob_from_json(p));
    });
    try {
        return EmpiricalModel(s, std::move(tables));
    } catch (const Error& e) {
        fail(ErrorCode::SchemaViolation, std::string("invalid model: ") + e.what());
    }
}

Json possibilistic_to_json(const PossibilisticModel& m, const std::string& name) {
    const auto& s = *m.scenario();
    Json j;
    j["schema"] = "model.v1";
    if (!name.empty()) j["name"] = name;
    j["scenario"] = scenario_to_json(s);
    j["tables"] = Json::array();
    for (std::size_t k = 0; k < m.contexts().size(); ++k) {
        Json t;
        t["context"] = context_labels(s, m.contexts()[k]);
        t["support"] = Json::array();
        for (bool b : m.supports()[k]) t["support"].push_back(b ? 1 : 0);
        j["tables"].push_back(std::move(t));
    }
    return j;
}

PossibilisticModel possibilistic_from_json(const Json& j) {
    check_schema_tag(j, "model.v1");
    const auto& tables = field(j, "tables");
    schema(tables.is_array(), "tables must be an array");
    bool any_probability = false;
    for (const auto& t : tables) any_probability = any_probability || (t.is_object() && t.contains("probabilities"));
    if (any_probability) return PossibilisticModel::support_of(model_from_json(j));
    auto s = scenario_from_json(field(j, "scenario"));
    std::vector<std::vector<bool>> supports(s->maximal_context_count());
    for_each_table(*s, tables, [&](std::size_t k, const Context& c, const Json& t) {
        const auto& sup = field(t, "support");
        schema(sup.is_array() && sup.size() == s->section_count(c),
               "support for " + s->context_to_string(c) + " needs " + std::to_string(s->section_count(c)) + " entries");
        for (const auto& v : sup) {
            schema(v == 0 || v == 1 || v.is_boolean(), "support entries are 0 or 1");
            supports[k].push_back(v.is_boolean() ? v.get<bool>() : v == 1);
        }
    });
    try {
        return PossibilisticModel(s, std::move(supports));
    } catch (const Error& e) {
        fail(ErrorCode::SchemaViolation, std::string("invalid model: ") + e.what());
    }
}

Json section_to_json(const Scenario& s, const LocalSection& sec) {
    Json j;
    j["context"] = context_labels(s, sec.domain);
    j["outcomes"] = Json::array();
    for (std::size_t k = 0; k < sec.domain.size(); ++k) j["outcomes"].push_back(s.outcome_labels(sec.domain[k]).at(sec.values[k]));
    return j;
}

LocalSection section_from_json(const Scenario& s, const Json& j) {
    const auto labels = string_list(field(j, "context"), "context");
    const auto outcomes = string_list(field(j, "outcomes"), "outcomes");
    schema(labels.size() == outcomes.size(), "context and outcomes differ in length");
    std::vector<std::pair<MeasurementId, Outcome>> pairs;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        auto id = s.find(labels[k]);
        schema(id.has_value(), "unknown measurement '" + labels[k] + "'");
        const auto& ol = s.outcome_labels(*id);
        auto it = std::find(ol.begin(), ol.end(), outcomes[k]);
        schema(it != ol.end(), "unknown outcome '" + outcomes[k] + "' of " + labels[k]);
        pairs.emplace_back(*id, static_cast<Outcome>(it - ol.begin()));
    }
    std::sort(pairs.begin(), pairs.end());
    LocalSection sec;
    for (auto [x, o] : pairs) {
        schema(sec.domain.empty() || sec.domain.back() != x, "repeated measurement in section");
        sec.domain.push_back(x);
        sec.values.push_back(o);
    }
    return sec;
}

WeylSpec weyl_spec_from_json(const Json& j) {
    check_schema_tag(j, "weyl.v1");
    WeylSpec spec;
    try {
        spec.d = field(j, "d").get<int>();
        spec.qudits = field(j, "qudits").get<std::size_t>();
        if (j.contains("cap")) spec.cap = j.at("cap").get<std::size_t>();
        for (const auto& g : string_list(field(j, "generators"), "generators"))
            spec.generators.push_back(parse_weyl(spec.d, spec.qudits, g));
        const long dim = static_cast<long>(std::llround(std::pow(spec.d, static_cast<double>(spec.qudits))));
        if (j.contains("basis")) {
            const auto b = j.at("basis").get<long>();
            schema(b >= 0 && b < dim, "basis index out of range");
            Vector v = Vector::Zero(dim);
            v[b] = 1;
            spec.state = v;
        } else if (j.contains("state")) {
            const auto& a = j.at("state");
            schema(a.is_array() && static_cast<long>(a.size()) == dim, "state needs d^qudits amplitudes");
            Vector v(dim);
            for (long k = 0; k < dim; ++k) {
                const auto& z = a.at(static_cast<std::size_t>(k));
                v[k] = z.is_array() ? Complex(z.at(0).get<double>(), z.at(1).get<double>()) : Complex(z.get<double>(), 0);
            }
            schema(v.norm() > 1e-12, "state must be nonzero");
            spec.state = v / v.norm();
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("invalid weyl.v1 document: ") + e.what());
    }
    return spec;
}

BundleModel bundle_model_from_spec(const WeylSpec& spec) {
    auto o = closed_weyl_set(spec.generators, spec.d, spec.cap);
    return spec.state ? state_dependent_model(o, *spec.state) : state_independent_model(o);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::ConfigInvalid, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::SchemaViolation, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    require(out.good(), ErrorCode::InvalidArgument, "cannot write " + path);
    out << j.dump(2) << '\n';
}

EmpiricalModel import_model(const std::string& path) { return model_from_json(read_json_file(path)); }

void export_model(const EmpiricalModel& e, const std::string& path, const std::string& name) {
    write_json_file(path, model_to_json(e, name));
}

}  // namespace contextua
