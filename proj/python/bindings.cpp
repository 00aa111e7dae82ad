// Thin extension module: models and configs cross the boundary as JSON text,
// the Python package converts to and from dicts.

#include "contextua/analysis.hpp"
#include "contextua/experiments.hpp"
#include "contextua/models.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace contextua;

namespace {

EmpiricalModel model_from_text(const std::string& text) { return model_from_json(Json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_contextua, m) {
    m.attr("__version__") = CONTEXTUA_VERSION;

    // args are (message, code name). Held for the process lifetime.
    static PyObject* error = PyErr_NewException("contextua._contextua.ContextuaError", PyExc_RuntimeError, nullptr);
    m.attr("ContextuaError") = py::handle(error);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetObject(error, py::make_tuple(e.what(), error_code_name(e.code())).ptr());
        }
    });

    m.def("fixture_names", [] {
        std::vector<std::string> names;
        for (const auto& f : all_fixtures()) names.push_back(f.name);
        return names;
    });
    m.def("fixture_json", [](const std::string& name) {
        auto f = fixture_by_name(name);
        return (f.empirical ? model_to_json(*f.empirical, f.name) : possibilistic_to_json(f.possibilistic, f.name)).dump();
    });
    m.def("contextual_fraction", [](const std::string& model, bool exact) {
        CFOptions o;
        if (exact) o.arithmetic = Arithmetic::Exact;
        auto r = contextual_fraction(model_from_text(model), o);
        return Json{{"ncf", prob_to_json(r.ncf)}, {"cf", prob_to_json(r.cf)}, {"exact", r.exact}}.dump();
    }, py::arg("model"), py::arg("exact") = false);
    m.def("success_probability", [](const std::string& model, const std::string& game) {
        return prob_to_json(success_probability(model_from_text(model), game_by_name(game))).dump();
    });
    m.def("no_signalling", [](const std::string& model) { return check_no_signalling(model_from_text(model)).ok; });
    m.def("run", [](const std::string& config) {
        auto resolved = resolve_config(Json::parse(config));
        auto r = run_experiment(resolved);
        return result_envelope(resolved, r, 0.0).dump();
    }, "Runs an experiment config and returns the envelope; wall time is not measured.");
}
