#pragma once

#include "contextua/graph.hpp"
#include "contextua/quantum.hpp"
#include "contextua/simulation.hpp"
#include "contextua/teleport_constants.hpp"

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace contextua {

// Multipartite scenario (I, Z_d^2, Z_d): settings "p1,p2" (index p1*d + p2), outcomes "0".."d-1".
ScenarioPtr weyl_scenario(const std::vector<std::string>& sites, int d);
WeylLabel weyl_setting(int d, std::size_t index);
std::string weyl_text(WeylLabel p);  // "p1,p2"

// GHZ game on weyl_scenario({"A","B","C"}, 2) with X = W(1,0) and Y = W(1,1).
Game ghz_weyl_game();

enum class DistributionKind { SingleRound, TwoRound };

// What a measurement of the distributed scenario does.
struct DistributedSetting {
    enum class Kind { Bell, Endpoint, Identity } kind;
    std::size_t base_site;  // i
    std::size_t node;       // v
    std::size_t from;       // Bell: carrier neighbour (npos at the root); Endpoint: previous node (npos at the root)
    std::size_t to;         // Bell: neighbour receiving the state
    std::size_t base_setting;  // Endpoint: setting of i in the base scenario
    WeylLabel conjugation;     // Endpoint, two-round: W(p) M W(p)^dagger
};

inline constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

// T(I,G,d) (single round, base = weyl_scenario) or T(S,G,d) (two rounds).
// Sites "i@v" ordered by base site then node. Qudits "i" and "i@v>w".
class DistributedScenario {
public:
    DistributedScenario(DistributionKind kind, RootedGraph graph, int d, ScenarioPtr base);

    DistributionKind kind() const { return kind_; }
    int rounds() const { return kind_ == DistributionKind::SingleRound ? 1 : 2; }
    const RootedGraph& graph() const { return graph_; }
    int dim() const { return d_; }
    const ScenarioPtr& base() const { return base_; }
    const ScenarioPtr& scenario() const { return scenario_; }

    std::size_t site(std::size_t i, std::size_t v) const { return i * graph_.size() + v; }
    const DistributedSetting& setting(MeasurementId x) const { return settings_.at(x); }
    MeasurementId bell(std::size_t i, std::size_t v, std::size_t from, std::size_t to) const;
    MeasurementId endpoint(std::size_t i, std::size_t v, std::size_t prev, std::size_t base_setting,
                           WeylLabel conjugation = {}) const;
    MeasurementId identity(std::size_t i, std::size_t v) const;

    std::string qudit(std::size_t i, std::size_t v, std::size_t w) const;
    std::vector<std::string> qudits(std::size_t i, std::size_t v) const;  // Qudits(i, v)

private:
    MeasurementId lookup(std::size_t i, std::size_t v, const std::string& setting) const;

    DistributionKind kind_;
    RootedGraph graph_;
    int d_;
    ScenarioPtr base_, scenario_;
    std::vector<DistributedSetting> settings_;
};

// |psi, G> with the measurement tables of the construction.
struct DistributedRealization {
    std::shared_ptr<const DistributedScenario> layout;
    QuditState psi;                                      // qudits labelled by the base sites
    std::vector<std::vector<ProjectiveMeasurement>> pi;  // per base site, per base setting

    // Realization of the base model (psi, pi).
    QuantumRealization base_realization() const;
    std::size_t qudit_count() const;
    // Dense statevector of |psi, G>; throws AmplitudeCapExceeded above the cap.
    QuantumRealization statevector() const;
};

// Sign conventions for the routed outcome map; the defaults are the oracle-fixed ones.
struct TeleportConvention {
    int bell_sign = kBellSecondComponentSign;
    int correction_sign = kWeylCorrectionSign;
};

// s(I,G,d) or s(S,G,d): a product of path distributions over the base sites.
class DistributedSimulation {
public:
    DistributedSimulation(std::shared_ptr<const DistributedScenario> layout, PathDistribution paths,
                          TeleportConvention convention = {});

    const PathDistribution& paths() const { return paths_; }
    TeleportConvention convention() const { return convention_; }
    std::size_t base_sites() const { return layout_->base()->site_count(); }
    // Saturates at SIZE_MAX.
    std::size_t choice_count() const;
    Prob weight(const std::vector<std::size_t>& choice) const;
    // t_v for one path index per base site.
    DeterministicSimulation deterministic(const std::vector<std::size_t>& choice) const;
    Simulation enumerate(std::size_t cap = 1u << 16) const;
    std::vector<std::size_t> sample(std::mt19937_64& rng) const;

private:
    std::shared_ptr<const DistributedScenario> layout_;
    PathDistribution paths_;
    TeleportConvention convention_;
};

struct Distributed {
    std::shared_ptr<const DistributedScenario> layout;
    DistributedRealization realization;
    DistributedSimulation simulation;
};

// psi's qudit labels are the base sites I.
Distributed build_single_round(const std::vector<std::string>& sites, int d, const QuditState& psi,
                               const RootedGraph& g, TeleportConvention convention = {});
Distributed build_two_round(ScenarioPtr base, int d, const QuditState& psi,
                            const std::function<ProjectiveMeasurement(std::size_t site, std::size_t setting)>& pi,
                            const RootedGraph& g);

// Closed-form teleportation rule: Bell outcomes are uniform on Z_d^2 and the
// translated outcome follows the base model. Table over the runs of
// t_choice.compose(single(target_context)).
std::vector<Prob> teleportation_backend_table(const Distributed& dist, const std::vector<std::size_t>& choice,
                                              const Context& target_context);
// Draws runs of t.compose(single(target_context)) by the teleportation rule,
// without the resource state: base sections from the base model, Bell
// outcomes uniform, endpoint outcomes by inverting the routed outcome map.
class TeleportationSampler {
public:
    TeleportationSampler(const Distributed& dist, DeterministicSimulation t, Context target_context);
    Run draw(std::mt19937_64& rng) const;

private:
    const Context& route(MeasurementId y, const Run& own) const;

    std::shared_ptr<const DistributedScenario> layout_;
    TeleportConvention convention_;
    DeterministicSimulation t_;
    Context target_;
    mutable std::discrete_distribution<std::size_t> base_;
    mutable std::map<std::pair<MeasurementId, std::vector<Outcome>>, Context> routes_;
};

Run teleportation_backend_sample(const Distributed& dist, const std::vector<std::size_t>& choice,
                                 const Context& target_context, std::mt19937_64& rng);

// Reads a single-round joint setting back as routed chains: per base site, the
// path and the base setting. Throws UnstructuredSetting for anything else.
struct StructuredSetting {
    std::vector<std::size_t> base_sites;
    std::vector<Path> paths;
    std::vector<std::size_t> base_settings;
};
StructuredSetting parse_structured(const DistributedScenario& layout, const Context& joint);
// Sampler for a structured single-round joint setting (one-round runs over `joint`).
TeleportationSampler structured_sampler(const Distributed& dist, const Context& joint);
LocalSection teleportation_backend_sample(const Distributed& dist, const Context& joint, std::mt19937_64& rng);

struct CircuitAccounting {
    int depth = 0;
    std::size_t max_fan_in = 0;        // gate template: max(|I|, deg(G) + 2)
    std::size_t max_fan_in_exact = 0;  // largest wire count any gate actually reads
    std::size_t n_gates = 0;
};
CircuitAccounting quantum_circuit_accounting(const DistributedScenario& layout);

}  // namespace contextua
