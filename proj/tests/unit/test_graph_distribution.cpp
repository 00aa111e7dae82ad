#include "doctest.h"

#include "contextua/distribution.hpp"
#include "contextua/models.hpp"
#include "contextua/stats.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace contextua;

namespace {

QuditState random_state(const std::vector<std::string>& labels, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::size_t dim = 1;
    for (std::size_t k = 0; k < labels.size(); ++k) dim *= static_cast<std::size_t>(d);
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = Complex(gauss(rng), gauss(rng));
    v.normalize();
    return QuditState(labels, d, v);
}

std::vector<std::string> site_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
    return out;
}

double max_gap(const std::vector<Prob>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double gap = 0;
    for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, std::abs(a[k].to_double() - b[k]));
    return gap;
}

double max_gap(const std::vector<Prob>& a, const std::vector<Prob>& b) {
    std::vector<double> bd;
    for (const auto& p : b) bd.push_back(p.to_double());
    return max_gap(a, bd);
}

// Largest deviation between the pushforward of the statevector behaviour and the base model.
double pushforward_gap(const Distributed& dist) {
    auto sv = std::make_shared<const QuantumRealization>(dist.realization.statevector());
    Behaviour source = quantum_behaviour(sv, dist.layout->rounds());
    Behaviour pushed = pushforward(dist.simulation.enumerate(), source);
    auto base = dist.realization.base_realization();
    double gap = 0;
    for (const auto& c : dist.layout->base()->maximal_contexts())
        gap = std::max(gap, max_gap(pushed.table(c), context_distribution(base, c)));
    return gap;
}

std::vector<std::size_t> all_choices_digits(std::size_t k, const DistributedSimulation& s) {
    return radix_digits(k, std::vector<std::size_t>(s.base_sites(), s.paths().paths.size()));
}

std::vector<std::uint32_t> run_key(const Run& run) {
    std::vector<std::uint32_t> key;
    for (const auto& s : run) {
        key.push_back(static_cast<std::uint32_t>(s.domain.size()));
        key.insert(key.end(), s.domain.begin(), s.domain.end());
        key.insert(key.end(), s.values.begin(), s.values.end());
    }
    return key;
}

Distributed chsh_two_round(const RootedGraph& g) {
    auto chsh = chsh_model();
    const auto& r = *chsh.realization;
    return build_two_round(chsh.scenario, 2, r.state,
                           [&](std::size_t i, std::size_t x) { return r.measurements[chsh.scenario->measurement(i, x)]; },
                           g);
}

}  // namespace

TEST_CASE("rooted graphs: distances, radius and builders") {
    auto l3 = line(3);
    CHECK(l3.size() == 3);
    CHECK(l3.label(0) == "1");
    CHECK(l3.distances() == std::vector<std::size_t>{0, 1, 2});
    CHECK(l3.radius() == 3);
    CHECK(l3.degree() == 2);

    auto grid = hypergrid(3, 2);
    CHECK(grid.size() == 9);
    CHECK(grid.label(0) == "1.1");
    CHECK(grid.label(5) == "2.3");
    CHECK(grid.edges().size() == 12);
    CHECK(grid.degree() == 4);
    CHECK(grid.radius() == 5);

    auto tree = kary_tree(2, 3);
    CHECK(tree.size() == 7);
    CHECK(tree.label(6) == "3.4");
    CHECK(tree.radius() == 3);
    CHECK(tree.degree() == 3);
    CHECK(tree.neighbours(0) == std::vector<std::size_t>{1, 2});

    CHECK(line(1).radius() == 1);
    CHECK_THROWS_AS(RootedGraph({"a", "b"}, {}, 0), Error);
    CHECK_THROWS_AS(RootedGraph({"a", "a"}, {{0, 1}}, 0), Error);
}

TEST_CASE("minimal path distributions are valid and lexicographically least") {
    for (const auto& g : {line(4), hypergrid(3, 2), kary_tree(3, 3), hypergrid(2, 3)}) {
        auto d = min_path_distribution(g);
        CHECK(check_path_distribution(g, d).empty());
        for (std::size_t v = 0; v < g.size(); ++v) CHECK(d.paths[v].size() == g.distances()[v] + 1);
    }
    auto grid = hypergrid(2, 2);  // 1.1 - 1.2, 1.1 - 2.1, 1.2 - 2.2, 2.1 - 2.2
    CHECK(min_path_distribution(grid).paths[3] == Path{0, 1, 3});

    auto g = line(3);
    PathDistribution bad = min_path_distribution(g);
    bad.paths[2] = {0, 2};
    CHECK_FALSE(check_path_distribution(g, bad).empty());
    bad = min_path_distribution(g);
    bad.weights[0] = Prob(ratio(2, 3));
    bad.weights[1] = Prob(Rational(0));
    CHECK_FALSE(check_path_distribution(g, bad).empty());
}

TEST_CASE("distributed scenario layout") {
    auto dist = build_single_round(site_names(2), 2, random_state(site_names(2), 2, 7), line(3));
    const auto& layout = *dist.layout;
    const auto& sc = *layout.scenario();
    CHECK(sc.site_count() == 6);
    CHECK(sc.multipartite_spec().sites[4] == "q1@2");
    CHECK(layout.site(1, 1) == 4);
    // Root: one Bell setting per neighbour and d^2 Weyl settings. Middle: 2 ordered pairs and 2 * d^2.
    CHECK(sc.multipartite_spec().settings[0].size() == 1 + 4);
    CHECK(sc.multipartite_spec().settings[1].size() == 2 + 8);
    CHECK(sc.multipartite_spec().settings[2].size() == 0 + 4);
    CHECK(sc.label(layout.bell(0, 1, 0, 2)) == "q0@2/bell:1:3");
    CHECK(sc.label(layout.endpoint(1, 2, 1, 3)) == "q1@3/weyl:2:1,1");
    CHECK(sc.multipartite_spec().outcomes[0][0].front() == "0,0");
    CHECK(layout.qudits(0, 0) == std::vector<std::string>{"q0", "q0@1>2"});
    CHECK(layout.qudits(0, 1) == std::vector<std::string>{"q0@2>1", "q0@2>3"});
    CHECK(dist.realization.qudit_count() == 2 + 2 * 2 * 2);

    CHECK_THROWS_AS(build_single_round({"a@b"}, 2, random_state({"a@b"}, 2, 1), line(2)), Error);

    auto two = chsh_two_round(line(2));
    const auto& tsc = *two.layout->scenario();
    CHECK(tsc.multipartite_spec().settings[0].size() == 2 + 1 + 1);
    CHECK(tsc.multipartite_spec().settings[1].size() == 1 * 2 * 4 + 1);
    CHECK(tsc.label(two.layout->identity(0, 1)) == "A@2/•");
}

TEST_CASE("single-node graph: the distributed model is the base model") {
    auto sites = site_names(3);
    auto dist = build_single_round(sites, 2, random_state(sites, 2, 11), line(1));
    CHECK(dist.simulation.choice_count() == 1);
    CHECK(pushforward_gap(dist) < 1e-12);
    auto acc = quantum_circuit_accounting(*dist.layout);
    CHECK(acc.depth == 2);
    CHECK(acc.max_fan_in == 3);
    CHECK(acc.max_fan_in_exact == 3);
}

TEST_CASE("single-round pushforward recovers e_psi") {
    struct Instance {
        std::size_t sites;
        int d;
        RootedGraph g;
    };
    std::vector<Instance> instances{{1, 2, line(2)}, {1, 3, line(2)}, {2, 2, line(2)}, {1, 2, line(3)}};
    std::uint64_t seed = 100;
    for (const auto& inst : instances) {
        auto names = site_names(inst.sites);
        auto dist = build_single_round(names, inst.d, random_state(names, inst.d, seed++), inst.g);
        CHECK(pushforward_gap(dist) < 1e-9);
    }
}

TEST_CASE("teleportation sign convention is fixed by the statevector") {
    auto names = site_names(1);
    auto psi = random_state(names, 3, 2024);
    std::map<std::pair<int, int>, bool> matches;
    for (int bell_sign : {-1, 1})
        for (int correction_sign : {-1, 1}) {
            auto dist = build_single_round(names, 3, psi, line(2), {bell_sign, correction_sign});
            matches[{bell_sign, correction_sign}] = pushforward_gap(dist) < 1e-12;
        }
    CHECK(matches[{kBellSecondComponentSign, kWeylCorrectionSign}]);
    CHECK(std::count_if(matches.begin(), matches.end(), [](const auto& m) { return m.second; }) == 1);
}

TEST_CASE("two-round pushforward recovers the CHSH model") {
    for (const auto& g : {line(2), line(3)}) {
        auto dist = chsh_two_round(g);
        CHECK(pushforward_gap(dist) < 1e-9);
    }
}

TEST_CASE("closed-form teleportation rule equals the statevector") {
    auto names = site_names(2);
    std::vector<Distributed> cases{build_single_round(names, 2, random_state(names, 2, 5), line(2)),
                                   build_single_round(site_names(1), 3, random_state(site_names(1), 3, 6), line(3)),
                                   chsh_two_round(line(3))};
    for (const auto& dist : cases) {
        auto sv = std::make_shared<const QuantumRealization>(dist.realization.statevector());
        Behaviour source = quantum_behaviour(sv, dist.layout->rounds());
        const auto& base = *dist.layout->base();
        for (std::size_t k = 0; k < dist.simulation.choice_count(); ++k) {
            auto choice = all_choices_digits(k, dist.simulation);
            auto t = dist.simulation.deterministic(choice);
            for (const auto& c : base.maximal_contexts()) {
                auto q = t.compose(MeasurementProtocol::single(c, base));
                CHECK(max_gap(teleportation_backend_table(dist, choice, c), source.table(q)) < 1e-9);
            }
        }
    }
}

TEST_CASE("sampled teleportation rule passes a chi-square test against the statevector") {
    const std::size_t samples = 20000;
    std::mt19937_64 rng(99);
    auto names = site_names(1);
    std::vector<Distributed> cases{build_single_round(names, 3, random_state(names, 3, 8), line(2)),
                                   chsh_two_round(line(2))};
    for (const auto& dist : cases) {
        auto sv = std::make_shared<const QuantumRealization>(dist.realization.statevector());
        Behaviour source = quantum_behaviour(sv, dist.layout->rounds());
        const auto& base = *dist.layout->base();
        for (std::size_t k = 0; k < dist.simulation.choice_count(); ++k) {
            auto choice = all_choices_digits(k, dist.simulation);
            auto t = dist.simulation.deterministic(choice);
            for (const auto& c : base.maximal_contexts()) {
                auto q = t.compose(MeasurementProtocol::single(c, base));
                auto runs = q.runs(*dist.layout->scenario());
                std::map<std::vector<std::uint32_t>, std::size_t> index;
                for (std::size_t r = 0; r < runs.size(); ++r) index[run_key(runs[r])] = r;
                std::vector<double> probs;
                for (const auto& p : source.table(q)) probs.push_back(p.to_double());
                std::vector<std::size_t> counts(runs.size(), 0);
                TeleportationSampler sampler(dist, t, c);
                for (std::size_t s = 0; s < samples; ++s) {
                    auto it = index.find(run_key(sampler.draw(rng)));
                    REQUIRE(it != index.end());
                    ++counts[it->second];
                }
                auto result = chi_square_test(counts, probs);
                CHECK(result.impossible == 0);
                CHECK(result.p_value > 0.001);
            }
        }
    }
}

TEST_CASE("structured joint settings") {
    auto names = site_names(2);
    auto dist = build_single_round(names, 2, random_state(names, 2, 3), line(3));
    const auto& layout = *dist.layout;
    // q0 routed 1 -> 2 -> 3 with setting 1,0; q1 measured at the root with setting 0,1.
    Context joint{layout.bell(0, 0, kNoNode, 1), layout.bell(0, 1, 0, 2), layout.endpoint(0, 2, 1, 2),
                  layout.endpoint(1, 0, kNoNode, 1)};
    std::sort(joint.begin(), joint.end());
    auto parsed = parse_structured(layout, joint);
    CHECK(parsed.base_sites == std::vector<std::size_t>{0, 1});
    CHECK(parsed.paths == std::vector<Path>{{0, 1, 2}, {0}});
    CHECK(parsed.base_settings == std::vector<std::size_t>{2, 1});

    std::mt19937_64 rng(4);
    auto section = teleportation_backend_sample(dist, joint, rng);
    CHECK(section.domain == joint);

    Context broken{layout.bell(0, 0, kNoNode, 1), layout.endpoint(0, 2, 1, 2)};
    std::sort(broken.begin(), broken.end());
    CHECK_THROWS_AS(parse_structured(layout, broken), Error);
    Context dangling{layout.bell(0, 0, kNoNode, 1)};
    CHECK_THROWS_AS(parse_structured(layout, dangling), Error);
    Context backwards{layout.bell(0, 0, kNoNode, 1), layout.endpoint(0, 1, 2, 0)};
    std::sort(backwards.begin(), backwards.end());
    CHECK_THROWS_AS(parse_structured(layout, backwards), Error);
    try {
        parse_structured(layout, broken);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnstructuredSetting);
    }
}

TEST_CASE("declared dependency sets of t_v are consistent") {
    auto names = site_names(2);
    auto single = build_single_round(names, 2, random_state(names, 2, 9), line(3));
    auto t = single.simulation.deterministic({2, 1});
    auto sets = dependency_sets(t);
    CHECK(sets.in[0][0] == std::vector<std::size_t>{single.layout->site(0, 2)});
    CHECK(sets.out[0][0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(sets.out[0][1] == std::vector<std::size_t>{3, 4});

    auto two = chsh_two_round(line(3));
    auto t2 = two.simulation.deterministic({2, 0});
    auto sets2 = dependency_sets(t2);
    CHECK(sets2.in[0][0].empty());
    CHECK(sets2.in[1][0] == std::vector<std::size_t>{2});
    CHECK(sets2.in[1][1] == std::vector<std::size_t>{3});
}

TEST_CASE("quantum circuit accounting") {
    auto names = site_names(3);
    for (std::size_t n = 2; n <= 6; ++n) {
        auto g = hypergrid(n, 2);
        DistributedScenario layout(DistributionKind::SingleRound, g, 2, weyl_scenario(names, 2));
        auto a = quantum_circuit_accounting(layout);
        CHECK(a.depth == 2);
        CHECK(a.max_fan_in == std::max<std::size_t>(3, g.degree() + 2));
        CHECK(a.max_fan_in_exact <= a.max_fan_in);
        CHECK(a.n_gates == 1 + 3 * g.edges().size() + 3 * g.size());
    }
    auto two = chsh_two_round(line(3));
    auto a = quantum_circuit_accounting(*two.layout);
    CHECK(a.depth == 3);
    CHECK(a.n_gates == 1 + 2 * 2 + 2 * 2 * 3);
}

TEST_CASE("statevector respects the amplitude cap") {
    auto names = site_names(3);
    auto dist = build_single_round(names, 3, random_state(names, 3, 1), hypergrid(3, 2));
    CHECK_THROWS_AS(dist.realization.statevector(), Error);
}
