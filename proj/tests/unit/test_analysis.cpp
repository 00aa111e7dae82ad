#include "doctest.h"

#include "contextua/analysis.hpp"
#include "contextua/models.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace contextua;

namespace {

// Weak-duality certificate: feasible primal and dual with equal objectives.
void check_certificate(const Scenario& sc, const CFResult& r) {
    Context all;
    for (MeasurementId x = 0; x < sc.size(); ++x) all.push_back(x);
    auto radices = sc.radices(all);
    std::size_t n = radix_product(radices);
    REQUIRE(r.assignment_count == n);
    std::vector<Rational> weight(n, 0);
    for (const auto& [g, w] : r.witness) weight.at(g) = w.to_rational();
    Rational primal = 0, dual = 0;
    std::vector<Rational> used(r.rows.size(), 0);
    for (std::size_t g = 0; g < n; ++g) {
        auto digits = radix_digits(g, radices);
        std::vector<Outcome> assignment(digits.begin(), digits.end());
        Rational cover = 0;
        const Rational& w = weight[g];
        CHECK(sgn(w) >= 0);
        primal += w;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            auto s = assignment_section(assignment, r.rows[i].context);
            if (sc.section_index(s) != r.rows[i].section) continue;
            cover += r.dual[i].to_rational();
            used[i] += w;
        }
        CHECK(cover >= 1);
    }
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(used[i] <= r.rows[i].bound.to_rational());
        CHECK(sgn(r.dual[i].to_rational()) >= 0);
        dual += r.dual[i].to_rational() * r.rows[i].bound.to_rational();
    }
    CHECK(primal == r.ncf.rational());
    CHECK(dual == r.ncf.rational());
}

EmpiricalModel random_model(ScenarioPtr sc, std::mt19937_64& rng, bool deterministic) {
    // Mixture of a few deterministic global assignments, so the model is noncontextual.
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<std::vector<Outcome>> gs;
    for (int k = 0; k < (deterministic ? 1 : 3); ++k) {
        std::vector<Outcome> g;
        for (MeasurementId x = 0; x < sc->size(); ++x) g.push_back(static_cast<Outcome>(bit(rng)));
        gs.push_back(g);
    }
    return EmpiricalModel::from_function(sc, [&](const LocalSection& s) {
        Rational p = 0;
        for (const auto& g : gs)
            if (assignment_section(g, s.domain) == s) p += Rational(1, static_cast<long>(gs.size()));
        return Prob(p);
    });
}

}  // namespace

TEST_CASE("no-signalling violation is reported with its gap") {
    auto sc = bell_scenario();
    auto e = EmpiricalModel::from_function(sc, [&](const LocalSection& s) {
        // a = 0 surely next to b, a = 1 surely next to b'.
        bool with_b = sc->setting_of(s.domain[1]) == 0;
        Outcome a = with_b ? 0 : 1;
        return Prob(Rational(s.values[0] == a && s.values[1] == 0 ? 1 : 0));
    });
    auto r = check_no_signalling(e);
    CHECK_FALSE(r.ok);
    CHECK(r.gap.rational() == 1);
    CHECK(sc->label(r.measurement) == "A/a");
}

TEST_CASE("possibilistic classification") {
    CHECK(classify_possibilistic(pr_box().possibilistic).kind == PossibilisticClass::StronglyContextual);
    auto hardy = classify_possibilistic(hardy_model().possibilistic);
    CHECK(hardy.kind == PossibilisticClass::LogicallyContextual);
    REQUIRE(hardy.non_extendable.size() == 1);
    CHECK(bell_scenario()->context_to_string(hardy.non_extendable[0].domain) == "{A/a, B/b}");
    CHECK(hardy.non_extendable[0].values == std::vector<Outcome>{0, 0});
    CHECK(classify_possibilistic(mermin_square_model().possibilistic).kind == PossibilisticClass::StronglyContextual);
    CHECK(classify_possibilistic(ghz_model().possibilistic).kind == PossibilisticClass::StronglyContextual);
    std::mt19937_64 rng(7);
    auto det = random_model(bell_scenario(), rng, true);
    CHECK(classify_possibilistic(PossibilisticModel::support_of(det)).kind == PossibilisticClass::Noncontextual);
}

TEST_CASE("contextual fraction of fixtures") {
    auto pr = contextual_fraction(*pr_box().empirical);
    CHECK(pr.exact);
    CHECK(pr.cf.rational() == 1);
    check_certificate(*bell_scenario(), pr);

    auto bell = contextual_fraction(*bell_model().empirical);
    CHECK(bell.ncf.rational() == Rational(3, 4));
    check_certificate(*bell_scenario(), bell);

    auto hardy = contextual_fraction(*hardy_model().empirical);
    CHECK(sgn(hardy.cf.rational()) > 0);
    check_certificate(*bell_scenario(), hardy);

    auto chsh = contextual_fraction(*chsh_model().empirical);
    CHECK_FALSE(chsh.exact);
    double c2 = std::pow(std::cos(std::numbers::pi / 8), 2);
    CHECK(chsh.cf.to_double() >= c2 - 0.75 - 1e-9);

    auto ghz = contextual_fraction(*ghz_model().empirical);
    CHECK(ghz.cf.rational() == 1);
}

TEST_CASE("cf vanishes exactly on noncontextual models") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        auto e = random_model(bell_scenario(), rng, trial % 2 == 0);
        auto r = contextual_fraction(e);
        CHECK(r.cf.rational() == 0);
        check_certificate(*bell_scenario(), r);
    }
    // Convex mixtures with the PR box are contextual in proportion.
    auto pr = *pr_box().empirical;
    auto det = random_model(bell_scenario(), rng, false);
    for (int k = 1; k < 4; ++k) {
        Rational lambda = ratio(k, 4);
        std::vector<std::vector<Prob>> tables = det.tables();
        for (std::size_t c = 0; c < tables.size(); ++c)
            for (std::size_t j = 0; j < tables[c].size(); ++j)
                tables[c][j] = Prob(lambda * pr.tables()[c][j].rational() + (1 - lambda) * det.tables()[c][j].rational());
        auto r = contextual_fraction(EmpiricalModel(bell_scenario(), tables));
        check_certificate(*bell_scenario(), r);
        CHECK(r.cf.rational() <= lambda);
    }
    // PR box under white noise crosses the classical boundary at lambda = 1/2.
    for (int k = 0; k <= 4; ++k) {
        Rational lambda = ratio(k, 4);
        auto e = EmpiricalModel::from_function(bell_scenario(), [&](const LocalSection& s) {
            return Prob(lambda * pr.probability(s).rational() + (1 - lambda) * Rational(1, 4));
        });
        auto r = contextual_fraction(e);
        check_certificate(*bell_scenario(), r);
        if (k <= 2) CHECK(r.cf.rational() == 0);
        else CHECK(sgn(r.cf.rational()) > 0);
    }
}

TEST_CASE("double arithmetic agrees with exact") {
    auto e = *bell_model().empirical;
    auto exact = contextual_fraction(e);
    auto approx = contextual_fraction(e, {Arithmetic::Double});
    CHECK(std::fabs(exact.cf.to_double() - approx.cf.to_double()) <= 1e-9);
}

TEST_CASE("assignment cap") {
    CHECK_THROWS_AS(contextual_fraction(*bell_model().empirical, {Arithmetic::Auto, 8}), Error);
}

TEST_CASE("resource inequality on fixtures") {
    for (const auto& m : all_fixtures()) {
        if (!m.empirical) continue;
        for (const auto& g : all_games()) {
            if (!g.scenario()->same_as(*m.scenario)) continue;
            CAPTURE(m.name);
            CAPTURE(g.name());
            auto r = resource_inequality_check(*m.empirical, g);
            CHECK(r.holds);
        }
    }
    auto pr = resource_inequality_check(*pr_box().empirical, chsh_game());
    CHECK(pr.p_success.rational() == 1);
    CHECK(pr.slack.rational() == Rational(3, 4));
}

TEST_CASE("restriction of behaviours") {
    auto e = *bell_model().empirical;
    auto b = e.as_behaviour(1);
    auto same = restrict_behaviour(b, {0, 1}, {});
    for (const auto& c : bell_scenario()->maximal_contexts()) {
        auto t1 = b.table(c), t2 = same.table(c);
        for (std::size_t j = 0; j < t1.size(); ++j) CHECK(t1[j].rational() == t2[j].rational());
    }
    auto only_a = restrict_behaviour(b, {0}, {{1, 1}});
    auto ta = only_a.table(Context{0});
    auto marginal = e.marginal(Context{0});
    CHECK(ta[0].rational() == marginal[0].rational());
    auto none = restrict_behaviour(b, {}, {{0, 0}, {1, 0}});
    CHECK(none.table(Context{}).size() == 1);
    CHECK_THROWS_AS(restrict_behaviour(b, {0}, {}), Error);
}
