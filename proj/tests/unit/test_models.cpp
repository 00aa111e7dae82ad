#include "doctest.h"

#include "contextua/analysis.hpp"
#include "contextua/models.hpp"

#include <cmath>
#include <numbers>

using namespace contextua;

namespace {

double max_gap(const EmpiricalModel& a, const EmpiricalModel& b) {
    double gap = 0;
    for (std::size_t k = 0; k < a.tables().size(); ++k)
        for (std::size_t j = 0; j < a.tables()[k].size(); ++j)
            gap = std::max(gap, std::fabs(a.tables()[k][j].to_double() - b.tables()[k][j].to_double()));
    return gap;
}

}  // namespace

TEST_CASE("stored tables match their realizations") {
    for (const auto& m : all_fixtures()) {
        CAPTURE(m.name);
        if (!m.realization || !m.empirical) continue;
        CHECK(max_gap(realize(*m.realization), *m.empirical) <= 1e-9);
    }
}

TEST_CASE("every stored table is no-signalling") {
    for (const auto& m : all_fixtures()) {
        CAPTURE(m.name);
        if (m.empirical) CHECK(check_no_signalling(*m.empirical).ok);
        CHECK(m.possibilistic.flasque());
    }
}

TEST_CASE("bell table rows") {
    auto e = bell_model().empirical.value();
    const auto& t = e.tables();
    CHECK(t[0][0].rational() == Rational(1, 2));
    CHECK(t[0][1].rational() == 0);
    CHECK(t[1][0].rational() == Rational(3, 8));
    CHECK(t[3][1].rational() == Rational(3, 8));
}

TEST_CASE("pr box and hardy rows") {
    auto pr = pr_box().empirical.value();
    std::vector<bool> last;
    for (const auto& p : pr.tables()[3]) last.push_back(!p.is_zero());
    CHECK(last == std::vector<bool>{false, true, true, false});
    auto hardy = hardy_model().possibilistic;
    CHECK(hardy.supports()[0] == std::vector<bool>{true, true, true, true});
    CHECK(hardy.supports()[1] == std::vector<bool>{false, true, true, true});
    CHECK(hardy.supports()[2] == std::vector<bool>{false, true, true, true});
    CHECK(hardy.supports()[3] == std::vector<bool>{true, true, true, false});
}

TEST_CASE("game values") {
    auto chsh = success_probability(*chsh_model().empirical, chsh_game());
    CHECK(std::fabs(chsh.to_double() - std::pow(std::cos(std::numbers::pi / 8), 2)) <= 1e-9);
    auto ghz = success_probability(*ghz_model().empirical, ghz_game());
    REQUIRE(ghz.exact());
    CHECK(ghz.rational() == 1);
    CHECK(classical_bound_by_enumeration(ghz_game()) == Rational(3, 4));
    CHECK(classical_bound_by_enumeration(chsh_game()) == Rational(3, 4));
    auto ms = magic_square_game();
    CHECK(std::fabs(success_probability(*magic_square_model().empirical, ms).to_double() - 1.0) <= 1e-9);
    MESSAGE("magic square classical bound " << format_rational(*ms.classical_bound()));
    CHECK(*ms.classical_bound() < 1);
}

TEST_CASE("trivial game accepts everything") {
    for (const auto& m : all_fixtures()) {
        if (!m.empirical) continue;
        auto p = success_probability(*m.empirical, trivial_game(m.scenario));
        CHECK(std::fabs(p.to_double() - 1.0) <= 1e-12);
    }
}
