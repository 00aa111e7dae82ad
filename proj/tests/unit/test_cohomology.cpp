#include "doctest.h"

#include "contextua/analysis.hpp"
#include "contextua/cohomology.hpp"
#include "contextua/linsolve.hpp"
#include "contextua/models.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

using namespace contextua;

namespace {

using Dense = std::vector<std::vector<long long>>;

// Exhaustive search over Z_m^n.
bool brute_solvable_mod(const Dense& a, const std::vector<long long>& b, std::size_t n, long long m) {
    std::vector<long long> x(n, 0);
    for (;;) {
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            long long s = 0;
            for (std::size_t j = 0; j < n; ++j) s += a[i][j] * x[j];
            ok = mod(s - b[i], m) == 0;
        }
        if (ok) return true;
        std::size_t k = 0;
        while (k < n && ++x[k] == m) x[k++] = 0;
        if (k == n) return false;
    }
}

std::vector<SparseRow> to_rows(const Dense& a, const std::vector<long long>& b) {
    std::vector<SparseRow> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
        SparseRow r;
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j]) r.terms.emplace_back(j, a[i][j]);
        r.rhs = Integer(static_cast<long>(b[i]));
        rows.push_back(std::move(r));
    }
    return rows;
}

Dense random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, int lo, int hi) {
    std::uniform_int_distribution<int> u(lo, hi);
    Dense a(r, std::vector<long long>(c));
    for (auto& row : a)
        for (auto& v : row) v = u(rng);
    return a;
}

// Cofactor determinant, fine for k <= 4.
Integer det(const std::vector<std::vector<Integer>>& m) {
    const std::size_t k = m.size();
    if (k == 1) return m[0][0];
    Integer out = 0;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<std::vector<Integer>> minor;
        for (std::size_t i = 1; i < k; ++i) {
            std::vector<Integer> row;
            for (std::size_t c = 0; c < k; ++c)
                if (c != j) row.push_back(m[i][c]);
            minor.push_back(std::move(row));
        }
        Integer t = m[0][j] * det(minor);
        out += (j % 2 == 0) ? t : Integer(-t);
    }
    return out;
}

// gcd of all k x k minors.
Integer minor_gcd(const std::vector<std::vector<Integer>>& a, std::size_t k) {
    const std::size_t r = a.size(), c = a[0].size();
    Integer g = 0;
    std::vector<std::size_t> rows, cols;
    std::function<void(std::size_t)> pick_cols = [&](std::size_t from) {
        if (cols.size() == k) {
            std::vector<std::vector<Integer>> m;
            for (auto i : rows) {
                std::vector<Integer> row;
                for (auto j : cols) row.push_back(a[i][j]);
                m.push_back(std::move(row));
            }
            Integer d = det(m);
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
            return;
        }
        for (std::size_t j = from; j < c; ++j) {
            cols.push_back(j);
            pick_cols(j + 1);
            cols.pop_back();
        }
    };
    std::function<void(std::size_t)> pick_rows = [&](std::size_t from) {
        if (rows.size() == k) return pick_cols(0);
        for (std::size_t i = from; i < r; ++i) {
            rows.push_back(i);
            pick_rows(i + 1);
            rows.pop_back();
        }
    };
    pick_rows(0);
    return g;
}

// Z_n -> Z_{n/d}, with Z_d acting by x -> x + g n/d.
Bundle cyclic_bundle(std::size_t n, int d) {
    const std::size_t k = n / static_cast<std::size_t>(d);
    std::vector<std::size_t> act(static_cast<std::size_t>(d) * n), proj(n);
    for (std::size_t g = 0; g < static_cast<std::size_t>(d); ++g)
        for (std::size_t x = 0; x < n; ++x) act[g * n + x] = (x + g * k) % n;
    for (std::size_t x = 0; x < n; ++x) proj[x] = x % k;
    return Bundle(PartialMonoid::cyclic(n), PartialMonoid::cyclic(k), GroupAction(d, n, act), proj);
}

// Every set-theoretic section of sub satisfying the homomorphism conditions.
std::vector<std::vector<std::size_t>> local_splittings(const Bundle& b, const std::vector<std::size_t>& sub) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> pick(sub.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == sub.size()) {
            std::map<std::size_t, std::size_t> r;
            for (std::size_t i = 0; i < sub.size(); ++i) r[sub[i]] = pick[i];
            if (r[b.base().zero()] != b.total().zero()) return;
            for (auto x : sub)
                for (auto y : sub)
                    if (b.base().defined(x, y) && b.total().raw(r[x], r[y]) != r[b.base().raw(x, y)]) return;
            out.push_back(pick);
            return;
        }
        for (auto e : b.fiber(sub[k])) {
            pick[k] = e;
            rec(k + 1);
        }
    };
    rec(0);
    return out;
}

// All submonoids of a small partial monoid.
std::vector<std::vector<std::size_t>> submonoids(const PartialMonoid& m) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m.size()); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t x = 0; x < m.size(); ++x)
            if (mask >> x & 1) s.push_back(x);
        if (m.is_submonoid(s)) out.push_back(std::move(s));
    }
    return out;
}

void check_obstruction_against_search(const Bundle& b) {
    const auto splittings = all_right_splittings(b);
    for (const auto& sub : submonoids(b.base()))
        for (const auto& local : local_splittings(b, sub)) {
            bool extends = false;
            for (const auto& r : splittings) {
                bool agree = true;
                for (std::size_t k = 0; k < sub.size(); ++k) agree = agree && r[sub[k]] == local[k];
                extends = extends || agree;
            }
            auto ob = bundle_obstruction(b, sub, local);
            CHECK(ob.vanishes == extends);
            if (ob.vanishes) {
                REQUIRE(ob.extension);
                CHECK(is_right_splitting(b, *ob.extension));
            } else {
                CHECK(ob.certificate);
            }
        }
}

Vector basis_state(long dim, long j) {
    Vector v = Vector::Zero(dim);
    v[j] = 1;
    return v;
}

WeylElement random_weyl(std::mt19937& rng, int d, std::size_t n) {
    std::uniform_int_distribution<int> u(0, d - 1);
    WeylElement e;
    for (std::size_t i = 0; i < n; ++i) e.labels.push_back({u(rng), u(rng)});
    return e;
}

}  // namespace

TEST_CASE("solve_mod agrees with exhaustive search") {
    std::mt19937 rng(11);
    for (long long d : {2, 3, 4, 6}) {
        for (int trial = 0; trial < 150; ++trial) {
            const std::size_t n = 1 + trial % 3, r = 1 + (trial / 3) % 4;
            auto a = random_matrix(rng, r, n, -3, 5);
            auto b = random_matrix(rng, 1, r, 0, static_cast<int>(d) - 1)[0];
            auto sol = solve_mod(n, to_rows(a, b), d);
            CHECK(sol.solvable == brute_solvable_mod(a, b, n, d));
            if (sol.solvable) {
                for (std::size_t i = 0; i < r; ++i) {
                    long long s = 0;
                    for (std::size_t j = 0; j < n; ++j) s += a[i][j] * sol.x[j];
                    CHECK(mod(s - b[i], d) == 0);
                }
            } else {
                CHECK(sol.certificate);
            }
        }
    }
}

TEST_CASE("solve_integer agrees with local solvability at small prime powers") {
    // Entries in {-1, 0, 1} on at most three unknowns keep every invariant factor
    // and every rational inconsistency small enough for these moduli to detect.
    std::mt19937 rng(12);
    const std::vector<long long> moduli = {2, 3, 4, 5, 7, 8, 9, 11, 13, 16};
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 1 + trial % 3, r = 1 + (trial / 3) % 3;
        auto a = random_matrix(rng, r, n, -1, 1);
        std::vector<long long> b(r);
        if (trial % 2 == 0) {
            auto x0 = random_matrix(rng, 1, n, -4, 4)[0];
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < n; ++j) b[i] += a[i][j] * x0[j];
        } else {
            b = random_matrix(rng, 1, r, -3, 3)[0];
        }
        bool oracle = true;
        for (auto m : moduli) oracle = oracle && brute_solvable_mod(a, b, n, m);
        auto sol = solve_integer(n, to_rows(a, b));
        CHECK(sol.solvable == oracle);
        if (sol.solvable)
            for (std::size_t i = 0; i < r; ++i) {
                Integer s = 0;
                for (std::size_t j = 0; j < n; ++j) s += Integer(static_cast<long>(a[i][j])) * sol.x[j];
                CHECK(s == Integer(static_cast<long>(b[i])));
            }
    }
    // A divisibility obstruction invisible over the rationals.
    auto sol = solve_integer(1, {SparseRow{{{0, 2}}, Integer(1)}});
    CHECK_FALSE(sol.solvable);
    REQUIRE(sol.certificate);
    CHECK(sol.certificate->kind == "divisibility");
}

TEST_CASE("Smith diagonal matches quotients of minor gcds") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t r = 1 + trial % 3, c = 1 + (trial / 3) % 4;
        auto a = random_matrix(rng, r, c, -6, 6);
        std::vector<std::vector<Integer>> z;
        for (const auto& row : a) {
            std::vector<Integer> zr;
            for (auto v : row) zr.push_back(Integer(static_cast<long>(v)));
            z.push_back(std::move(zr));
        }
        auto snf = smith_normal_form(z);
        Integer prev = 1;
        std::size_t k = 1;
        for (; k <= std::min(r, c); ++k) {
            Integer g = minor_gcd(z, k);
            if (g == 0) break;
            REQUIRE(k <= snf.diagonal.size());
            CHECK(abs(snf.diagonal[k - 1]) == g / prev);
            prev = g;
        }
        CHECK(snf.diagonal.size() == k - 1);
        for (std::size_t i = 1; i < snf.diagonal.size(); ++i)
            CHECK(mpz_divisible_p(snf.diagonal[i].get_mpz_t(), snf.diagonal[i - 1].get_mpz_t()));
    }
}

TEST_CASE("kernel_mod generates the exhaustive kernel") {
    std::mt19937 rng(14);
    for (long long d : {2, 3, 4, 6}) {
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t n = 1 + trial % 4, r = 1 + trial % 3;
            auto a = random_matrix(rng, r, n, 0, static_cast<int>(d) - 1);
            std::set<std::vector<long long>> kernel;
            std::vector<long long> x(n, 0);
            for (;;) {
                bool ok = true;
                for (const auto& row : a) {
                    long long s = 0;
                    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
                    ok = ok && mod(s, d) == 0;
                }
                if (ok) kernel.insert(x);
                std::size_t k = 0;
                while (k < n && ++x[k] == d) x[k++] = 0;
                if (k == n) break;
            }
            auto gens = kernel_mod(a, n, d);
            std::set<std::vector<long long>> span{std::vector<long long>(n, 0)};
            bool grew = true;
            while (grew) {
                grew = false;
                for (auto v : std::vector<std::vector<long long>>(span.begin(), span.end()))
                    for (const auto& g : gens) {
                        std::vector<long long> w(n);
                        for (std::size_t j = 0; j < n; ++j) w[j] = mod(v[j] + g[j], d);
                        grew = span.insert(w).second || grew;
                    }
            }
            CHECK(span == kernel);
        }
    }
}

TEST_CASE("partial monoid constructions satisfy the axioms") {
    CHECK_NOTHROW(PartialMonoid::cyclic(5).validate());
    CHECK_NOTHROW(PartialMonoid::wedge(4, 2).validate());
    auto p = PartialMonoid::product(PartialMonoid::wedge(2, 3), PartialMonoid::cyclic(3));
    CHECK_NOTHROW(p.validate());
    CHECK(p.size() == 12);
    CHECK_FALSE(p.defined(1 * 3, 2 * 3));
    auto t = PartialMonoid::wedge(3, 2);
    CHECK(t.size() == 5);
    CHECK(t.is_submonoid({0}));
    CHECK_FALSE(t.is_submonoid({0, 1}));
    CHECK(t.is_submonoid({0, 1, 2}));
    CHECK(t.is_submonoid({0, 1, 2, 3, 4}));
    CHECK_FALSE(t.is_total({0, 1, 3}));
    CHECK_THROWS_AS(t.plus(1, 3), Error);
    // {0, 1, 2} with 1 + 1 = 2 and nothing else: pairwise sums of (1, 1, 1) exist
    // but (1 + 1) + 1 does not.
    const auto u = PartialMonoid::kUndefined;
    PartialMonoid capped(3, 0, {0, 1, 2, 1, 2, u, 2, u, u});
    CHECK_THROWS_AS(capped.validate(), Error);
    // Non-commutative table.
    PartialMonoid bad(2, 0, {0, 1, PartialMonoid::kUndefined, 1});
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("splittings round-trip") {
    auto trivial = Bundle::trivial(3, PartialMonoid::wedge(2, 2));
    // The first projection is a left splitting whose right partner is the inclusion at 0.
    LeftSplitting pi1;
    for (std::size_t n = 0; n < trivial.total().size(); ++n) pi1.push_back(static_cast<long long>(n / 3));
    CHECK(is_left_splitting(trivial, pi1));
    auto r = right_from_left(trivial, pi1);
    for (std::size_t m = 0; m < 3; ++m) CHECK(r[m] == m);
    CHECK(left_from_right(trivial, r) == pi1);
    auto h = trivialization_of(trivial, pi1);
    CHECK(is_trivialization(trivial, h));
    CHECK(left_of_trivialization(trivial, h) == pi1);
    for (long long a = 0; a < 3; ++a)
        for (std::size_t m = 0; m < 3; ++m) {
            auto n = trivialization_inverse(trivial, h, a, m);
            CHECK(h[n] == std::make_pair(a, m));
        }

    for (auto [n, d] : std::vector<std::pair<std::size_t, int>>{{6, 2}, {6, 3}, {12, 3}, {10, 2}}) {
        auto b = cyclic_bundle(n, d);
        auto all = all_right_splittings(b);
        CHECK(all.size() == 1);  // gcd(d, n/d) = 1 here
        for (const auto& rs : all) {
            auto l = left_from_right(b, rs);
            CHECK(is_left_splitting(b, l));
            CHECK(right_from_left(b, l) == rs);
            CHECK(left_from_right(b, right_from_left(b, l)) == l);
        }
    }
    LeftSplitting broken(trivial.total().size(), 0);
    CHECK_THROWS_AS(trivialization_of(trivial, broken), Error);
    try {
        trivialization_of(trivial, broken);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotActionHomomorphism);
    }
}

TEST_CASE("coboundary squares to zero") {
    std::vector<PartialMonoid> monoids = {PartialMonoid::cyclic(3), PartialMonoid::cyclic(4), PartialMonoid::wedge(2, 3),
                                          PartialMonoid::wedge(3, 2), PartialMonoid::wedge(4, 3),
                                          PartialMonoid::product(PartialMonoid::wedge(2, 2), PartialMonoid::cyclic(2)),
                                          PartialMonoid::product(PartialMonoid::wedge(2, 3), PartialMonoid::cyclic(3))};
    for (const auto& m : monoids)
        for (int d : {2, 3, 4}) {
            CochainComplex cx(m, {m.zero()}, d);
            for (int deg : {0, 1}) {
                const auto count = cx.simplices(deg).size();
                for (std::size_t i = 0; i < count; ++i) {
                    auto f = zero_cochain(cx, deg);
                    f.values[i] = 1;
                    auto dd = coboundary(cx, coboundary(cx, f));
                    for (auto v : dd.values) CHECK(v == 0);
                }
            }
        }
}

TEST_CASE("Delta eta changes by a coboundary when eta changes") {
    std::mt19937 rng(15);
    for (auto b : {cyclic_bundle(4, 2), cyclic_bundle(9, 3), cyclic_bundle(8, 2), Bundle::trivial(2, PartialMonoid::wedge(2, 3))}) {
        CochainComplex cx(b.base(), {b.base().zero()}, b.order());
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::size_t> eta, eta2;
            auto gamma = zero_cochain(cx, 1);
            std::uniform_int_distribution<long long> u(0, b.order() - 1);
            for (std::size_t m = 0; m < b.base().size(); ++m) {
                eta.push_back(b.fiber(m)[static_cast<std::size_t>(u(rng))]);
                gamma.values[m] = m == b.base().zero() ? 0 : u(rng);
            }
            eta[b.base().zero()] = b.total().zero();
            for (std::size_t m = 0; m < b.base().size(); ++m) eta2.push_back(b.action().act(gamma.values[m], eta[m]));
            auto d1 = delta_eta(b, cx, eta), d2 = delta_eta(b, cx, eta2), dg = coboundary(cx, gamma);
            for (std::size_t i = 0; i < d1.values.size(); ++i) CHECK(mod(d2.values[i] - d1.values[i] + dg.values[i], b.order()) == 0);
        }
    }
}

TEST_CASE("bundle obstruction agrees with exhaustive splitting search") {
    // Cyclic extensions split exactly when gcd(d, n/d) = 1.
    for (auto [n, d, splits] : std::vector<std::tuple<std::size_t, int, bool>>{
             {4, 2, false}, {9, 3, false}, {8, 2, false}, {6, 2, true}, {6, 3, true}}) {
        auto b = cyclic_bundle(n, d);
        CHECK(all_right_splittings(b).empty() != splits);
        auto ob = bundle_obstruction(b, {0}, {0});
        CHECK(ob.vanishes == splits);
        check_obstruction_against_search(b);
    }
    check_obstruction_against_search(Bundle::trivial(2, PartialMonoid::cyclic(4)));
    check_obstruction_against_search(Bundle::trivial(2, PartialMonoid::wedge(2, 3)));
    check_obstruction_against_search(Bundle::trivial(3, PartialMonoid::product(PartialMonoid::wedge(2, 2), PartialMonoid::cyclic(2))));
    // Global splittings of the trivial bundle always exist.
    auto t = Bundle::trivial(4, PartialMonoid::wedge(3, 2));
    CHECK(bundle_obstruction(t, {0}, {0}).vanishes);
}

TEST_CASE("Weyl products match matrix products") {
    std::mt19937 rng(16);
    for (int d : {2, 3, 4}) {
        for (std::size_t n : {1u, 2u}) {
            int checked = 0;
            for (int trial = 0; trial < 400 && checked < 40; ++trial) {
                auto a = random_weyl(rng, d, n), b = random_weyl(rng, d, n);
                a.phase = trial % d;
                Matrix ma = weyl_matrix(d, a), mb = weyl_matrix(d, b);
                const bool commute = (ma * mb - mb * ma).norm() < 1e-9;
                CHECK(commute == (weyl_commutator(d, a, b) == 0));
                if (!commute) continue;
                ++checked;
                auto p = weyl_product(d, a, b);
                CHECK((weyl_matrix(d, p) - ma * mb).norm() < 1e-9);
            }
        }
    }
    auto y = parse_weyl(2, 1, "Y");
    Matrix pauli_y(2, 2);
    pauli_y << 0, Complex(0, -1), Complex(0, 1), 0;
    CHECK((weyl_matrix(2, y) - pauli_y).norm() < 1e-12);
    CHECK(weyl_text(2, parse_weyl(2, 2, "-YX")) == "-YX");
    CHECK(weyl_text(3, parse_weyl(3, 2, "2:1,0;0,2")) == "2:1,0;0,2");
}

TEST_CASE("closed Weyl sets") {
    auto id = closed_weyl_set({parse_weyl(3, 1, "0,0")}, 3);
    CHECK(id.elements.size() == 3);
    std::vector<WeylElement> gens = {parse_weyl(2, 2, "XI"), parse_weyl(2, 2, "IX"), parse_weyl(2, 2, "ZI"),
                                     parse_weyl(2, 2, "IZ")};
    auto o = closed_weyl_set(gens, 2);
    CHECK(o.elements.size() == 20);  // the nine square entries and I, with both signs
    CHECK_NOTHROW(o.monoid.validate());
    // Closing again adds nothing.
    auto again = closed_weyl_set(o.elements, 2);
    CHECK(again.elements == o.elements);
    // The square's rows and columns multiply inside the set.
    for (auto [a, b, c] : std::vector<std::tuple<const char*, const char*, const char*>>{
             {"XI", "IX", "XX"}, {"IZ", "ZI", "ZZ"}, {"XZ", "ZX", "YY"}, {"XI", "IZ", "XZ"}, {"IX", "ZI", "ZX"}}) {
        auto p = weyl_product(2, parse_weyl(2, 2, a), parse_weyl(2, 2, b));
        CHECK(p.labels == parse_weyl(2, 2, c).labels);
        CHECK_NOTHROW(o.index_of(p));
    }
    CHECK(weyl_product(2, weyl_product(2, parse_weyl(2, 2, "XX"), parse_weyl(2, 2, "ZZ")), parse_weyl(2, 2, "YY")) ==
          parse_weyl(2, 2, "-II"));
    auto b = bundle_from_closed_set(o.monoid, o.phase_action);
    CHECK(b.base().size() == 10);
    for (std::size_t m = 0; m < 10; ++m) CHECK(b.fiber(m).size() == 2);
    auto contexts = maximal_commuting_contexts(o);
    CHECK(contexts.size() == 6);  // rows and columns
    for (const auto& c : contexts) CHECK(c.size() == 8);
    gens.push_back(parse_weyl(2, 2, "YI"));
    gens.push_back(parse_weyl(2, 2, "IY"));
    auto full = closed_weyl_set(gens, 2);
    CHECK(full.elements.size() == 32);
    CHECK(maximal_commuting_contexts(full).size() == 15);

    try {
        closed_weyl_set(gens, 2, 16);
        FAIL("expected ClosureTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ClosureTooLarge);
    }
}

TEST_CASE("Mermin square and two-qubit Pauli models have no extendable section") {
    for (bool with_y : {false, true}) {
        std::vector<WeylElement> gens = {parse_weyl(2, 2, "XI"), parse_weyl(2, 2, "IX"), parse_weyl(2, 2, "ZI"), parse_weyl(2, 2, "IZ")};
        if (with_y) gens.insert(gens.end(), {parse_weyl(2, 2, "YI"), parse_weyl(2, 2, "IY")});
        auto o = closed_weyl_set(gens, 2);
        auto m = state_independent_model(o);
        auto b = bundle_of(m);
        auto f = support_family(m);
        for (std::size_t c = 0; c < m.contexts.size(); ++c) {
            CHECK(m.sections[c].size() == 4);
            for (std::size_t s = 0; s < m.sections[c].size(); ++s) {
                CHECK_FALSE(section_obstruction(m, b, c, s).vanishes);
                auto cmp = compare_obstructions(m, f, b, c, s);
                CHECK(cmp.failure.empty());
            }
        }
        CHECK(avn_check(f, 2).is_avn);
    }
}

TEST_CASE("GHZ stabilizer splitting does not extend") {
    std::vector<WeylElement> gens;
    for (const char* g : {"XII", "IXI", "IIX", "YII", "IYI", "IIY"}) gens.push_back(parse_weyl(2, 3, g));
    auto o = closed_weyl_set(gens, 2);
    Vector psi = Vector::Zero(8);
    psi[0] = psi[7] = 1 / std::sqrt(2.0);
    auto det_elems = deterministic_elements(o, psi);
    auto b = bundle_from_closed_set(o.monoid, o.phase_action);
    std::map<std::size_t, std::size_t> local;
    for (auto [x, q] : det_elems) local.emplace(b.proj(x), b.action().act(-q, x));
    std::vector<std::size_t> sub, values;
    for (auto [m, n] : local) sub.push_back(m), values.push_back(n);
    CHECK(sub.size() == 8);  // the stabilizer group up to phase
    auto ob = bundle_obstruction(b, sub, values);
    CHECK_FALSE(ob.vanishes);
    CHECK(ob.certificate);
}

TEST_CASE("Cech obstruction on possibilistic fixtures") {
    auto mermin = mermin_square_model().possibilistic;
    auto fm = support_family(mermin);
    for (std::size_t c = 0; c < fm.contexts.size(); ++c)
        for (std::size_t s = 0; s < fm.supports[c].size(); ++s) CHECK_FALSE(cech_obstruction(fm, c, s).vanishes);

    auto bell = bell_model().possibilistic;
    auto fb = support_family(bell);
    for (std::size_t c = 0; c < fb.contexts.size(); ++c)
        for (std::size_t s = 0; s < fb.supports[c].size(); ++s) {
            auto r = cech_obstruction(fb, c, s);
            CHECK(r.vanishes);
            // The family satisfies every equation it was solved for.
            REQUIRE(r.family.size() == fb.contexts.size());
            CHECK(r.family[c][s] == 1);
        }

    // Hardy: soundness at every section, and at least one false positive.
    auto hardy = hardy_model().possibilistic;
    auto cls = classify_possibilistic(hardy);
    REQUIRE_FALSE(cls.non_extendable.empty());
    bool false_positive = false;
    for (const auto& c : hardy.contexts())
        for (const auto& s : hardy.supported_sections(c)) {
            const bool bad = std::find(cls.non_extendable.begin(), cls.non_extendable.end(), s) != cls.non_extendable.end();
            auto r = cech_obstruction(hardy, c, s);
            if (!r.vanishes) CHECK(bad);
            false_positive = false_positive || (bad && r.vanishes);
        }
    CHECK(false_positive);

    SupportFamily split;
    split.measurements = 4;
    split.contexts = {Context{0, 1}, Context{2, 3}};
    split.supports = {{LocalSection{{0, 1}, {0, 0}}}, {LocalSection{{2, 3}, {0, 0}}}};
    try {
        cech_obstruction(split, 0, 0);
        FAIL("expected CoverDisconnected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CoverDisconnected);
    }
}

TEST_CASE("All-versus-Nothing detection") {
    CHECK(avn_check(mermin_square_model().possibilistic).is_avn);
    CHECK(avn_check(ghz_model().possibilistic).is_avn);
    CHECK_FALSE(avn_check(bell_model().possibilistic).is_avn);
    CHECK_FALSE(avn_check(hardy_model().possibilistic).is_avn);

    SupportFamily f;
    f.measurements = 1;
    f.contexts = {Context{0}};
    f.supports = {{LocalSection{{0}, {2}}}};
    try {
        avn_check(f, 2);
        FAIL("expected MixedOutcomeAlphabets");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MixedOutcomeAlphabets);
    }
}

TEST_CASE("collapse and comparison on state-dependent models") {
    std::mt19937 rng(17);
    int instances = 0, cech_vanishing = 0;
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 12; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(trial % 2);
            std::vector<WeylElement> gens;
            for (int k = 0; k < 2; ++k) gens.push_back(random_weyl(rng, d, n));
            auto o = closed_weyl_set(gens, d, 200);
            const long dim = n == 1 ? d : d * d;
            Vector psi = trial % 3 == 0 && n == 2 ? bell_vector(d, WeylLabel{0, 0}) : basis_state(dim, trial % dim);
            auto m = state_dependent_model(o, psi);
            auto b = bundle_of(m);
            auto f = support_family(m);
            for (std::size_t c = 0; c < m.contexts.size(); ++c)
                for (std::size_t s = 0; s < m.sections[c].size(); ++s) {
                    auto cmp = compare_obstructions(m, f, b, c, s);
                    CHECK_MESSAGE(cmp.failure.empty(), cmp.failure);
                    ++instances;
                    cech_vanishing += cmp.cech_vanishes;
                    if (cmp.cech_vanishes) CHECK(cmp.collapse_ok);
                }
        }
    }
    CHECK(instances > 0);
    CHECK(cech_vanishing > 0);

    // A family that is not affine.
    auto o = closed_weyl_set({parse_weyl(2, 1, "Z")}, 2);
    auto m = state_independent_model(o);
    std::vector<std::vector<Integer>> family;
    for (const auto& secs : m.sections) family.emplace_back(secs.size(), Integer(1));
    try {
        collapse_family_to_splitting(m, family);
        FAIL("expected NotAffine");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAffine);
    }
}

TEST_CASE("bundle validation errors") {
    // Trivial action on Z_2 fixes every point.
    try {
        Bundle(PartialMonoid::cyclic(2), PartialMonoid::cyclic(1), GroupAction(2, 2, {0, 1, 0, 1}), {0, 0});
        FAIL("expected ActionNotFree");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ActionNotFree);
    }
    // Everything projects to 0, missing the other base element.
    try {
        Bundle(PartialMonoid::cyclic(2), PartialMonoid::cyclic(2), GroupAction(2, 2, {0, 1, 1, 0}), {0, 0});
        FAIL("expected NoSection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSection);
    }
}
