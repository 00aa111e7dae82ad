#include "contextua/models.hpp"

#include <cmath>
#include <numbers>

namespace contextua {

namespace {

const std::vector<std::string> kBinary{"0", "1"};

std::vector<std::string> triple_labels() {
    std::vector<std::string> out;
    for (int k = 0; k < 8; ++k) out.push_back(std::string{char('0' + (k >> 2 & 1)), char('0' + (k >> 1 & 1)), char('0' + (k & 1))});
    return out;
}

int bit(std::size_t k, int pos) { return static_cast<int>(k >> (2 - pos) & 1); }

// Table entry as a function of the per-site setting indices and outcomes.
EmpiricalModel tabulate(ScenarioPtr sc,
                        const std::function<Rational(const std::vector<std::size_t>&, const std::vector<Outcome>&)>& p) {
    return EmpiricalModel::from_function(sc, [&](const LocalSection& s) {
        std::vector<std::size_t> settings;
        for (auto x : s.domain) settings.push_back(sc->setting_of(x));
        return Prob(p(settings, s.values));
    });
}

Vector qubit(Complex a, Complex b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix columns(const Vector& u, const Vector& v) {
    Matrix m(u.size(), 2);
    m.col(0) = u;
    m.col(1) = v;
    return m;
}

// Real orthonormal basis at angle t: outcome 0 along (cos t, sin t).
ProjectiveMeasurement real_basis(double t) {
    return basis_measurement(columns(qubit(std::cos(t), std::sin(t)), qubit(-std::sin(t), std::cos(t))), kBinary);
}

QuditState bell_pair(const std::vector<std::string>& labels) {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return QuditState(labels, 2, v);
}

NamedModel finish(std::string name, EmpiricalModel e, std::optional<QuantumRealization> r = std::nullopt) {
    auto support = PossibilisticModel::support_of(e);
    auto sc = e.scenario();
    return NamedModel{std::move(name), sc, std::move(e), std::move(support), std::move(r)};
}

Matrix pauli(char c) {
    Matrix m = Matrix::Zero(2, 2);
    switch (c) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
    }
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Magic-square entries, rows b and columns a (0-based): sign and Pauli pair.
Matrix magic_entry(int b, int a) {
    static const char* ops[3][3] = {{"XI", "IX", "XX"}, {"IZ", "ZI", "ZZ"}, {"XZ", "ZX", "YY"}};
    static const int sign[3][3] = {{1, 1, 1}, {1, 1, 1}, {-1, -1, 1}};
    const char* o = ops[b][a];
    return static_cast<double>(sign[b][a]) * kron(pauli(o[0]), pauli(o[1]));
}

// Joint eigenprojectors of three commuting +-1 observables, outcome triple index k.
ProjectiveMeasurement triple_measurement(const std::vector<Matrix>& obs) {
    std::vector<Matrix> ps;
    const Matrix id = Matrix::Identity(4, 4);
    for (std::size_t k = 0; k < 8; ++k) {
        Matrix p = id;
        for (int j = 0; j < 3; ++j) p = p * (id + (bit(k, j) ? -1.0 : 1.0) * obs[j]) / 2.0;
        ps.push_back(p);
    }
    return ProjectiveMeasurement(triple_labels(), std::move(ps));
}

}  // namespace

ScenarioPtr bell_scenario() {
    static ScenarioPtr sc = Scenario::multipartite({{"A", "B"}, {{"a", "a'"}, {"b", "b'"}}, {{kBinary, kBinary}, {kBinary, kBinary}}});
    return sc;
}

ScenarioPtr ghz_scenario() {
    static ScenarioPtr sc = Scenario::multipartite(
        {{"A", "B", "C"}, {{"X", "Y"}, {"X", "Y"}, {"X", "Y"}}, {{kBinary, kBinary}, {kBinary, kBinary}, {kBinary, kBinary}}});
    return sc;
}

ScenarioPtr mermin_square_scenario() {
    static ScenarioPtr sc = Scenario::general(
        {"X1", "X2", "X1X2", "Z2", "Z1", "Z1Z2", "X1Z2", "Z1X2", "Y1Y2"}, std::vector<std::vector<std::string>>(9, kBinary),
        {{"X1", "X2", "X1X2"}, {"Z2", "Z1", "Z1Z2"}, {"X1Z2", "Z1X2", "Y1Y2"},
         {"X1", "Z2", "X1Z2"}, {"X2", "Z1", "Z1X2"}, {"X1X2", "Z1Z2", "Y1Y2"}});
    return sc;
}

ScenarioPtr magic_square_scenario() {
    static ScenarioPtr sc = [] {
        auto t = triple_labels();
        return Scenario::multipartite({{"Alice", "Bob"}, {{"1", "2", "3"}, {"1", "2", "3"}}, {{t, t, t}, {t, t, t}}});
    }();
    return sc;
}

NamedModel ghz_model() {
    auto sc = ghz_scenario();
    // Parity is fixed when an even number of Y's is measured: even for XXX, odd for two Y's.
    auto e = tabulate(sc, [](const std::vector<std::size_t>& x, const std::vector<Outcome>& y) {
        std::size_t ys = x[0] + x[1] + x[2];
        if (ys % 2 == 1) return Rational(1, 8);
        unsigned parity = (y[0] + y[1] + y[2]) % 2;
        return parity == (ys == 2 ? 1u : 0u) ? Rational(1, 4) : Rational(0);
    });
    Vector ghz = Vector::Zero(8);
    ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
    const double h = 1.0 / std::sqrt(2.0);
    auto x = basis_measurement(columns(qubit(h, h), qubit(h, -h)), kBinary);
    auto y = basis_measurement(columns(qubit(h, Complex(0, h)), qubit(h, Complex(0, -h))), kBinary);
    auto r = make_realization(sc, QuditState({"A", "B", "C"}, 2, ghz),
                              [&](std::size_t, std::size_t setting) { return setting == 0 ? x : y; });
    return finish("ghz", std::move(e), std::move(r));
}

NamedModel chsh_model() {
    auto sc = bell_scenario();
    const double c = std::cos(std::numbers::pi / 8), s = std::sin(std::numbers::pi / 8);
    const double h = 1.0 / std::sqrt(2.0);
    auto z = computational_basis(2);
    auto x = basis_measurement(columns(qubit(h, h), qubit(h, -h)), kBinary);
    auto a = basis_measurement(columns(qubit(c, s), qubit(-s, c)), kBinary);
    auto b = basis_measurement(columns(qubit(c, -s), qubit(s, c)), kBinary);
    auto r = make_realization(sc, bell_pair({"A", "B"}), [&](std::size_t site, std::size_t setting) {
        if (site == 0) return setting == 0 ? z : x;
        return setting == 0 ? a : b;
    });
    auto e = realize(r);
    return finish("chsh", std::move(e), std::move(r));
}

NamedModel bell_model() {
    auto sc = bell_scenario();
    auto e = tabulate(sc, [](const std::vector<std::size_t>& x, const std::vector<Outcome>& y) {
        bool equal = y[0] == y[1];
        if (x[0] == 0 && x[1] == 0) return equal ? Rational(1, 2) : Rational(0);
        if (x[0] == 1 && x[1] == 1) return equal ? Rational(1, 8) : Rational(3, 8);
        return equal ? Rational(3, 8) : Rational(1, 8);
    });
    const double t = std::numbers::pi / 6;
    auto r = make_realization(sc, bell_pair({"A", "B"}), [&](std::size_t site, std::size_t setting) {
        if (site == 0) return real_basis(setting == 0 ? 0.0 : -t);
        return real_basis(setting == 0 ? 0.0 : t);
    });
    return finish("bell", std::move(e), std::move(r));
}

NamedModel pr_box() {
    auto e = tabulate(bell_scenario(), [](const std::vector<std::size_t>& x, const std::vector<Outcome>& y) {
        bool target = x[0] == 1 && x[1] == 1;
        return ((y[0] != y[1]) == target) ? Rational(1, 2) : Rational(0);
    });
    return finish("pr-box", std::move(e));
}

NamedModel hardy_model() {
    // Marginals P(a=0) = P(b=0) = 1/5 and P(a'=0) = P(b'=0) = 3/5; (a,b) is a product.
    auto e = tabulate(bell_scenario(), [](const std::vector<std::size_t>& x, const std::vector<Outcome>& y) {
        std::size_t k = y[0] * 2 + y[1];
        static const Rational ab[4] = {Rational(1, 25), Rational(4, 25), Rational(4, 25), Rational(16, 25)};
        static const Rational abp[4] = {Rational(0), Rational(1, 5), Rational(3, 5), Rational(1, 5)};
        static const Rational apb[4] = {Rational(0), Rational(3, 5), Rational(1, 5), Rational(1, 5)};
        static const Rational apbp[4] = {Rational(1, 5), Rational(2, 5), Rational(2, 5), Rational(0)};
        if (x[0] == 0) return x[1] == 0 ? ab[k] : abp[k];
        return x[1] == 0 ? apb[k] : apbp[k];
    });
    return finish("hardy", std::move(e));
}

NamedModel mermin_square_model() {
    auto sc = mermin_square_scenario();
    std::vector<std::vector<bool>> supports;
    const auto contexts = sc->maximal_contexts();
    for (std::size_t k = 0; k < contexts.size(); ++k) {
        // Contexts are declared as the three rows then the three columns; only the
        // last column multiplies to -I.
        const std::string last = "X1X2|Z1Z2|Y1Y2";
        std::string joined;
        for (auto x : contexts[k]) joined += (joined.empty() ? "" : "|") + sc->label(x);
        unsigned parity = joined == last ? 1u : 0u;
        std::vector<bool> sup;
        for (const auto& s : sc->sections_of(contexts[k])) sup.push_back((s.values[0] + s.values[1] + s.values[2]) % 2 == parity);
        supports.push_back(std::move(sup));
    }
    return NamedModel{"mermin-square", sc, std::nullopt, PossibilisticModel(sc, std::move(supports)), std::nullopt};
}

NamedModel magic_square_model() {
    auto sc = magic_square_scenario();
    Vector phi = Vector::Zero(16);
    for (int j = 0; j < 4; ++j) phi(j * 4 + j) = 0.5;
    auto r = make_realization(sc, QuditState({"Alice", "Bob"}, 4, phi), [](std::size_t site, std::size_t setting) {
        std::vector<Matrix> obs;
        int k = static_cast<int>(setting);
        for (int j = 0; j < 3; ++j) obs.push_back(site == 0 ? magic_entry(j, k) : magic_entry(k, j));
        return triple_measurement(obs);
    });
    auto e = realize(r);
    return finish("magic-square", std::move(e), std::move(r));
}

std::vector<NamedModel> all_fixtures() {
    return {ghz_model(), chsh_model(), bell_model(), pr_box(), hardy_model(), mermin_square_model(), magic_square_model()};
}

NamedModel fixture_by_name(const std::string& name) {
    for (auto& m : all_fixtures())
        if (m.name == name) return m;
    fail(ErrorCode::InvalidArgument, "unknown model fixture '" + name + "'");
}

namespace {

std::vector<std::pair<Prob, MeasurementProtocol>> uniform_queries(const ScenarioPtr& sc,
                                                                  const std::vector<std::vector<std::size_t>>& rows) {
    std::vector<std::pair<Prob, MeasurementProtocol>> qs;
    for (const auto& row : rows) {
        Context c;
        for (std::size_t i = 0; i < row.size(); ++i) c.push_back(sc->measurement(i, row[i]));
        qs.emplace_back(Prob(Rational(1, static_cast<long>(rows.size()))), MeasurementProtocol::single(c, *sc));
    }
    return qs;
}

}  // namespace

Game chsh_game() {
    auto sc = bell_scenario();
    std::vector<std::vector<std::size_t>> rows{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    return Game::from_predicate(
        "chsh", sc, uniform_queries(sc, rows),
        [rows](std::size_t k, const Run& run) {
            unsigned target = rows[k][0] & rows[k][1];
            return ((run[0].values[0] ^ run[0].values[1]) & 1u) == target;
        },
        Rational(3, 4));
}

Game ghz_game() {
    auto sc = ghz_scenario();
    // Even-parity promise rows; setting 0 is X, 1 is Y.
    std::vector<std::vector<std::size_t>> rows{{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    return Game::from_predicate(
        "ghz", sc, uniform_queries(sc, rows),
        [rows](std::size_t k, const Run& run) {
            unsigned target = (rows[k][0] | rows[k][1] | rows[k][2]) ? 1u : 0u;
            return ((run[0].values[0] + run[0].values[1] + run[0].values[2]) % 2) == target;
        },
        Rational(3, 4));
}

Game magic_square_game() {
    auto sc = magic_square_scenario();
    std::vector<std::vector<std::size_t>> rows;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) rows.push_back({a, b});
    Game g = Game::from_predicate(
        "magic-square", sc, uniform_queries(sc, rows),
        [rows](std::size_t k, const Run& run) {
            std::size_t x = run[0].values[0], y = run[0].values[1];
            int a = static_cast<int>(rows[k][0]), b = static_cast<int>(rows[k][1]);
            bool odd = (bit(x, 0) + bit(x, 1) + bit(x, 2)) % 2 == 1;
            bool even = (bit(y, 0) + bit(y, 1) + bit(y, 2)) % 2 == 0;
            return odd && even && bit(x, b) == bit(y, a);
        },
        std::nullopt);
    return g.with_classical_bound(classical_bound_by_enumeration(g));
}

Game trivial_game(ScenarioPtr scenario) {
    auto c = scenario->maximal_contexts().front();
    auto p = MeasurementProtocol::single(c, *scenario);
    std::vector<std::size_t> all(p.run_count());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return Game("trivial", scenario, 1, {GameTerm{Prob::one(), p, all}}, Rational(1));
}

std::vector<Game> all_games() { return {chsh_game(), ghz_game(), magic_square_game()}; }

Game game_by_name(const std::string& name) {
    if (name == "chsh") return chsh_game();
    if (name == "ghz") return ghz_game();
    if (name == "magic-square") return magic_square_game();
    fail(ErrorCode::InvalidArgument, "unknown game '" + name + "'");
}

}  // namespace contextua
