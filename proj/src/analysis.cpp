#include "contextua/analysis.hpp"

#include "contextua/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace contextua {

namespace {

Prob abs_diff(const Prob& a, const Prob& b) {
    Prob d = a - b;
    if (d.exact()) return Prob(Rational(abs(d.rational())));
    return Prob(std::fabs(d.to_double()));
}

bool prob_less(const Prob& a, const Prob& b) {
    if (a.exact() && b.exact()) return a.rational() < b.rational();
    return a.to_double() < b.to_double();
}

}  // namespace

NoSignallingReport check_no_signalling(const EmpiricalModel& e, double tolerance) {
    const auto& sc = *e.scenario();
    const auto& cs = e.contexts();
    NoSignallingReport worst;
    for (std::size_t a = 0; a < cs.size(); ++a)
        for (std::size_t b = a + 1; b < cs.size(); ++b) {
            Context overlap = context_intersection(cs[a], cs[b]);
            if (overlap.empty()) continue;
            auto ma = marginalize(sc, cs[a], e.tables()[a], overlap);
            auto mb = marginalize(sc, cs[b], e.tables()[b], overlap);
            for (std::size_t k = 0; k < ma.size(); ++k) {
                Prob gap = abs_diff(ma[k], mb[k]);
                if (!prob_less(worst.gap, gap)) continue;
                worst.gap = gap;
                worst.first = cs[a];
                worst.second = cs[b];
                // Blame the first overlap measurement whose own marginal differs.
                worst.measurement = overlap.front();
                for (auto x : overlap) {
                    auto xa = marginalize(sc, overlap, ma, {x});
                    auto xb = marginalize(sc, overlap, mb, {x});
                    bool differs = false;
                    for (std::size_t j = 0; j < xa.size(); ++j)
                        if (!abs_diff(xa[j], xb[j]).is_zero() && abs_diff(xa[j], xb[j]).to_double() > tolerance)
                            differs = true;
                    if (differs) {
                        worst.measurement = x;
                        break;
                    }
                }
            }
        }
    worst.ok = worst.gap.exact() ? worst.gap.is_zero() : worst.gap.to_double() <= tolerance;
    return worst;
}

std::string to_string(PossibilisticClass c) {
    switch (c) {
        case PossibilisticClass::Noncontextual: return "noncontextual";
        case PossibilisticClass::LogicallyContextual: return "logically_contextual";
        case PossibilisticClass::StronglyContextual: return "strongly_contextual";
    }
    return "?";
}

namespace {

// Depth-first search over global assignments in lexicographic order, pruning
// as soon as a fully assigned maximal context leaves the support.
class GlobalSectionSearch {
public:
    GlobalSectionSearch(const PossibilisticModel& m, std::size_t cap) : m_(m), cap_(cap) {
        const auto& sc = *m.scenario();
        n_ = sc.size();
        radices_ = sc.radices(all_measurements());
        completes_at_.assign(n_, {});
        for (std::size_t k = 0; k < m.contexts().size(); ++k) {
            const auto& c = m.contexts()[k];
            if (c.empty()) continue;
            completes_at_[c.back()].push_back(k);
        }
        value_.assign(n_, 0);
    }

    // Visits every global section; the callback returns false to stop.
    void run(const std::function<bool(const std::vector<Outcome>&)>& visit) {
        visit_ = &visit;
        stopped_ = false;
        descend(0);
    }

private:
    Context all_measurements() const {
        Context c(n_);
        for (std::size_t x = 0; x < n_; ++x) c[x] = static_cast<MeasurementId>(x);
        return c;
    }

    bool consistent(std::size_t x) const {
        const auto& sc = *m_.scenario();
        for (auto k : completes_at_[x]) {
            const auto& c = m_.contexts()[k];
            LocalSection s{c, {}};
            for (auto y : c) s.values.push_back(value_[y]);
            if (!m_.supports()[k][sc.section_index(s)]) return false;
        }
        return true;
    }

    void descend(std::size_t x) {
        if (stopped_) return;
        if (x == n_) {
            if (!(*visit_)(value_)) stopped_ = true;
            return;
        }
        for (std::size_t v = 0; v < radices_[x] && !stopped_; ++v) {
            require(++visited_ <= cap_, ErrorCode::SearchSpaceTooLarge, "global-assignment search exceeded its cap");
            value_[x] = static_cast<Outcome>(v);
            if (consistent(x)) descend(x + 1);
        }
    }

    const PossibilisticModel& m_;
    std::size_t cap_;
    std::size_t n_ = 0;
    std::vector<std::size_t> radices_;
    std::vector<std::vector<std::size_t>> completes_at_;
    std::vector<Outcome> value_;
    const std::function<bool(const std::vector<Outcome>&)>* visit_ = nullptr;
    bool stopped_ = false;
    std::size_t visited_ = 0;
};

}  // namespace

LocalSection assignment_section(const std::vector<Outcome>& assignment, const Context& c) {
    LocalSection s{c, {}};
    for (auto x : c) s.values.push_back(assignment.at(x));
    return s;
}

std::vector<std::vector<Outcome>> global_sections(const PossibilisticModel& m, std::size_t limit, std::size_t cap) {
    std::vector<std::vector<Outcome>> out;
    if (limit == 0) return out;
    GlobalSectionSearch search(m, cap);
    search.run([&](const std::vector<Outcome>& g) {
        out.push_back(g);
        return out.size() < limit;
    });
    return out;
}

Classification classify_possibilistic(const PossibilisticModel& m, std::size_t cap) {
    const auto& sc = *m.scenario();
    std::vector<std::vector<bool>> extended;
    std::size_t remaining = 0;
    for (const auto& sup : m.supports()) {
        extended.emplace_back(sup.size(), false);
        remaining += static_cast<std::size_t>(std::count(sup.begin(), sup.end(), true));
    }
    Classification out;
    GlobalSectionSearch search(m, cap);
    search.run([&](const std::vector<Outcome>& g) {
        ++out.global_sections_found;
        for (std::size_t k = 0; k < m.contexts().size(); ++k) {
            std::size_t idx = sc.section_index(assignment_section(g, m.contexts()[k]));
            if (!extended[k][idx]) {
                extended[k][idx] = true;
                --remaining;
            }
        }
        return remaining > 0;
    });
    for (std::size_t k = 0; k < m.contexts().size(); ++k)
        for (std::size_t j = 0; j < extended[k].size(); ++j)
            if (m.supports()[k][j] && !extended[k][j]) out.non_extendable.push_back(sc.section(m.contexts()[k], j));
    if (out.global_sections_found == 0) out.kind = PossibilisticClass::StronglyContextual;
    else if (!out.non_extendable.empty()) out.kind = PossibilisticClass::LogicallyContextual;
    else out.kind = PossibilisticClass::Noncontextual;
    return out;
}

namespace {

template <class T>
T convert(const Prob& p);
template <>
Rational convert<Rational>(const Prob& p) { return p.to_rational(); }
template <>
double convert<double>(const Prob& p) { return p.to_double(); }

Prob back(const Rational& v) { return Prob(v); }
Prob back(double v) { return Prob(v); }

// maximize sum_g b_g  s.t.  sum_{g|C = s} b_g <= e_C(s),  b >= 0.
// Assignments touching a zero-bound row are pruned during enumeration; those
// rows get multiplier 1 in the dual so the certificate stays feasible.
template <class T>
CFResult solve_cf(const Scenario& sc, const std::vector<Context>& contexts, const std::vector<std::vector<Prob>>& tables,
                  const CFOptions& options) {
    const std::size_t n_meas = sc.size();
    Context all(n_meas);
    for (std::size_t x = 0; x < n_meas; ++x) all[x] = static_cast<MeasurementId>(x);
    auto radices = sc.radices(all);

    CFResult result;
    result.assignment_count = 1;
    for (auto r : radices) {
        require(result.assignment_count <= std::numeric_limits<std::size_t>::max() / r, ErrorCode::SearchSpaceTooLarge,
                "global assignment count overflows");
        result.assignment_count *= r;
    }
    std::vector<std::size_t> row_offset;
    for (std::size_t k = 0; k < contexts.size(); ++k) {
        row_offset.push_back(result.rows.size());
        for (std::size_t j = 0; j < tables[k].size(); ++j) result.rows.push_back({contexts[k], j, tables[k][j]});
    }
    const std::size_t m = result.rows.size();
    std::vector<bool> zero_row(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& p = result.rows[i].bound;
        zero_row[i] = p.exact() ? p.is_zero() : p.to_double() <= 1e-12;
    }

    // Depth-first enumeration in lexicographic order; a context's row is known
    // once its last measurement is assigned.
    std::vector<std::vector<std::size_t>> completes_at(n_meas);
    std::vector<std::size_t> empty_context_rows;
    for (std::size_t k = 0; k < contexts.size(); ++k) {
        if (contexts[k].empty()) empty_context_rows.push_back(row_offset[k]);
        else completes_at[contexts[k].back()].push_back(k);
    }
    for (auto r : empty_context_rows)
        if (zero_row[r]) fail(ErrorCode::InvalidArgument, "empty context with zero probability");
    std::vector<std::vector<std::size_t>> ctx_radices;
    for (const auto& c : contexts) ctx_radices.push_back(sc.radices(c));
    std::vector<std::size_t> alive;
    std::vector<std::vector<std::size_t>> col_rows;
    std::vector<std::size_t> digits(n_meas, 0), rows_so_far = empty_context_rows;
    std::size_t visited = 0;
    std::function<void(std::size_t, std::size_t)> descend = [&](std::size_t x, std::size_t index) {
        if (x == n_meas) {
            require(alive.size() < options.max_columns, ErrorCode::SearchSpaceTooLarge,
                    "too many surviving global assignments for the contextual-fraction LP");
            alive.push_back(index);
            col_rows.push_back(rows_so_far);
            return;
        }
        for (std::size_t v = 0; v < radices[x]; ++v) {
            require(++visited <= options.max_assignments, ErrorCode::SearchSpaceTooLarge,
                    "too many global assignments for the contextual-fraction LP");
            digits[x] = v;
            std::size_t before = rows_so_far.size();
            bool ok = true;
            for (auto k : completes_at[x]) {
                std::size_t idx = 0;
                for (std::size_t j = 0; j < contexts[k].size(); ++j) idx = idx * ctx_radices[k][j] + digits[contexts[k][j]];
                std::size_t r = row_offset[k] + idx;
                if (zero_row[r]) {
                    ok = false;
                    break;
                }
                rows_so_far.push_back(r);
            }
            if (ok) descend(x + 1, index * radices[x] + v);
            rows_so_far.resize(before);
        }
    };
    descend(0, 0);

    std::vector<std::size_t> lp_row(m, m);
    std::vector<std::size_t> kept_rows;
    for (const auto& rows : col_rows)
        for (auto r : rows) lp_row[r] = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (lp_row[i] == 0) {
            lp_row[i] = kept_rows.size();
            kept_rows.push_back(i);
        }

    result.exact = std::is_same_v<T, Rational>;
    result.dual.assign(m, back(T(0)));
    for (std::size_t i = 0; i < m; ++i)
        if (zero_row[i]) result.dual[i] = back(T(1));
    if (alive.empty()) {
        // Every assignment is excluded: ncf = 0 with the zero rows as certificate.
        result.ncf = back(T(0));
        result.cf = back(T(1));
        return result;
    }

    LinearProgram<T> lp;
    lp.A.assign(kept_rows.size(), std::vector<T>(alive.size(), T(0)));
    for (std::size_t j = 0; j < alive.size(); ++j)
        for (auto r : col_rows[j]) lp.A[lp_row[r]][j] = T(1);
    for (auto i : kept_rows) lp.b.push_back(convert<T>(result.rows[i].bound));
    lp.sense.assign(kept_rows.size(), RowSense::LessEq);
    lp.c.assign(alive.size(), T(1));
    auto sol = solve_lp(lp);
    require(sol.status == LPStatus::Optimal, ErrorCode::Internal, "contextual-fraction LP did not reach an optimum");

    T ncf = sol.objective;
    if constexpr (std::is_same_v<T, double>) ncf = std::clamp(ncf, 0.0, 1.0);
    result.ncf = back(ncf);
    result.cf = back(T(1) - ncf);
    for (std::size_t j = 0; j < alive.size(); ++j)
        if (!ScalarOps<T>::zero(sol.x[j])) result.witness.emplace_back(alive[j], back(sol.x[j]));
    for (std::size_t i = 0; i < m; ++i)
        if (!zero_row[i] && lp_row[i] < m) result.dual[i] = back(sol.dual[lp_row[i]]);
    result.pivots = sol.pivots;
    return result;
}

CFResult cf_dispatch(const Scenario& sc, const std::vector<Context>& contexts,
                     const std::vector<std::vector<Prob>>& tables, const CFOptions& options) {
    bool exact = options.arithmetic == Arithmetic::Exact;
    if (options.arithmetic == Arithmetic::Auto) {
        exact = true;
        for (const auto& t : tables)
            if (!all_exact(t)) exact = false;
    }
    if (exact) return solve_cf<Rational>(sc, contexts, tables, options);
    return solve_cf<double>(sc, contexts, tables, options);
}

}  // namespace

CFResult contextual_fraction(const EmpiricalModel& e, CFOptions options) {
    return cf_dispatch(*e.scenario(), e.contexts(), e.tables(), options);
}

CFResult contextual_fraction(const Behaviour& b, CFOptions options) {
    require(b.rounds() == 1, ErrorCode::PreconditionViolated, "contextual fraction is computed for single-round behaviours");
    auto contexts = options.maximal_only ? b.scenario()->maximal_contexts() : b.scenario()->all_contexts();
    std::vector<std::vector<Prob>> tables;
    for (const auto& c : contexts) tables.push_back(b.table(c));
    return cf_dispatch(*b.scenario(), contexts, tables, options);
}

Prob success_probability(const Behaviour& b, const Game& g) {
    require(b.scenario()->same_as(*g.scenario()), ErrorCode::ScenarioMismatch, "game and behaviour scenarios differ");
    require(b.rounds() == g.rounds(), ErrorCode::ProtocolMismatch, "game and behaviour round counts differ");
    Prob total = Prob::zero();
    for (const auto& t : g.terms()) {
        auto table = b.table(t.protocol);
        Prob accepted = Prob::zero();
        for (auto r : t.accepting) accepted += table[r];
        total += t.weight * accepted;
    }
    return total;
}

Prob success_probability(const EmpiricalModel& e, const Game& g) {
    return success_probability(e.as_behaviour(g.rounds()), g);
}

namespace {

ResourceReport finish_report(Prob p, const Game& g, Prob cf, double tolerance) {
    ResourceReport r;
    r.p_success = p;
    r.classical_bound = g.classical_bound() ? *g.classical_bound() : classical_bound_by_enumeration(g);
    r.cf = cf;
    r.slack = Prob(r.classical_bound) + cf - p;
    r.holds = r.slack.exact() ? sgn(r.slack.rational()) >= 0 : r.slack.to_double() >= -tolerance;
    return r;
}

}  // namespace

ResourceReport resource_inequality_check(const EmpiricalModel& e, const Game& g, double tolerance) {
    return finish_report(success_probability(e, g), g, contextual_fraction(e).cf, tolerance);
}

ResourceReport resource_inequality_check(const Behaviour& b, const Game& g, double tolerance) {
    return finish_report(success_probability(b, g), g, contextual_fraction(b).cf, tolerance);
}

Behaviour restrict_behaviour(const Behaviour& b, const std::vector<std::size_t>& keep,
                             const std::map<std::size_t, std::size_t>& fixed) {
    require(b.rounds() == 1, ErrorCode::PreconditionViolated, "restriction is defined for single-round behaviours");
    const auto& sc = *b.scenario();
    const auto& spec = sc.multipartite_spec();
    std::vector<std::size_t> kept = keep;
    std::sort(kept.begin(), kept.end());
    require(std::adjacent_find(kept.begin(), kept.end()) == kept.end(), ErrorCode::InvalidArgument,
            "restriction keeps a site twice");
    std::vector<bool> is_kept(spec.sites.size(), false);
    for (auto i : kept) {
        require(i < spec.sites.size(), ErrorCode::InvalidArgument, "restriction keeps an unknown site");
        is_kept[i] = true;
    }
    Context fixed_ctx;
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        if (is_kept[i]) {
            require(!fixed.count(i), ErrorCode::InvalidFixedSetting, "kept site '" + spec.sites[i] + "' also has a fixed setting");
            continue;
        }
        auto it = fixed.find(i);
        require(it != fixed.end(), ErrorCode::InvalidFixedSetting, "no fixed setting for site '" + spec.sites[i] + "'");
        require(it->second < spec.settings[i].size(), ErrorCode::InvalidFixedSetting,
                "fixed setting out of range at site '" + spec.sites[i] + "'");
        fixed_ctx.push_back(sc.measurement(i, it->second));
    }
    for (const auto& [i, x] : fixed)
        require(i < spec.sites.size(), ErrorCode::InvalidFixedSetting, "fixed setting names an unknown site");

    MultipartiteScenario sub;
    std::vector<MeasurementId> to_parent;
    for (auto i : kept) {
        sub.sites.push_back(spec.sites[i]);
        sub.settings.push_back(spec.settings[i]);
        sub.outcomes.push_back(spec.outcomes[i]);
        for (std::size_t x = 0; x < spec.settings[i].size(); ++x) to_parent.push_back(sc.measurement(i, x));
    }
    auto restricted = Scenario::multipartite(std::move(sub));
    ScenarioPtr parent = b.scenario();
    Behaviour source = b;
    return Behaviour(restricted, 1, [parent, source, to_parent, fixed_ctx](const MeasurementProtocol& p) {
        Context c;
        for (auto x : p.root().context) c.push_back(to_parent[x]);
        Context full = context_union(c, fixed_ctx);
        auto t = source.table(full);
        return marginalize(*parent, full, t, c);
    });
}

}  // namespace contextua
