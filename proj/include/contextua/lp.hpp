#pragma once

#include "contextua/error.hpp"
#include "contextua/numeric.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace contextua {

// Dense two-phase primal simplex with Bland's rule:
//   maximize c.x  subject to  A x (<=|=|>=) b,  x >= 0.
enum class RowSense { LessEq, Equal, GreaterEq };
enum class LPStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LinearProgram {
    std::vector<std::vector<T>> A;
    std::vector<T> b;
    std::vector<RowSense> sense;
    std::vector<T> c;
};

template <class T>
struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    T objective{};
    std::vector<T> x;
    std::vector<T> dual;  // one multiplier per row of the original program
    std::size_t pivots = 0;
};

template <class T>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static bool zero(const Rational& v) { return sgn(v) == 0; }
    static bool positive(const Rational& v) { return sgn(v) > 0; }
    static bool negative(const Rational& v) { return sgn(v) < 0; }
    static void submul(Rational& target, const Rational& f, const Rational& v, Rational& tmp) {
        mpq_mul(tmp.get_mpq_t(), f.get_mpq_t(), v.get_mpq_t());
        mpq_sub(target.get_mpq_t(), target.get_mpq_t(), tmp.get_mpq_t());
    }
};

template <>
struct ScalarOps<double> {
    static constexpr double eps = 1e-9;
    static bool zero(double v) { return std::fabs(v) <= eps; }
    static bool positive(double v) { return v > eps; }
    static bool negative(double v) { return v < -eps; }
    static void submul(double& target, double f, double v, double&) { target -= f * v; }
};

namespace lp_detail {

template <class T>
class Tableau {
    using Ops = ScalarOps<T>;

public:
    std::vector<std::vector<T>> rows;  // m rows, each of width cols + 1 (last = rhs)
    std::vector<T> obj;                // reduced costs, width cols + 1 (last = objective value)
    std::vector<std::size_t> basis;
    std::size_t cols = 0;
    std::vector<bool> blocked;  // columns that may not enter
    std::size_t pivots = 0;

    void pivot(std::size_t r, std::size_t s) {
        ++pivots;
        auto& pr = rows[r];
        T inv = T(1) / pr[s];
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j <= cols; ++j) {
            if (Ops::zero(pr[j])) {
                pr[j] = T(0);
                continue;
            }
            pr[j] *= inv;
            nz.push_back(j);
        }
        T tmp{};
        auto eliminate = [&](std::vector<T>& row) {
            if (Ops::zero(row[s])) {
                row[s] = T(0);
                return;
            }
            T f = row[s];
            for (std::size_t j : nz) Ops::submul(row[j], f, pr[j], tmp);
            row[s] = T(0);
        };
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != r) eliminate(rows[i]);
        eliminate(obj);
        basis[r] = s;
    }

    // Bland's rule iterations on the current objective row; returns false when unbounded.
    bool optimize() {
        for (;;) {
            std::size_t enter = cols;
            for (std::size_t j = 0; j < cols; ++j)
                if (!blocked[j] && Ops::negative(obj[j])) {
                    enter = j;
                    break;
                }
            if (enter == cols) return true;
            std::size_t leave = rows.size();
            T best{};
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!Ops::positive(rows[i][enter])) continue;
                T ratio = rows[i][cols] / rows[i][enter];
                if (leave == rows.size() || ratio < best ||
                    (!(best < ratio) && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == rows.size()) return false;
            pivot(leave, enter);
        }
    }

    void load_objective(const std::vector<T>& cost) {
        obj.assign(cols + 1, T(0));
        for (std::size_t j = 0; j < cols; ++j) obj[j] = -cost[j];
        T tmp{};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const T& cb = cost[basis[i]];
            if (Ops::zero(cb)) continue;
            T neg = -cb;
            for (std::size_t j = 0; j <= cols; ++j)
                if (!Ops::zero(rows[i][j])) Ops::submul(obj[j], neg, rows[i][j], tmp);
        }
    }
};

}  // namespace lp_detail

template <class T>
LPSolution<T> solve_lp(const LinearProgram<T>& lp) {
    using Ops = ScalarOps<T>;
    const std::size_t m = lp.b.size();
    const std::size_t n = lp.c.size();
    require(lp.A.size() == m && lp.sense.size() == m, ErrorCode::InvalidArgument, "malformed linear program");
    for (const auto& row : lp.A) require(row.size() == n, ErrorCode::InvalidArgument, "ragged constraint matrix");

    // Column layout: originals, one slack/surplus per inequality row, one artificial per >=/= row.
    std::vector<bool> flipped(m, false);
    std::vector<RowSense> sense = lp.sense;
    for (std::size_t i = 0; i < m; ++i) {
        if (Ops::negative(lp.b[i])) {
            flipped[i] = true;
            if (sense[i] == RowSense::LessEq) sense[i] = RowSense::GreaterEq;
            else if (sense[i] == RowSense::GreaterEq) sense[i] = RowSense::LessEq;
        }
    }
    std::size_t n_slack = 0, n_art = 0;
    for (auto s : sense) {
        if (s != RowSense::Equal) ++n_slack;
        if (s != RowSense::LessEq) ++n_art;
    }
    lp_detail::Tableau<T> tab;
    tab.cols = n + n_slack + n_art;
    tab.rows.assign(m, std::vector<T>(tab.cols + 1, T(0)));
    tab.basis.assign(m, 0);
    tab.blocked.assign(tab.cols, false);
    std::vector<std::size_t> identity_col(m);
    std::size_t next_slack = n, next_art = n + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
        auto& row = tab.rows[i];
        for (std::size_t j = 0; j < n; ++j) row[j] = flipped[i] ? T(-lp.A[i][j]) : lp.A[i][j];
        row[tab.cols] = flipped[i] ? T(-lp.b[i]) : lp.b[i];
        if (sense[i] == RowSense::LessEq) {
            row[next_slack] = T(1);
            identity_col[i] = next_slack;
            tab.basis[i] = next_slack++;
        } else {
            if (sense[i] == RowSense::GreaterEq) row[next_slack++] = T(-1);
            row[next_art] = T(1);
            identity_col[i] = next_art;
            tab.basis[i] = next_art++;
        }
    }

    LPSolution<T> sol;
    if (n_art > 0) {
        std::vector<T> phase1(tab.cols, T(0));
        for (std::size_t j = n + n_slack; j < tab.cols; ++j) phase1[j] = T(-1);
        tab.load_objective(phase1);
        tab.optimize();
        if (Ops::negative(tab.obj[tab.cols])) {
            sol.status = LPStatus::Infeasible;
            sol.pivots = tab.pivots;
            return sol;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis[i] < n + n_slack) continue;
            for (std::size_t j = 0; j < n + n_slack; ++j)
                if (!Ops::zero(tab.rows[i][j])) {
                    tab.pivot(i, j);
                    break;
                }
        }
        for (std::size_t j = n + n_slack; j < tab.cols; ++j) tab.blocked[j] = true;
    }
    std::vector<T> cost(tab.cols, T(0));
    for (std::size_t j = 0; j < n; ++j) cost[j] = lp.c[j];
    tab.load_objective(cost);
    if (!tab.optimize()) {
        sol.status = LPStatus::Unbounded;
        sol.pivots = tab.pivots;
        return sol;
    }
    sol.status = LPStatus::Optimal;
    sol.objective = tab.obj[tab.cols];
    sol.x.assign(n, T(0));
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] < n) sol.x[tab.basis[i]] = tab.rows[i][tab.cols];
    sol.dual.assign(m, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        T y = tab.obj[identity_col[i]];
        sol.dual[i] = flipped[i] ? T(-y) : y;
    }
    sol.pivots = tab.pivots;
    return sol;
}

}  // namespace contextua
