#include "contextua/linsolve.hpp"

#include "contextua/error.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <type_traits>

namespace contextua {

namespace {

struct ZRing {
    using T = Integer;
    void norm(T&) const {}
    bool zero(const T& a) const { return sgn(a) == 0; }
    bool smaller(const T& a, const T& b) const { return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t()) < 0; }
    T quot(const T& a, const T& b) const {
        T q;
        mpz_tdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        return q;
    }
    bool divides(const T& a, const T& b) const { return mpz_divisible_p(b.get_mpz_t(), a.get_mpz_t()) != 0; }
    // g = s a + t b
    void xgcd(const T& a, const T& b, T& g, T& s, T& t) const {
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    }
    bool unit(const T& a) const { return mpz_cmpabs_ui(a.get_mpz_t(), 1) == 0; }
    T from(const Integer& v) const { return v; }
    T from(long long v) const { return T(static_cast<long>(v)); }
};

struct ModRing {
    using T = long long;
    long long d;
    void norm(T& a) const { a = mod(a, d); }
    bool zero(const T& a) const { return a == 0; }
    bool smaller(const T& a, const T& b) const { return a < b; }
    T quot(const T& a, const T& b) const { return a / b; }
    bool divides(const T& a, const T& b) const { return b % a == 0; }
    void xgcd(T a, T b, T& g, T& s, T& t) const {
        T s0 = 1, t0 = 0, s1 = 0, t1 = 1;
        while (b != 0) {
            T q = a / b;
            std::tie(a, b) = std::make_pair(b, a - q * b);
            std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
            std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
        }
        g = a, s = s0, t = t0;
    }
    bool unit(const T& a) const { return std::gcd(a, d) == 1; }
    T from(const Integer& v) const {
        Integer r;
        mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(d));
        return r.get_si();
    }
    T from(long long v) const { return mod(v, d); }
    T inverse(T a) const {
        T g, s, t;
        xgcd(a, d, g, s, t);
        return mod(s, d);
    }
};

// row -= q * pivot, from column `from` on.
template <class R>
void axpy(const R& ring, std::vector<typename R::T>& row, const typename R::T& q, const std::vector<typename R::T>& pivot,
          std::size_t from) {
    for (std::size_t k = from; k < row.size(); ++k) {
        if (ring.zero(pivot[k])) continue;
        row[k] -= q * pivot[k];
        ring.norm(row[k]);
    }
}

// Incremental echelon form of [A | b] under unimodular row operations. Row
// `n` of the pivot table would be the right-hand side: reaching it means 0 = c.
template <class R>
struct Echelon {
    using T = typename R::T;
    R ring;
    std::size_t n;
    std::vector<std::vector<T>> pivot;
    std::vector<char> has;
    std::optional<Infeasibility> bad;

    Echelon(R r, std::size_t unknowns) : ring(r), n(unknowns), pivot(unknowns), has(unknowns, 0) {}

    void insert(std::vector<T> row) {
        std::size_t c = 0;
        for (;;) {
            while (c <= n && ring.zero(row[c])) ++c;
            if (c > n) return;
            if (c == n) {
                if (!bad) bad = Infeasibility{"inconsistent-row", 0, to_integer(row[n])};
                return;
            }
            if (!has[c]) {
                pivot[c] = std::move(row);
                has[c] = 1;
                return;
            }
            auto& p = pivot[c];
            if (ring.divides(p[c], row[c])) {
                T q = ring.quot(row[c], p[c]);
                axpy(ring, row, q, p, c);
                continue;
            }
            T g, s, t;
            ring.xgcd(p[c], row[c], g, s, t);
            T a = ring.quot(p[c], g), b = ring.quot(row[c], g);
            std::vector<T> top(n + 1), rest(n + 1);
            for (std::size_t k = c; k <= n; ++k) {
                top[k] = s * p[k] + t * row[k];
                rest[k] = b * p[k] - a * row[k];
                ring.norm(top[k]);
                ring.norm(rest[k]);
            }
            p = std::move(top);
            row = std::move(rest);
        }
    }

    static Integer to_integer(const Integer& v) { return v; }
    static Integer to_integer(long long v) { return Integer(static_cast<long>(v)); }
};

// Diagonalizes A (rows x cols) by row and column operations. Row operations
// are mirrored on `rhs`, column operations on `q` (cols x cols). Returns the
// rank; A[k][k] for k < rank are the diagonal entries.
template <class R>
std::size_t diagonalize(const R& ring, std::vector<std::vector<typename R::T>>& a, std::vector<typename R::T>* rhs,
                        std::vector<std::vector<typename R::T>>* q, std::size_t cols) {
    using T = typename R::T;
    const std::size_t rows = a.size();
    auto swap_cols = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (auto& row : a) std::swap(row[i], row[j]);
        if (q)
            for (auto& row : *q) std::swap(row[i], row[j]);
    };
    auto swap_rows = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        std::swap(a[i], a[j]);
        if (rhs) std::swap((*rhs)[i], (*rhs)[j]);
    };
    std::size_t k = 0;
    for (; k < std::min(rows, cols); ++k) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        std::size_t bi = rows, bj = cols;
        for (std::size_t i = k; i < rows; ++i)
            for (std::size_t j = k; j < cols; ++j)
                if (!ring.zero(a[i][j]) && (bi == rows || ring.smaller(a[i][j], a[bi][bj]))) bi = i, bj = j;
        if (bi == rows) break;
        swap_rows(k, bi);
        swap_cols(k, bj);
        for (;;) {
            bool clean = true;
            for (std::size_t i = k + 1; i < rows; ++i) {
                if (ring.zero(a[i][k])) continue;
                T f = ring.quot(a[i][k], a[k][k]);
                axpy(ring, a[i], f, a[k], k);
                if (rhs) {
                    (*rhs)[i] -= f * (*rhs)[k];
                    ring.norm((*rhs)[i]);
                }
                if (!ring.zero(a[i][k])) clean = false;
            }
            for (std::size_t j = k + 1; j < cols; ++j) {
                if (ring.zero(a[k][j])) continue;
                T f = ring.quot(a[k][j], a[k][k]);
                for (std::size_t i = k; i < rows; ++i) {
                    a[i][j] -= f * a[i][k];
                    ring.norm(a[i][j]);
                }
                if (q)
                    for (auto& row : *q) {
                        row[j] -= f * row[k];
                        ring.norm(row[j]);
                    }
                if (!ring.zero(a[k][j])) clean = false;
            }
            if (clean) break;
            // A remainder is left in row or column k; it is smaller than the pivot.
            std::size_t bi = k, bj = k;
            for (std::size_t i = k + 1; i < rows; ++i)
                if (!ring.zero(a[i][k]) && ring.smaller(a[i][k], a[bi][bj])) bi = i, bj = k;
            for (std::size_t j = k + 1; j < cols; ++j)
                if (!ring.zero(a[k][j]) && ring.smaller(a[k][j], a[bi][bj])) bi = k, bj = j;
            swap_rows(k, bi);
            swap_cols(k, bj);
        }
    }
    return k;
}

template <class R>
std::vector<std::vector<typename R::T>> identity(const R&, std::size_t n) {
    std::vector<std::vector<typename R::T>> q(n, std::vector<typename R::T>(n, typename R::T(0)));
    for (std::size_t i = 0; i < n; ++i) q[i][i] = typename R::T(1);
    return q;
}

template <class R>
SolveResult<typename R::T> solve(const R& ring, std::size_t n, const std::vector<SparseRow>& rows) {
    using T = typename R::T;
    Echelon<R> ech(ring, n);
    for (const auto& r : rows) {
        std::vector<T> dense(n + 1, T(0));
        for (const auto& [col, v] : r.terms) {
            require(col < n, ErrorCode::InvalidArgument, "equation references an unknown out of range");
            dense[col] += ring.from(v);
            ring.norm(dense[col]);
        }
        dense[n] = ring.from(r.rhs);
        ech.insert(std::move(dense));
    }
    SolveResult<T> out;
    if (ech.bad) {
        out.certificate = ech.bad;
        return out;
    }
    std::vector<std::size_t> cols;
    bool units = true;
    for (std::size_t c = 0; c < n; ++c)
        if (ech.has[c]) {
            cols.push_back(c);
            units = units && ring.unit(ech.pivot[c][c]);
        }
    out.rank = cols.size();
    out.x.assign(n, T(0));
    if (units) {
        // Back substitution; free unknowns are 0.
        for (auto it = cols.rbegin(); it != cols.rend(); ++it) {
            const auto& p = ech.pivot[*it];
            T acc = p[n];
            for (std::size_t k = *it + 1; k < n; ++k)
                if (!ring.zero(p[k])) acc -= p[k] * out.x[k];
            if constexpr (std::is_same_v<T, long long>) {
                ring.norm(acc);
                out.x[*it] = mod(acc * ring.inverse(p[*it]), ring.d);
            } else {
                out.x[*it] = acc * p[*it];  // p = +-1
            }
        }
        out.solvable = true;
        return out;
    }
    std::vector<std::vector<T>> a;
    std::vector<T> b;
    for (auto c : cols) {
        a.emplace_back(ech.pivot[c].begin(), ech.pivot[c].begin() + static_cast<long>(n));
        b.push_back(ech.pivot[c][n]);
    }
    auto q = identity(ring, n);
    std::size_t rank = diagonalize(ring, a, &b, &q, n);
    std::vector<T> y(n, T(0));
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (k >= rank) {
            if (!ring.zero(b[k])) {
                out.certificate = Infeasibility{"inconsistent-row", 0, Echelon<R>::to_integer(b[k])};
                return out;
            }
            continue;
        }
        const T& dk = a[k][k];
        if constexpr (std::is_same_v<T, long long>) {
            long long g = std::gcd(dk, ring.d);
            if (b[k] % g != 0) {
                out.certificate = Infeasibility{"divisibility", Integer(static_cast<long>(dk)), Integer(static_cast<long>(b[k]))};
                return out;
            }
            ModRing sub{ring.d / g};
            y[k] = sub.d == 1 ? 0 : mod((b[k] / g) * sub.inverse(mod(dk / g, sub.d)), sub.d);
        } else {
            if (!ring.divides(dk, b[k])) {
                out.certificate = Infeasibility{"divisibility", dk, b[k]};
                return out;
            }
            y[k] = b[k] / dk;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        T acc(0);
        for (std::size_t k = 0; k < n; ++k)
            if (!ring.zero(q[i][k]) && !ring.zero(y[k])) acc += q[i][k] * y[k];
        ring.norm(acc);
        out.x[i] = acc;
    }
    out.solvable = true;
    return out;
}

}  // namespace

SolveResult<Integer> solve_integer(std::size_t unknowns, const std::vector<SparseRow>& rows) {
    return solve(ZRing{}, unknowns, rows);
}

SolveResult<long long> solve_mod(std::size_t unknowns, const std::vector<SparseRow>& rows, long long d) {
    require(d >= 2, ErrorCode::InvalidArgument, "modulus must be at least 2");
    return solve(ModRing{d}, unknowns, rows);
}

SmithForm smith_normal_form(std::vector<std::vector<Integer>> a) {
    ZRing ring;
    const std::size_t cols = a.empty() ? 0 : a.front().size();
    for (const auto& row : a) require(row.size() == cols, ErrorCode::DimensionMismatch, "ragged matrix");
    std::size_t rank = diagonalize(ring, a, nullptr, nullptr, cols);
    SmithForm out;
    for (std::size_t k = 0; k < rank; ++k) out.diagonal.push_back(abs(a[k][k]));
    // Restore the divisibility chain: (x, y) -> (gcd, lcm) keeps the product and the module.
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = i + 1; j < rank; ++j) {
            Integer g = gcd(out.diagonal[i], out.diagonal[j]);
            Integer l = out.diagonal[i] / g * out.diagonal[j];
            out.diagonal[i] = g;
            out.diagonal[j] = l;
        }
    return out;
}

std::vector<std::vector<long long>> kernel_mod(const std::vector<std::vector<long long>>& a, std::size_t columns,
                                               long long d) {
    require(d >= 2, ErrorCode::InvalidArgument, "modulus must be at least 2");
    ModRing ring{d};
    std::vector<std::vector<long long>> m;
    for (const auto& row : a) {
        require(row.size() == columns, ErrorCode::DimensionMismatch, "ragged matrix");
        m.push_back(row);
        for (auto& v : m.back()) ring.norm(v);
    }
    auto q = identity(ring, columns);
    std::size_t rank = diagonalize(ring, m, nullptr, &q, columns);
    std::vector<std::vector<long long>> gens;
    for (std::size_t k = 0; k < columns; ++k) {
        long long scale = 1;
        if (k < rank) {
            scale = d / std::gcd(m[k][k], d);
            if (scale == d) continue;
        }
        std::vector<long long> v(columns);
        for (std::size_t i = 0; i < columns; ++i) v[i] = mod(q[i][k] * scale, d);
        if (std::any_of(v.begin(), v.end(), [](long long x) { return x != 0; })) gens.push_back(std::move(v));
    }
    return gens;
}

}  // namespace contextua
