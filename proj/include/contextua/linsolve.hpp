#pragma once

#include "contextua/numeric.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace contextua {

// One equation sum_k coeff_k x_{col_k} = rhs.
struct SparseRow {
    std::vector<std::pair<std::size_t, long long>> terms;
    Integer rhs = 0;
};

// Why a system has no solution: either a row reduced to 0 = c, or an invariant
// factor D that does not divide its transformed right-hand side c (mod the
// modulus when there is one).
struct Infeasibility {
    std::string kind;  // "inconsistent-row" or "divisibility"
    Integer factor = 0;
    Integer value = 0;
};

template <class T>
struct SolveResult {
    bool solvable = false;
    std::vector<T> x;  // one solution when solvable
    std::optional<Infeasibility> certificate;
    std::size_t rank = 0;
};

// Integer solutions of A x = b: incremental echelon form under unimodular row
// operations, then a Smith normal form of the surviving rows.
SolveResult<Integer> solve_integer(std::size_t unknowns, const std::vector<SparseRow>& rows);
// Solutions of A x = b over Z_d for any d >= 2: the same reduction over Z with
// entries kept reduced mod d, so composite moduli are handled.
SolveResult<long long> solve_mod(std::size_t unknowns, const std::vector<SparseRow>& rows, long long d);

struct SmithForm {
    std::vector<Integer> diagonal;     // nonzero invariant factors, each dividing the next
    std::vector<std::vector<Integer>> q;  // column transform: A Q = P^{-1} D
};
// Smith normal form of a dense integer matrix.
SmithForm smith_normal_form(std::vector<std::vector<Integer>> a);

// Generators of {v : A v = 0 mod d} for a dense matrix over Z_d.
std::vector<std::vector<long long>> kernel_mod(const std::vector<std::vector<long long>>& a, std::size_t columns,
                                               long long d);

}  // namespace contextua
