#pragma once

#include "contextua/linsolve.hpp"
#include "contextua/model.hpp"
#include "contextua/quantum.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace contextua {

// ---------------------------------------------------------------------------
// Partial monoids, actions and bundles. Elements are indices 0..size-1.

class PartialMonoid {
public:
    static constexpr std::size_t kUndefined = static_cast<std::size_t>(-1);

    // `table[a * size + b]` is a + b, or kUndefined.
    PartialMonoid(std::size_t size, std::size_t zero, std::vector<std::size_t> table,
                  std::vector<std::string> labels = {});
    // Z_k under addition.
    static PartialMonoid cyclic(std::size_t k);
    // k copies of Z_n sharing 0; sums across copies are undefined.
    static PartialMonoid wedge(std::size_t n, std::size_t k);
    // Direct product with componentwise sums; element (a, b) has index a * other.size() + b.
    static PartialMonoid product(const PartialMonoid& a, const PartialMonoid& b);

    std::size_t size() const { return size_; }
    std::size_t zero() const { return zero_; }
    bool defined(std::size_t a, std::size_t b) const { return table_[a * size_ + b] != kUndefined; }
    std::size_t plus(std::size_t a, std::size_t b) const;  // throws PreconditionViolated when undefined
    std::size_t raw(std::size_t a, std::size_t b) const { return table_[a * size_ + b]; }
    std::string label(std::size_t a) const;

    // Commutativity, identity and both associativity clauses, exhaustively.
    // Throws PreconditionViolated naming the failing axiom.
    void validate() const;
    // Contains zero and is closed under every defined sum of its elements.
    bool is_submonoid(const std::vector<std::size_t>& sub) const;
    // Every pair of elements has a defined sum.
    bool is_total(const std::vector<std::size_t>& sub) const;

private:
    std::size_t size_, zero_;
    std::vector<std::size_t> table_;
    std::vector<std::string> labels_;
};

// Z_d acting on a partial monoid: `table[g * size + m]` is g . m.
class GroupAction {
public:
    GroupAction(int d, std::size_t size, std::vector<std::size_t> table);
    // g . (a, m) = (a + g, m) on Z_d x M (product indexing as in PartialMonoid::product).
    static GroupAction trivial_bundle_action(int d, std::size_t base_size);

    int order() const { return d_; }
    std::size_t size() const { return size_; }
    std::size_t act(long long g, std::size_t m) const { return table_[static_cast<std::size_t>(mod(g, d_)) * size_ + m]; }

    // act(0, .) = id, act(g, .) act(g', .) = act(g + g', .), and the
    // homomorphism property on G x M. Throws PreconditionViolated.
    void validate(const PartialMonoid& m) const;
    bool is_free() const;

private:
    int d_;
    std::size_t size_;
    std::vector<std::size_t> table_;
};

class Bundle {
public:
    // Validates: action free and compatible, proj a surjective homomorphism,
    // orbits equal fibres, and every lift of a defined base sum is defined.
    Bundle(PartialMonoid total, PartialMonoid base, GroupAction action, std::vector<std::size_t> proj);
    // Z_d x M with the first-component action and the second projection.
    static Bundle trivial(int d, const PartialMonoid& base);

    const PartialMonoid& total() const { return total_; }
    const PartialMonoid& base() const { return base_; }
    const GroupAction& action() const { return action_; }
    int order() const { return action_.order(); }
    std::size_t proj(std::size_t n) const { return proj_[n]; }
    const std::vector<std::size_t>& fiber(std::size_t m) const { return fibers_.at(m); }
    // The unique g with a = g . b; a and b must lie in one fibre.
    long long difference(std::size_t a, std::size_t b) const;
    // A set-theoretic section: the first element of each fibre.
    std::vector<std::size_t> any_section() const;

private:
    PartialMonoid total_, base_;
    GroupAction action_;
    std::vector<std::size_t> proj_;
    std::vector<std::vector<std::size_t>> fibers_;
    std::vector<long long> offset_;  // n = offset_[n] . fibers_[proj(n)][0]
};

// Splittings. A left splitting is N -> Z_d, a right splitting M -> N, and a
// trivialization N -> Z_d x M stored as (a, m) pairs.
using LeftSplitting = std::vector<long long>;
using RightSplitting = std::vector<std::size_t>;
using Trivialization = std::vector<std::pair<long long, std::size_t>>;

bool is_left_splitting(const Bundle& b, const LeftSplitting& l);
bool is_right_splitting(const Bundle& b, const RightSplitting& r);
bool is_trivialization(const Bundle& b, const Trivialization& h);

// <l, j>; throws NotActionHomomorphism unless l is a left splitting.
Trivialization trivialization_of(const Bundle& b, const LeftSplitting& l);
// pi_1 . h; throws NotActionHomomorphism unless h is a trivialization.
LeftSplitting left_of_trivialization(const Bundle& b, const Trivialization& h);
// R(l)(m) = (-l(eta(m))) . eta(m), for any set section eta.
RightSplitting right_from_left(const Bundle& b, const LeftSplitting& l);
// Inverse of R: l(n) is the unique g with n = g . r(j(n)).
LeftSplitting left_from_right(const Bundle& b, const RightSplitting& r);
// h^{-1}(a, m) = (a - h_1(eta(m))) . eta(m).
std::size_t trivialization_inverse(const Bundle& b, const Trivialization& h, long long a, std::size_t m);

// Every right splitting, by exhaustive search over set sections (small bundles only).
std::vector<RightSplitting> all_right_splittings(const Bundle& b, std::size_t cap = 1'000'000);

// ---------------------------------------------------------------------------
// Relative cochains C^n(M, M'; Z_d) for n = 0..3.

class CochainComplex {
public:
    // `sub` must be a sub partial monoid of m. M_2 holds pairs with a defined
    // sum; M_3 holds triples whose two bracketings and both adjacent sums are defined.
    CochainComplex(const PartialMonoid& m, std::vector<std::size_t> sub, int d);

    const PartialMonoid& monoid() const { return *m_; }
    int order() const { return d_; }
    const std::vector<std::size_t>& sub() const { return sub_; }
    bool in_sub(std::size_t x) const { return in_sub_[x] != 0; }
    const std::vector<std::vector<std::size_t>>& simplices(int n) const { return simplices_.at(static_cast<std::size_t>(n)); }
    std::size_t index(const std::vector<std::size_t>& t) const;  // throws PreconditionViolated if t is not in M_n
    // Whether a simplex lies in M'_n, where relative cochains vanish.
    bool relative_simplex(int n, std::size_t idx) const;

private:
    const PartialMonoid* m_;
    std::vector<std::size_t> sub_;
    std::vector<char> in_sub_;
    int d_;
    std::vector<std::vector<std::vector<std::size_t>>> simplices_;
    std::vector<std::vector<std::size_t>> pair_index_;  // (a, b) -> index in M_2
};

struct RelativeCochain {
    int degree = 0;
    std::vector<long long> values;  // aligned with simplices(degree), reduced mod d
};

RelativeCochain zero_cochain(const CochainComplex& cx, int degree);
bool is_relative(const CochainComplex& cx, const RelativeCochain& f);
// d^n for n = 0, 1, 2 by the alternating face sum.
RelativeCochain coboundary(const CochainComplex& cx, const RelativeCochain& f);

struct ObstructionClass {
    RelativeCochain delta_eta;               // degree 2
    std::vector<std::size_t> section;        // the eta used
    bool vanishes = false;
    std::optional<RelativeCochain> witness;  // gamma with d1 gamma = delta_eta
    std::optional<RightSplitting> extension; // r(m) = gamma(m) . eta(m)
    std::optional<Infeasibility> certificate;
};

// Delta eta: eta(m1 + m2) = Delta eta(m1, m2) . (eta(m1) + eta(m2)).
RelativeCochain delta_eta(const Bundle& b, const CochainComplex& cx, const std::vector<std::size_t>& eta);

// Obstruction to extending a right splitting `local` of the restriction to
// `sub` (aligned with `sub`). `eta`, when given, must extend `local`.
ObstructionClass bundle_obstruction(const Bundle& b, const std::vector<std::size_t>& sub,
                                    const std::vector<std::size_t>& local,
                                    std::optional<std::vector<std::size_t>> eta = std::nullopt);

// ---------------------------------------------------------------------------
// Closed sets of Weyl operators, stored symbolically as omega^phase (x) D(p_i),
// with D(p) the normalized Weyl operator of weyl_observable.

struct WeylElement {
    int phase = 0;
    std::vector<WeylLabel> labels;
    auto operator<=>(const WeylElement&) const = default;
};

// Summed commutation_phase over the qudits; 0 iff the operators commute.
int weyl_commutator(int d, const WeylElement& a, const WeylElement& b);
// Operator product of commuting elements (PreconditionViolated otherwise).
WeylElement weyl_product(int d, const WeylElement& a, const WeylElement& b);
Matrix weyl_matrix(int d, const WeylElement& e);
// For d = 2, letters I, X, Y, Z name Hermitian Paulis (Y = -D(1,1)) with an
// optional leading '-'. Otherwise "p1,p2" per qudit separated by ';' with an
// optional "q:" phase prefix. Examples: "XZ", "-YY", "1:1,0;0,2".
WeylElement parse_weyl(int d, std::size_t qudits, const std::string& text);
std::string weyl_text(int d, const WeylElement& e);

struct ClosedWeylSet {
    int d = 2;
    std::size_t qudits = 0;
    std::vector<WeylElement> elements;  // sorted
    PartialMonoid monoid;
    GroupAction phase_action;

    std::size_t index_of(const WeylElement& e) const;  // throws InvalidArgument if absent
};

// Closure of the generators under identity, phases and commuting products.
// Throws ClosureTooLarge when the closure exceeds `cap` elements.
ClosedWeylSet closed_weyl_set(const std::vector<WeylElement>& generators, int d, std::size_t cap = 4096);

// Quotient bundle O -> O / Omega; throws ActionNotFree.
Bundle bundle_from_closed_set(const PartialMonoid& o, const GroupAction& omega);

// A scenario (X, M, Z_d) with the structure of a bundle: maximal contexts are
// maximal submonoids closed under the action, and every supported section is
// an action homomorphism C -> Z_d.
struct BundleModel {
    int d = 2;
    PartialMonoid monoid;
    GroupAction action;
    std::vector<std::vector<std::size_t>> contexts;              // sorted element lists
    std::vector<std::vector<std::vector<long long>>> sections;  // per context, values aligned with the context
    std::vector<std::string> labels;
};

// All action homomorphisms of a total submonoid closed under the action.
std::vector<std::vector<long long>> action_homomorphisms(const PartialMonoid& m, const GroupAction& a,
                                                         const std::vector<std::size_t>& context);
// Maximal pairwise-commuting subsets of a closed set.
std::vector<std::vector<std::size_t>> maximal_commuting_contexts(const ClosedWeylSet& o);
// Every joint eigenvalue assignment (state-independent model).
BundleModel state_independent_model(const ClosedWeylSet& o);
// Sections with nonzero Born probability on psi.
BundleModel state_dependent_model(const ClosedWeylSet& o, const Vector& psi);
// Elements with psi as eigenvector, and their outcomes.
std::vector<std::pair<std::size_t, long long>> deterministic_elements(const ClosedWeylSet& o, const Vector& psi);

// ---------------------------------------------------------------------------
// The Cech obstruction over the free abelian presheaf.

struct SupportFamily {
    std::size_t measurements = 0;
    std::vector<Context> contexts;                   // maximal contexts
    std::vector<std::vector<LocalSection>> supports;  // supported sections per context
};

SupportFamily support_family(const PossibilisticModel& m);
SupportFamily support_family(const BundleModel& m);

struct CechResult {
    bool vanishes = false;
    // When vanishing: r_C(s) per context, aligned with supports.
    std::vector<std::vector<Integer>> family;
    std::optional<Infeasibility> certificate;
    std::size_t unknowns = 0, equations = 0;
};

// Decides whether 1.s_0 (section `section` of supports[context]) extends to a
// compatible family. Throws CoverDisconnected.
CechResult cech_obstruction(const SupportFamily& f, std::size_t context, std::size_t section);
CechResult cech_obstruction(const PossibilisticModel& m, const Context& c0, const LocalSection& s0);

struct LinearEquation {
    std::size_t context = 0;
    std::vector<long long> coefficients;  // aligned with the context
    long long constant = 0;
};

struct AvNResult {
    bool is_avn = false;
    int d = 2;
    std::vector<LinearEquation> theory;  // generators of Th_{Z_d} per context
    std::optional<Infeasibility> certificate;
};

// Outcome values are outcome indices. Throws MixedOutcomeAlphabets unless
// every measurement has d outcomes.
AvNResult avn_check(const PossibilisticModel& m);
AvNResult avn_check(const SupportFamily& f, int d);

// The Z-module collapse g(x) = sum_s r_C(s) s(x) of a compatible family on a
// bundle model. Throws NotAffine unless every context's coefficients sum to 1,
// and NotActionHomomorphism if the collapse is not a global left splitting.
LeftSplitting collapse_family_to_splitting(const BundleModel& m, const std::vector<std::vector<Integer>>& family);

// One comparison instance: the Cech verdict and the bundle verdict for the
// same local section, and whether the collapse succeeded.
struct ComparisonOutcome {
    bool cech_vanishes = false;
    bool bundle_vanishes = false;
    bool collapse_ok = false;  // meaningful when cech_vanishes
    std::string failure;       // non-empty on a counterexample
};
ComparisonOutcome compare_obstructions(const BundleModel& m, const SupportFamily& f, const Bundle& b,
                                       std::size_t context, std::size_t section);

// The bundle obstruction for a supported section s of a context: sub = C / theta,
// local right splitting R(s).
ObstructionClass section_obstruction(const BundleModel& m, const Bundle& b, std::size_t context, std::size_t section);
// Quotient bundle of a bundle model (total = all measurements).
Bundle bundle_of(const BundleModel& m);

}  // namespace contextua
