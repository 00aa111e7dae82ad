#include "contextua/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace contextua {

namespace {

constexpr std::size_t kNone = PartialMonoid::kUndefined;

std::string describe(const PartialMonoid& m, std::initializer_list<std::size_t> xs) {
    std::string out = "(";
    bool first = true;
    for (auto x : xs) {
        out += (first ? "" : ", ") + m.label(x);
        first = false;
    }
    return out + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// PartialMonoid

PartialMonoid::PartialMonoid(std::size_t size, std::size_t zero, std::vector<std::size_t> table,
                             std::vector<std::string> labels)
    : size_(size), zero_(zero), table_(std::move(table)), labels_(std::move(labels)) {
    require(size_ > 0, ErrorCode::InvalidArgument, "partial monoid needs at least the identity");
    require(zero_ < size_, ErrorCode::InvalidArgument, "identity out of range");
    require(table_.size() == size_ * size_, ErrorCode::DimensionMismatch, "product table must be size x size");
    for (auto v : table_) require(v == kNone || v < size_, ErrorCode::InvalidArgument, "product out of range");
    require(labels_.empty() || labels_.size() == size_, ErrorCode::DimensionMismatch, "one label per element");
}

PartialMonoid PartialMonoid::cyclic(std::size_t k) {
    std::vector<std::size_t> t(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) t[a * k + b] = (a + b) % k;
    return PartialMonoid(k, 0, std::move(t));
}

PartialMonoid PartialMonoid::wedge(std::size_t n, std::size_t k) {
    // Element 0 is shared; copy c holds 1 + c (n - 1) .. c (n - 1) + n - 1.
    const std::size_t size = 1 + k * (n - 1);
    auto index = [&](std::size_t c, std::size_t a) { return a == 0 ? 0 : 1 + c * (n - 1) + (a - 1); };
    std::vector<std::size_t> t(size * size, kNone);
    for (std::size_t x = 0; x < size; ++x) t[x] = t[x * size] = x;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 1; a < n; ++a)
            for (std::size_t b = 1; b < n; ++b) t[index(c, a) * size + index(c, b)] = index(c, (a + b) % n);
    return PartialMonoid(size, 0, std::move(t));
}

PartialMonoid PartialMonoid::product(const PartialMonoid& a, const PartialMonoid& b) {
    const std::size_t n = a.size() * b.size();
    std::vector<std::size_t> t(n * n, kNone);
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < n; ++x) {
        labels.push_back("(" + a.label(x / b.size()) + "," + b.label(x % b.size()) + ")");
        for (std::size_t y = 0; y < n; ++y) {
            auto s1 = a.raw(x / b.size(), y / b.size()), s2 = b.raw(x % b.size(), y % b.size());
            if (s1 != kNone && s2 != kNone) t[x * n + y] = s1 * b.size() + s2;
        }
    }
    return PartialMonoid(n, a.zero() * b.size() + b.zero(), std::move(t), std::move(labels));
}

std::size_t PartialMonoid::plus(std::size_t a, std::size_t b) const {
    auto v = table_.at(a * size_ + b);
    require(v != kNone, ErrorCode::PreconditionViolated, "sum " + describe(*this, {a, b}) + " is undefined");
    return v;
}

std::string PartialMonoid::label(std::size_t a) const { return labels_.empty() ? std::to_string(a) : labels_.at(a); }

void PartialMonoid::validate() const {
    const std::size_t n = size_;
    for (std::size_t a = 0; a < n; ++a) {
        require(raw(zero_, a) == a, ErrorCode::PreconditionViolated, "identity fails at " + label(a));
        for (std::size_t b = 0; b < n; ++b)
            require(raw(a, b) == raw(b, a), ErrorCode::PreconditionViolated,
                    "commutativity fails at " + describe(*this, {a, b}));
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const auto ab = raw(a, b);
            for (std::size_t c = 0; c < n; ++c) {
                const auto bc = raw(b, c);
                const auto left = ab == kNone ? kNone : raw(ab, c);
                const auto right = bc == kNone ? kNone : raw(a, bc);
                if (left != kNone && right != kNone)
                    require(left == right, ErrorCode::PreconditionViolated,
                            "associativity fails at " + describe(*this, {a, b, c}));
                if (ab != kNone && bc != kNone && raw(a, c) != kNone)
                    require(left != kNone && right != kNone, ErrorCode::PreconditionViolated,
                            "pairwise sums defined but a bracketing is not at " + describe(*this, {a, b, c}));
            }
        }
}

bool PartialMonoid::is_submonoid(const std::vector<std::size_t>& sub) const {
    std::vector<char> in(size_, 0);
    for (auto x : sub) {
        if (x >= size_) return false;
        in[x] = 1;
    }
    if (!in[zero_]) return false;
    for (auto a : sub)
        for (auto b : sub)
            if (raw(a, b) != kNone && !in[raw(a, b)]) return false;
    return true;
}

bool PartialMonoid::is_total(const std::vector<std::size_t>& sub) const {
    for (auto a : sub)
        for (auto b : sub)
            if (raw(a, b) == kNone) return false;
    return true;
}

// ---------------------------------------------------------------------------
// GroupAction

GroupAction::GroupAction(int d, std::size_t size, std::vector<std::size_t> table)
    : d_(d), size_(size), table_(std::move(table)) {
    require(d_ >= 1, ErrorCode::InvalidArgument, "group order must be positive");
    require(table_.size() == static_cast<std::size_t>(d_) * size_, ErrorCode::DimensionMismatch,
            "action table must be d x size");
    for (auto v : table_) require(v < size_, ErrorCode::InvalidArgument, "action value out of range");
}

GroupAction GroupAction::trivial_bundle_action(int d, std::size_t base_size) {
    const std::size_t n = static_cast<std::size_t>(d) * base_size;
    std::vector<std::size_t> t(static_cast<std::size_t>(d) * n);
    for (int g = 0; g < d; ++g)
        for (std::size_t x = 0; x < n; ++x)
            t[static_cast<std::size_t>(g) * n + x] = ((x / base_size + static_cast<std::size_t>(g)) % static_cast<std::size_t>(d)) * base_size + x % base_size;
    return GroupAction(d, n, std::move(t));
}

void GroupAction::validate(const PartialMonoid& m) const {
    require(m.size() == size_, ErrorCode::DimensionMismatch, "action and monoid sizes differ");
    for (std::size_t x = 0; x < size_; ++x) {
        require(act(0, x) == x, ErrorCode::PreconditionViolated, "act(0, .) is not the identity at " + m.label(x));
        for (int g = 0; g < d_; ++g)
            for (int h = 0; h < d_; ++h)
                require(act(g, act(h, x)) == act(g + h, x), ErrorCode::PreconditionViolated,
                        "act(g) act(h) != act(g + h) at " + m.label(x));
    }
    for (std::size_t x = 0; x < size_; ++x)
        for (std::size_t y = 0; y < size_; ++y) {
            if (!m.defined(x, y)) continue;
            const auto xy = m.raw(x, y);
            for (int g = 0; g < d_; ++g)
                for (int h = 0; h < d_; ++h) {
                    const auto s = m.raw(act(g, x), act(h, y));
                    require(s != kNone && s == act(g + h, xy), ErrorCode::PreconditionViolated,
                            "action is not a homomorphism on G x M at " + describe(m, {x, y}));
                }
        }
}

bool GroupAction::is_free() const {
    for (std::size_t x = 0; x < size_; ++x)
        for (int g = 1; g < d_; ++g)
            if (act(g, x) == x) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Bundle

Bundle::Bundle(PartialMonoid total, PartialMonoid base, GroupAction action, std::vector<std::size_t> proj)
    : total_(std::move(total)), base_(std::move(base)), action_(std::move(action)), proj_(std::move(proj)) {
    total_.validate();
    base_.validate();
    action_.validate(total_);
    require(action_.is_free(), ErrorCode::ActionNotFree, "bundle action has a fixed point");
    require(proj_.size() == total_.size(), ErrorCode::DimensionMismatch, "projection must cover the total monoid");
    fibers_.assign(base_.size(), {});
    for (std::size_t n = 0; n < proj_.size(); ++n) {
        require(proj_[n] < base_.size(), ErrorCode::InvalidArgument, "projection value out of range");
        fibers_[proj_[n]].push_back(n);
    }
    for (std::size_t m = 0; m < base_.size(); ++m)
        require(!fibers_[m].empty(), ErrorCode::NoSection, "projection misses base element " + base_.label(m));
    require(proj_[total_.zero()] == base_.zero(), ErrorCode::PreconditionViolated, "projection does not preserve zero");
    for (std::size_t a = 0; a < total_.size(); ++a)
        for (std::size_t b = 0; b < total_.size(); ++b)
            if (total_.defined(a, b))
                require(base_.raw(proj_[a], proj_[b]) == proj_[total_.raw(a, b)], ErrorCode::PreconditionViolated,
                        "projection does not preserve " + describe(total_, {a, b}));
    const auto d = static_cast<std::size_t>(action_.order());
    offset_.assign(total_.size(), -1);
    for (std::size_t m = 0; m < base_.size(); ++m) {
        require(fibers_[m].size() == d, ErrorCode::PreconditionViolated,
                "fibre over " + base_.label(m) + " is not a single orbit");
        for (std::size_t g = 0; g < d; ++g) {
            auto n = action_.act(static_cast<long long>(g), fibers_[m][0]);
            require(proj_[n] == m, ErrorCode::PreconditionViolated, "orbit leaves the fibre over " + base_.label(m));
            offset_[n] = static_cast<long long>(g);
        }
    }
    for (std::size_t m1 = 0; m1 < base_.size(); ++m1)
        for (std::size_t m2 = 0; m2 < base_.size(); ++m2)
            if (base_.defined(m1, m2))
                for (auto n1 : fibers_[m1])
                    for (auto n2 : fibers_[m2])
                        require(total_.defined(n1, n2), ErrorCode::PreconditionViolated,
                                "a lift of " + describe(base_, {m1, m2}) + " has no sum");
}

Bundle Bundle::trivial(int d, const PartialMonoid& base) {
    auto total = PartialMonoid::product(PartialMonoid::cyclic(static_cast<std::size_t>(d)), base);
    std::vector<std::size_t> proj(total.size());
    for (std::size_t n = 0; n < total.size(); ++n) proj[n] = n % base.size();
    return Bundle(std::move(total), base, GroupAction::trivial_bundle_action(d, base.size()), std::move(proj));
}

long long Bundle::difference(std::size_t a, std::size_t b) const {
    require(proj_.at(a) == proj_.at(b), ErrorCode::PreconditionViolated, "elements lie in different fibres");
    return mod(offset_[a] - offset_[b], order());
}

std::vector<std::size_t> Bundle::any_section() const {
    std::vector<std::size_t> eta;
    for (const auto& f : fibers_) eta.push_back(f.front());
    return eta;
}

// ---------------------------------------------------------------------------
// Splittings

bool is_left_splitting(const Bundle& b, const LeftSplitting& l) {
    const auto& n = b.total();
    const int d = b.order();
    if (l.size() != n.size() || mod(l[n.zero()], d) != 0) return false;
    for (std::size_t x = 0; x < n.size(); ++x) {
        for (int g = 0; g < d; ++g)
            if (mod(l[b.action().act(g, x)] - l[x] - g, d) != 0) return false;
        for (std::size_t y = 0; y < n.size(); ++y)
            if (n.defined(x, y) && mod(l[n.raw(x, y)] - l[x] - l[y], d) != 0) return false;
    }
    return true;
}

bool is_right_splitting(const Bundle& b, const RightSplitting& r) {
    const auto& m = b.base();
    if (r.size() != m.size()) return false;
    for (std::size_t x = 0; x < m.size(); ++x)
        if (r[x] >= b.total().size() || b.proj(r[x]) != x) return false;
    if (r[m.zero()] != b.total().zero()) return false;
    for (std::size_t x = 0; x < m.size(); ++x)
        for (std::size_t y = 0; y < m.size(); ++y)
            if (m.defined(x, y) && b.total().raw(r[x], r[y]) != r[m.raw(x, y)]) return false;
    return true;
}

bool is_trivialization(const Bundle& b, const Trivialization& h) {
    const auto& n = b.total();
    const int d = b.order();
    if (h.size() != n.size()) return false;
    for (std::size_t x = 0; x < n.size(); ++x)
        if (h[x].second != b.proj(x)) return false;
    LeftSplitting first;
    for (const auto& [a, m] : h) first.push_back(a);
    // With j = pi_2 h already checked, h is an action homomorphism into Z_d x M
    // exactly when its first component is one into Z_d.
    (void)d;
    return is_left_splitting(b, first);
}

Trivialization trivialization_of(const Bundle& b, const LeftSplitting& l) {
    require(is_left_splitting(b, l), ErrorCode::NotActionHomomorphism, "not a left splitting");
    Trivialization h;
    for (std::size_t x = 0; x < l.size(); ++x) h.emplace_back(mod(l[x], b.order()), b.proj(x));
    return h;
}

LeftSplitting left_of_trivialization(const Bundle& b, const Trivialization& h) {
    require(is_trivialization(b, h), ErrorCode::NotActionHomomorphism, "not a trivialization");
    LeftSplitting l;
    for (const auto& [a, m] : h) l.push_back(mod(a, b.order()));
    return l;
}

RightSplitting right_from_left(const Bundle& b, const LeftSplitting& l) {
    require(is_left_splitting(b, l), ErrorCode::NotActionHomomorphism, "not a left splitting");
    RightSplitting r;
    for (auto e : b.any_section()) r.push_back(b.action().act(-l[e], e));
    return r;
}

LeftSplitting left_from_right(const Bundle& b, const RightSplitting& r) {
    require(is_right_splitting(b, r), ErrorCode::PreconditionViolated, "not a right splitting");
    LeftSplitting l;
    for (std::size_t n = 0; n < b.total().size(); ++n) l.push_back(b.difference(n, r[b.proj(n)]));
    return l;
}

std::size_t trivialization_inverse(const Bundle& b, const Trivialization& h, long long a, std::size_t m) {
    require(m < b.base().size(), ErrorCode::InvalidArgument, "base element out of range");
    const auto e = b.fiber(m).front();
    return b.action().act(a - h.at(e).first, e);
}

std::vector<RightSplitting> all_right_splittings(const Bundle& b, std::size_t cap) {
    const auto& m = b.base();
    const auto& n = b.total();
    const std::size_t size = m.size();
    std::vector<RightSplitting> out;
    RightSplitting r(size, kNone);
    std::size_t nodes = 0;
    // Checks every relation r(x) + r(y) = r(x + y) whose three terms are assigned and involve z.
    auto consistent = [&](std::size_t z) {
        for (std::size_t x = 0; x < size; ++x) {
            if (r[x] == kNone) continue;
            for (std::size_t y = 0; y < size; ++y) {
                if (r[y] == kNone || !m.defined(x, y)) continue;
                auto s = m.raw(x, y);
                if (r[s] == kNone || (x != z && y != z && s != z)) continue;
                if (n.raw(r[x], r[y]) != r[s]) return false;
            }
        }
        return true;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t x) {
        if (x == size) {
            out.push_back(r);
            return;
        }
        for (auto e : b.fiber(x)) {
            require(++nodes <= cap, ErrorCode::SearchSpaceTooLarge, "right splitting search exceeds the cap");
            if (x == m.zero() && e != n.zero()) continue;
            r[x] = e;
            if (consistent(x)) rec(x + 1);
            r[x] = kNone;
        }
    };
    rec(0);
    return out;
}

// ---------------------------------------------------------------------------
// Relative cochains

CochainComplex::CochainComplex(const PartialMonoid& m, std::vector<std::size_t> sub, int d)
    : m_(&m), sub_(std::move(sub)), in_sub_(m.size(), 0), d_(d) {
    require(d_ >= 2, ErrorCode::InvalidArgument, "coefficient group order must be at least 2");
    require(m.is_submonoid(sub_), ErrorCode::PreconditionViolated, "not a sub partial monoid");
    std::sort(sub_.begin(), sub_.end());
    sub_.erase(std::unique(sub_.begin(), sub_.end()), sub_.end());
    for (auto x : sub_) in_sub_[x] = 1;
    const std::size_t n = m.size();
    simplices_.resize(4);
    simplices_[0].push_back({});
    for (std::size_t a = 0; a < n; ++a) simplices_[1].push_back({a});
    pair_index_.assign(n, std::vector<std::size_t>(n, kNone));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (m.defined(a, b)) {
                pair_index_[a][b] = simplices_[2].size();
                simplices_[2].push_back({a, b});
            }
    for (const auto& ab : simplices_[2]) {
        const auto s = m.raw(ab[0], ab[1]);
        for (std::size_t c = 0; c < n; ++c) {
            const auto bc = m.raw(ab[1], c);
            if (bc == kNone || m.raw(s, c) == kNone || m.raw(ab[0], bc) == kNone) continue;
            simplices_[3].push_back({ab[0], ab[1], c});
        }
    }
}

std::size_t CochainComplex::index(const std::vector<std::size_t>& t) const {
    switch (t.size()) {
        case 0:
            return 0;
        case 1:
            require(t[0] < m_->size(), ErrorCode::PreconditionViolated, "element out of range");
            return t[0];
        case 2: {
            auto idx = pair_index_.at(t[0]).at(t[1]);
            require(idx != kNone, ErrorCode::PreconditionViolated, "pair is not in M_2");
            return idx;
        }
        case 3: {
            auto it = std::lower_bound(simplices_[3].begin(), simplices_[3].end(), t);
            require(it != simplices_[3].end() && *it == t, ErrorCode::PreconditionViolated, "triple is not in M_3");
            return static_cast<std::size_t>(it - simplices_[3].begin());
        }
        default:
            fail(ErrorCode::PreconditionViolated, "only degrees 0..3 are materialized");
    }
}

bool CochainComplex::relative_simplex(int n, std::size_t idx) const {
    for (auto x : simplices(n).at(idx))
        if (!in_sub(x)) return false;
    return true;
}

RelativeCochain zero_cochain(const CochainComplex& cx, int degree) {
    return {degree, std::vector<long long>(cx.simplices(degree).size(), 0)};
}

bool is_relative(const CochainComplex& cx, const RelativeCochain& f) {
    if (f.degree < 0 || f.degree > 3 || f.values.size() != cx.simplices(f.degree).size()) return false;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (cx.relative_simplex(f.degree, i) && mod(f.values[i], cx.order()) != 0) return false;
    return true;
}

RelativeCochain coboundary(const CochainComplex& cx, const RelativeCochain& f) {
    const int n = f.degree;
    require(n >= 0 && n <= 2, ErrorCode::PreconditionViolated, "coboundary implemented for degrees 0, 1, 2");
    require(f.values.size() == cx.simplices(n).size(), ErrorCode::DimensionMismatch, "cochain size mismatch");
    const auto& m = cx.monoid();
    RelativeCochain out{n + 1, {}};
    for (const auto& t : cx.simplices(n + 1)) {
        long long acc = 0;
        // Face 0 drops the first entry, face n+1 the last, face i merges entries i-1 and i.
        for (int i = 0; i <= n + 1; ++i) {
            std::vector<std::size_t> face;
            for (int k = 0; k < n; ++k) {
                if (i == 0) {
                    face.push_back(t[static_cast<std::size_t>(k + 1)]);
                } else if (i == n + 1) {
                    face.push_back(t[static_cast<std::size_t>(k)]);
                } else if (k < i - 1) {
                    face.push_back(t[static_cast<std::size_t>(k)]);
                } else if (k == i - 1) {
                    face.push_back(m.plus(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(k + 1)]));
                } else {
                    face.push_back(t[static_cast<std::size_t>(k + 1)]);
                }
            }
            const long long v = f.values[cx.index(face)];
            acc += (i % 2 == 0) ? v : -v;
        }
        out.values.push_back(mod(acc, cx.order()));
    }
    return out;
}

RelativeCochain delta_eta(const Bundle& b, const CochainComplex& cx, const std::vector<std::size_t>& eta) {
    require(eta.size() == b.base().size(), ErrorCode::DimensionMismatch, "section must cover the base");
    RelativeCochain out{2, {}};
    for (const auto& t : cx.simplices(2)) {
        const auto lifted = b.total().plus(eta[t[0]], eta[t[1]]);
        out.values.push_back(b.difference(eta[b.base().plus(t[0], t[1])], lifted));
    }
    return out;
}

ObstructionClass bundle_obstruction(const Bundle& b, const std::vector<std::size_t>& sub,
                                    const std::vector<std::size_t>& local, std::optional<std::vector<std::size_t>> eta) {
    const auto& base = b.base();
    const auto& total = b.total();
    const int d = b.order();
    require(local.size() == sub.size(), ErrorCode::DimensionMismatch, "local splitting must align with the submonoid");
    CochainComplex cx(base, sub, d);
    std::vector<std::size_t> local_of(base.size(), kNone);
    for (std::size_t k = 0; k < sub.size(); ++k) {
        require(local[k] < total.size() && b.proj(local[k]) == sub[k], ErrorCode::PreconditionViolated,
                "local splitting is not a section over " + base.label(sub[k]));
        local_of[sub[k]] = local[k];
    }
    require(local_of[base.zero()] == total.zero(), ErrorCode::PreconditionViolated, "local splitting moves zero");
    for (auto x : cx.sub())
        for (auto y : cx.sub())
            if (base.defined(x, y))
                require(total.raw(local_of[x], local_of[y]) == local_of[base.raw(x, y)], ErrorCode::PreconditionViolated,
                        "local splitting is not a homomorphism at " + describe(base, {x, y}));

    ObstructionClass out;
    if (eta) {
        require(eta->size() == base.size(), ErrorCode::DimensionMismatch, "section must cover the base");
        for (std::size_t m = 0; m < base.size(); ++m) {
            require((*eta)[m] < total.size() && b.proj((*eta)[m]) == m, ErrorCode::PreconditionViolated,
                    "eta is not a set section");
            require(local_of[m] == kNone || local_of[m] == (*eta)[m], ErrorCode::PreconditionViolated,
                    "eta does not extend the local splitting");
        }
        out.section = *eta;
    } else {
        out.section = b.any_section();
        for (std::size_t m = 0; m < base.size(); ++m)
            if (local_of[m] != kNone) out.section[m] = local_of[m];
    }
    out.delta_eta = delta_eta(b, cx, out.section);
    require(is_relative(cx, out.delta_eta), ErrorCode::Internal, "Delta eta does not vanish on the submonoid");

    // Unknowns gamma(m) for m outside the submonoid; gamma vanishes on it.
    std::vector<std::size_t> unknown(base.size(), kNone);
    std::size_t u = 0;
    for (std::size_t m = 0; m < base.size(); ++m)
        if (!cx.in_sub(m)) unknown[m] = u++;
    std::vector<SparseRow> rows;
    const auto& pairs = cx.simplices(2);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto m1 = pairs[i][0], m2 = pairs[i][1];
        if (m1 > m2) continue;  // the (m2, m1) equation is the same
        SparseRow row;
        std::map<std::size_t, long long> terms;
        if (unknown[m1] != kNone) terms[unknown[m1]] += 1;
        if (unknown[m2] != kNone) terms[unknown[m2]] += 1;
        const auto s = base.raw(m1, m2);
        if (unknown[s] != kNone) terms[unknown[s]] -= 1;
        for (const auto& [k, v] : terms)
            if (mod(v, d) != 0) row.terms.emplace_back(k, v);
        row.rhs = Integer(static_cast<long>(out.delta_eta.values[i]));
        if (row.terms.empty() && row.rhs == 0) continue;
        rows.push_back(std::move(row));
    }
    auto sol = solve_mod(u, rows, d);
    out.vanishes = sol.solvable;
    out.certificate = sol.certificate;
    if (!sol.solvable) return out;

    RelativeCochain gamma = zero_cochain(cx, 1);
    for (std::size_t m = 0; m < base.size(); ++m)
        if (unknown[m] != kNone) gamma.values[m] = sol.x[unknown[m]];
    RightSplitting r;
    for (std::size_t m = 0; m < base.size(); ++m) r.push_back(b.action().act(gamma.values[m], out.section[m]));
    // Soundness: the extension is checked pointwise, never assumed.
    require(coboundary(cx, gamma).values == out.delta_eta.values, ErrorCode::Internal, "d1 gamma != Delta eta");
    require(is_right_splitting(b, r), ErrorCode::Internal, "extension is not a right splitting");
    for (std::size_t k = 0; k < sub.size(); ++k)
        require(r[sub[k]] == local[k], ErrorCode::Internal, "extension does not restrict to the local splitting");
    out.witness = std::move(gamma);
    out.extension = std::move(r);
    return out;
}

// ---------------------------------------------------------------------------
// Weyl operators

namespace {

// c_p = zeta^{h(p)} with zeta = exp(i pi / d), as in weyl_normalizer.
int half_phase(int d, WeylLabel p) { return (d % 2 == 0 && (p.p1 * p.p2) % 2 == 1) ? 1 : 0; }

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

int weyl_commutator(int d, const WeylElement& a, const WeylElement& b) {
    require(a.labels.size() == b.labels.size(), ErrorCode::DimensionMismatch, "Weyl elements on different qudit counts");
    long long c = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) c += commutation_phase(d, a.labels[i], b.labels[i]);
    return static_cast<int>(mod(c, d));
}

WeylElement weyl_product(int d, const WeylElement& a, const WeylElement& b) {
    require(weyl_commutator(d, a, b) == 0, ErrorCode::PreconditionViolated, "product of non-commuting Weyl elements");
    // D(p) D(q) = zeta^{2 q1 p2 + h(p+q) - h(p) - h(q)} D(p+q), zeta^2 = omega.
    WeylElement out;
    long long zeta = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const auto p = a.labels[i], q = b.labels[i];
        const auto s = weyl_label(d, p.p1 + q.p1, p.p2 + q.p2);
        zeta += 2LL * q.p1 * p.p2 + half_phase(d, s) - half_phase(d, p) - half_phase(d, q);
        out.labels.push_back(s);
    }
    zeta = mod(zeta, 2LL * d);
    require(zeta % 2 == 0, ErrorCode::Internal, "commuting Weyl product with a half-step phase");
    out.phase = static_cast<int>(mod(a.phase + b.phase + zeta / 2, d));
    return out;
}

Matrix weyl_matrix(int d, const WeylElement& e) {
    Matrix m = Matrix::Identity(1, 1) * root_of_unity(d, e.phase);
    for (const auto& p : e.labels) m = kron(m, weyl_observable(d, p));
    return m;
}

WeylElement parse_weyl(int d, std::size_t qudits, const std::string& text) {
    WeylElement e;
    std::string body = text;
    const bool numeric = body.find(',') != std::string::npos;
    if (!numeric) {
        require(d == 2, ErrorCode::InvalidArgument, "Pauli letters need d = 2: " + text);
        std::size_t k = 0;
        if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
            e.phase = body[0] == '-' ? 1 : 0;
            k = 1;
        }
        for (; k < body.size(); ++k) {
            switch (body[k]) {
                case 'I': e.labels.push_back({0, 0}); break;
                case 'X': e.labels.push_back({1, 0}); break;
                case 'Z': e.labels.push_back({0, 1}); break;
                case 'Y':
                    e.labels.push_back({1, 1});
                    e.phase ^= 1;  // Y = -D(1,1)
                    break;
                default: fail(ErrorCode::InvalidArgument, "bad Pauli letter in " + text);
            }
        }
    } else {
        auto colon = body.find(':');
        if (colon != std::string::npos) {
            e.phase = static_cast<int>(mod(std::stoll(body.substr(0, colon)), d));
            body = body.substr(colon + 1);
        }
        std::stringstream ss(body);
        std::string part;
        while (std::getline(ss, part, ';')) {
            auto comma = part.find(',');
            require(comma != std::string::npos, ErrorCode::InvalidArgument, "expected p1,p2 in " + text);
            e.labels.push_back(weyl_label(d, std::stoll(part.substr(0, comma)), std::stoll(part.substr(comma + 1))));
        }
    }
    require(qudits == 0 || e.labels.size() == qudits, ErrorCode::DimensionMismatch, "wrong qudit count in " + text);
    require(!e.labels.empty(), ErrorCode::InvalidArgument, "empty Weyl label");
    return e;
}

std::string weyl_text(int d, const WeylElement& e) {
    if (d == 2) {
        std::string s;
        int phase = e.phase;
        for (const auto& p : e.labels) {
            if (p.p1 == 1 && p.p2 == 1) phase ^= 1;
            s += p.p1 ? (p.p2 ? 'Y' : 'X') : (p.p2 ? 'Z' : 'I');
        }
        return (phase ? "-" : "") + s;
    }
    std::string s = std::to_string(e.phase) + ":";
    for (std::size_t i = 0; i < e.labels.size(); ++i)
        s += (i ? ";" : "") + std::to_string(e.labels[i].p1) + "," + std::to_string(e.labels[i].p2);
    return s;
}

std::size_t ClosedWeylSet::index_of(const WeylElement& e) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), e);
    require(it != elements.end() && *it == e, ErrorCode::InvalidArgument, "element not in the closed set");
    return static_cast<std::size_t>(it - elements.begin());
}

ClosedWeylSet closed_weyl_set(const std::vector<WeylElement>& generators, int d, std::size_t cap) {
    require(d >= 2, ErrorCode::InvalidArgument, "qudit dimension must be at least 2");
    std::size_t n = generators.empty() ? 1 : generators.front().labels.size();
    for (const auto& g : generators)
        require(g.labels.size() == n, ErrorCode::DimensionMismatch, "generators act on different qudit counts");
    using Labels = std::vector<WeylLabel>;
    // Phases are closed under trivially, so the closure is computed on labels.
    auto as_element = [](const Labels& l) { return WeylElement{0, l}; };
    std::vector<Labels> found{Labels(n, WeylLabel{0, 0})};
    std::set<Labels> seen(found.begin(), found.end());
    auto add = [&](const Labels& l) {
        if (!seen.insert(l).second) return;
        found.push_back(l);
        require(found.size() * static_cast<std::size_t>(d) <= cap, ErrorCode::ClosureTooLarge,
                "closure exceeds " + std::to_string(cap) + " elements");
    };
    for (const auto& g : generators) {
        Labels l;
        for (auto p : g.labels) l.push_back(weyl_label(d, p.p1, p.p2));
        add(l);
    }
    for (std::size_t i = 0; i < found.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const auto a = as_element(found[i]), b = as_element(found[j]);
            if (weyl_commutator(d, a, b) == 0) add(weyl_product(d, a, b).labels);
        }
    std::sort(found.begin(), found.end());
    ClosedWeylSet out{d, n, {}, PartialMonoid::cyclic(1), GroupAction(1, 1, {0})};
    for (int q = 0; q < d; ++q)
        for (const auto& l : found) out.elements.push_back(WeylElement{q, l});
    const std::size_t size = out.elements.size(), nl = found.size();
    std::vector<std::size_t> table(size * size, kNone);
    for (std::size_t a = 0; a < nl; ++a)
        for (std::size_t b = 0; b < nl; ++b) {
            const auto ea = as_element(found[a]), eb = as_element(found[b]);
            if (weyl_commutator(d, ea, eb) != 0) continue;
            const auto p = weyl_product(d, ea, eb);
            const auto base = out.index_of(p);
            for (int q1 = 0; q1 < d; ++q1)
                for (int q2 = 0; q2 < d; ++q2)
                    table[(static_cast<std::size_t>(q1) * nl + a) * size + static_cast<std::size_t>(q2) * nl + b] =
                        (static_cast<std::size_t>((q1 + q2 + p.phase) % d)) * nl + base % nl;
        }
    std::vector<std::string> labels;
    for (const auto& e : out.elements) labels.push_back(weyl_text(d, e));
    std::size_t zero = out.index_of(WeylElement{0, Labels(n, WeylLabel{0, 0})});
    out.monoid = PartialMonoid(size, zero, std::move(table), std::move(labels));
    std::vector<std::size_t> act(static_cast<std::size_t>(d) * size);
    for (int g = 0; g < d; ++g)
        for (std::size_t x = 0; x < size; ++x)
            act[static_cast<std::size_t>(g) * size + x] = ((x / nl + static_cast<std::size_t>(g)) % static_cast<std::size_t>(d)) * nl + x % nl;
    out.phase_action = GroupAction(d, size, std::move(act));
    return out;
}

Bundle bundle_from_closed_set(const PartialMonoid& o, const GroupAction& omega) {
    require(omega.size() == o.size(), ErrorCode::DimensionMismatch, "action and monoid sizes differ");
    require(omega.is_free(), ErrorCode::ActionNotFree, "phase action has a fixed point");
    const std::size_t n = o.size();
    std::vector<std::size_t> orbit(n, kNone), reps;
    for (std::size_t x = 0; x < n; ++x) {
        if (orbit[x] != kNone) continue;
        for (int g = 0; g < omega.order(); ++g) orbit[omega.act(g, x)] = reps.size();
        reps.push_back(x);
    }
    const std::size_t m = reps.size();
    std::vector<std::size_t> table(m * m, kNone);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            auto& cell = table[orbit[a] * m + orbit[b]];
            const auto s = o.raw(a, b);
            const auto v = s == kNone ? kNone : orbit[s];
            // Representatives of a defined orbit sum must all agree.
            if (a == reps[orbit[a]] && b == reps[orbit[b]]) cell = v;
        }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const auto s = o.raw(a, b);
            require(table[orbit[a] * m + orbit[b]] == (s == kNone ? kNone : orbit[s]), ErrorCode::PreconditionViolated,
                    "orbit product is not well defined");
        }
    std::vector<std::string> labels;
    for (auto r : reps) labels.push_back(o.label(r));
    PartialMonoid base(m, orbit[o.zero()], std::move(table), std::move(labels));
    return Bundle(o, std::move(base), omega, orbit);
}

// ---------------------------------------------------------------------------
// Bundle models

std::vector<std::vector<long long>> action_homomorphisms(const PartialMonoid& m, const GroupAction& a,
                                                         const std::vector<std::size_t>& context) {
    require(m.is_submonoid(context) && m.is_total(context), ErrorCode::PreconditionViolated,
            "context must be a total submonoid");
    const int d = a.order();
    std::vector<char> in(m.size(), 0);
    for (auto x : context) in[x] = 1;
    for (auto x : context)
        for (int g = 0; g < d; ++g)
            require(in[a.act(g, x)], ErrorCode::PreconditionViolated, "context is not closed under the action");

    // Greedy generating set; `span` is the closure of the chosen generators.
    auto close = [&](std::vector<char>& span) {
        bool grew = true;
        while (grew) {
            grew = false;
            for (auto x : context) {
                if (!span[x]) continue;
                for (int g = 1; g < d; ++g)
                    if (!span[a.act(g, x)]) span[a.act(g, x)] = 1, grew = true;
                for (auto y : context)
                    if (span[y] && !span[m.raw(x, y)]) span[m.raw(x, y)] = 1, grew = true;
            }
        }
    };
    std::vector<char> span(m.size(), 0);
    span[m.zero()] = 1;
    close(span);
    std::vector<std::size_t> gens;
    for (auto x : context)
        if (!span[x]) {
            gens.push_back(x);
            span[x] = 1;
            close(span);
        }

    std::vector<std::vector<long long>> out;
    std::vector<long long> digits(gens.size(), 0);
    for (;;) {
        std::vector<long long> val(m.size(), -1);
        val[m.zero()] = 0;
        for (std::size_t k = 0; k < gens.size(); ++k) val[gens[k]] = digits[k];
        bool ok = true, grew = true;
        while (ok && grew) {
            grew = false;
            auto assign = [&](std::size_t x, long long v) {
                v = mod(v, d);
                if (val[x] < 0) {
                    val[x] = v;
                    grew = true;
                } else if (val[x] != v) {
                    ok = false;
                }
            };
            for (auto x : context) {
                if (val[x] < 0) continue;
                for (int g = 1; g < d && ok; ++g) assign(a.act(g, x), val[x] + g);
                for (auto y : context)
                    if (ok && val[y] >= 0) assign(m.raw(x, y), val[x] + val[y]);
            }
        }
        if (ok) {
            std::vector<long long> s;
            for (auto x : context) s.push_back(val[x]);
            out.push_back(std::move(s));
        }
        std::size_t k = 0;
        while (k < digits.size() && ++digits[k] == d) digits[k++] = 0;
        if (k == digits.size()) break;
    }
    return out;
}

std::vector<std::vector<std::size_t>> maximal_commuting_contexts(const ClosedWeylSet& o) {
    const std::size_t nl = o.elements.size() / static_cast<std::size_t>(o.d);
    std::vector<std::vector<char>> adj(nl, std::vector<char>(nl, 0));
    for (std::size_t a = 0; a < nl; ++a)
        for (std::size_t b = 0; b < nl; ++b) adj[a][b] = a != b && o.monoid.defined(a, b);
    std::vector<std::vector<std::size_t>> cliques;
    // Bron-Kerbosch with a pivot.
    std::function<void(std::vector<std::size_t>&, std::vector<std::size_t>, std::vector<std::size_t>)> bk =
        [&](std::vector<std::size_t>& r, std::vector<std::size_t> p, std::vector<std::size_t> x) {
            if (p.empty() && x.empty()) {
                cliques.push_back(r);
                return;
            }
            std::size_t pivot = p.empty() ? x.front() : p.front(), best = 0;
            for (const auto* set : {&p, &x})
                for (auto u : *set) {
                    std::size_t c = 0;
                    for (auto v : p) c += adj[u][v];
                    if (c > best) best = c, pivot = u;
                }
            auto candidates = p;
            for (auto v : candidates) {
                if (adj[pivot][v]) continue;
                std::vector<std::size_t> p2, x2;
                for (auto w : p)
                    if (adj[v][w]) p2.push_back(w);
                for (auto w : x)
                    if (adj[v][w]) x2.push_back(w);
                r.push_back(v);
                bk(r, p2, x2);
                r.pop_back();
                p.erase(std::find(p.begin(), p.end(), v));
                x.push_back(v);
            }
        };
    std::vector<std::size_t> r, all(nl);
    for (std::size_t i = 0; i < nl; ++i) all[i] = i;
    bk(r, all, {});
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : cliques) {
        std::vector<std::size_t> ctx;
        for (int q = 0; q < o.d; ++q)
            for (auto l : c) ctx.push_back(static_cast<std::size_t>(q) * nl + l);
        std::sort(ctx.begin(), ctx.end());
        out.push_back(std::move(ctx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

BundleModel model_skeleton(const ClosedWeylSet& o) {
    BundleModel m{o.d, o.monoid, o.phase_action, maximal_commuting_contexts(o), {}, {}};
    for (const auto& e : o.elements) m.labels.push_back(weyl_text(o.d, e));
    return m;
}

}  // namespace

BundleModel state_independent_model(const ClosedWeylSet& o) {
    auto m = model_skeleton(o);
    for (const auto& c : m.contexts) m.sections.push_back(action_homomorphisms(m.monoid, m.action, c));
    return m;
}

BundleModel state_dependent_model(const ClosedWeylSet& o, const Vector& psi) {
    auto m = model_skeleton(o);
    const long dim = static_cast<long>(std::llround(std::pow(o.d, static_cast<double>(o.qudits))));
    require(psi.size() == dim, ErrorCode::DimensionMismatch, "state dimension does not match the closed set");
    const std::size_t nl = o.elements.size() / static_cast<std::size_t>(o.d);
    std::vector<Matrix> ops(nl);
    for (std::size_t l = 0; l < nl; ++l) ops[l] = weyl_matrix(o.d, o.elements[l]);
    for (const auto& c : m.contexts) {
        std::vector<std::vector<long long>> kept;
        for (auto& s : action_homomorphisms(m.monoid, m.action, c)) {
            // Joint projector applied element by element (phase-0 representatives suffice).
            Vector v = psi;
            for (std::size_t k = 0; k < c.size() && v.norm() > 1e-12; ++k) {
                if (c[k] >= nl) continue;
                Vector acc = Vector::Zero(v.size()), power = v;
                for (int j = 0; j < o.d; ++j) {
                    acc += root_of_unity(o.d, -static_cast<long long>(s[k]) * j) * power;
                    power = ops[c[k]] * power;
                }
                v = acc / static_cast<double>(o.d);
            }
            if (v.squaredNorm() > 1e-9) kept.push_back(std::move(s));
        }
        m.sections.push_back(std::move(kept));
    }
    return m;
}

std::vector<std::pair<std::size_t, long long>> deterministic_elements(const ClosedWeylSet& o, const Vector& psi) {
    std::vector<std::pair<std::size_t, long long>> out;
    const double norm2 = psi.squaredNorm();
    for (std::size_t x = 0; x < o.elements.size(); ++x) {
        Vector v = weyl_matrix(o.d, o.elements[x]) * psi;
        Complex lambda = psi.dot(v) / norm2;
        if ((v - lambda * psi).norm() > 1e-9) continue;
        for (int q = 0; q < o.d; ++q)
            if (std::abs(lambda - root_of_unity(o.d, q)) < 1e-9) out.emplace_back(x, q);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cech obstruction

SupportFamily support_family(const PossibilisticModel& m) {
    SupportFamily f;
    f.measurements = m.scenario()->size();
    f.contexts = m.contexts();
    for (const auto& c : f.contexts) f.supports.push_back(m.supported_sections(c));
    return f;
}

SupportFamily support_family(const BundleModel& m) {
    SupportFamily f;
    f.measurements = m.monoid.size();
    for (std::size_t k = 0; k < m.contexts.size(); ++k) {
        Context c(m.contexts[k].begin(), m.contexts[k].end());
        std::vector<LocalSection> sup;
        for (const auto& s : m.sections[k]) sup.push_back(LocalSection{c, std::vector<Outcome>(s.begin(), s.end())});
        f.contexts.push_back(std::move(c));
        f.supports.push_back(std::move(sup));
    }
    return f;
}

namespace {

void require_connected(const SupportFamily& f) {
    const std::size_t k = f.contexts.size();
    std::vector<char> seen(k, 0);
    std::deque<std::size_t> queue{0};
    if (k) seen[0] = 1;
    while (!queue.empty()) {
        auto i = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < k; ++j)
            if (!seen[j] && !context_intersection(f.contexts[i], f.contexts[j]).empty()) {
                seen[j] = 1;
                queue.push_back(j);
            }
    }
    for (std::size_t j = 0; j < k; ++j)
        require(seen[j], ErrorCode::CoverDisconnected,
                "context " + std::to_string(j) + " is not connected to context 0 through overlaps");
}

std::vector<Outcome> values_on(const LocalSection& s, const Context& sub) {
    std::vector<Outcome> v;
    std::size_t k = 0;
    for (auto x : sub) {
        while (s.domain[k] != x) ++k;
        v.push_back(s.values[k]);
    }
    return v;
}

}  // namespace

CechResult cech_obstruction(const SupportFamily& f, std::size_t context, std::size_t section) {
    require(context < f.contexts.size(), ErrorCode::ContextNotInCover, "context index out of range");
    require(section < f.supports[context].size(), ErrorCode::PreconditionViolated, "section is not supported");
    require_connected(f);
    const std::size_t k = f.contexts.size();
    std::vector<std::size_t> offset(k + 1, 0);
    for (std::size_t i = 0; i < k; ++i) offset[i + 1] = offset[i] + f.supports[i].size();
    const std::size_t u = offset[k];
    std::vector<SparseRow> rows;
    // r_{C0} = 1 . s0.
    for (std::size_t s = 0; s < f.supports[context].size(); ++s)
        rows.push_back(SparseRow{{{offset[context] + s, 1}}, Integer(s == section ? 1 : 0)});
    // Matching restrictions on every nonempty overlap.
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const auto overlap = context_intersection(f.contexts[i], f.contexts[j]);
            if (overlap.empty()) continue;
            std::map<std::vector<Outcome>, std::vector<std::pair<std::size_t, long long>>> groups;
            for (std::size_t s = 0; s < f.supports[i].size(); ++s)
                groups[values_on(f.supports[i][s], overlap)].emplace_back(offset[i] + s, 1);
            for (std::size_t s = 0; s < f.supports[j].size(); ++s)
                groups[values_on(f.supports[j][s], overlap)].emplace_back(offset[j] + s, -1);
            for (auto& [key, terms] : groups) rows.push_back(SparseRow{std::move(terms), Integer(0)});
        }
    CechResult out;
    out.unknowns = u;
    out.equations = rows.size();
    auto sol = solve_integer(u, rows);
    out.vanishes = sol.solvable;
    out.certificate = sol.certificate;
    if (sol.solvable) {
        for (std::size_t i = 0; i < k; ++i)
            out.family.emplace_back(sol.x.begin() + static_cast<long>(offset[i]), sol.x.begin() + static_cast<long>(offset[i + 1]));
    }
    return out;
}

CechResult cech_obstruction(const PossibilisticModel& m, const Context& c0, const LocalSection& s0) {
    auto f = support_family(m);
    const auto ci = m.context_index(c0);
    const auto& sup = f.supports[ci];
    auto it = std::find(sup.begin(), sup.end(), s0);
    require(it != sup.end(), ErrorCode::PreconditionViolated, "section is not in the support of its context");
    return cech_obstruction(f, ci, static_cast<std::size_t>(it - sup.begin()));
}

AvNResult avn_check(const SupportFamily& f, int d) {
    require(d >= 2, ErrorCode::InvalidArgument, "ring order must be at least 2");
    AvNResult out;
    out.d = d;
    for (std::size_t c = 0; c < f.contexts.size(); ++c) {
        const std::size_t w = f.contexts[c].size();
        // (r, a) with sum_x r(x) s(x) - a = 0 for every supported s.
        std::vector<std::vector<long long>> rows;
        for (const auto& s : f.supports[c]) {
            std::vector<long long> row(s.values.begin(), s.values.end());
            for (auto v : row) require(v < d, ErrorCode::MixedOutcomeAlphabets, "outcome outside Z_d");
            row.push_back(-1);
            rows.push_back(std::move(row));
        }
        for (auto& g : kernel_mod(rows, w + 1, d)) {
            LinearEquation eq{c, std::vector<long long>(g.begin(), g.begin() + static_cast<long>(w)), g[w]};
            out.theory.push_back(std::move(eq));
        }
    }
    std::vector<SparseRow> sys;
    for (const auto& eq : out.theory) {
        SparseRow row;
        for (std::size_t k = 0; k < eq.coefficients.size(); ++k)
            if (eq.coefficients[k]) row.terms.emplace_back(f.contexts[eq.context][k], eq.coefficients[k]);
        row.rhs = Integer(static_cast<long>(eq.constant));
        sys.push_back(std::move(row));
    }
    auto sol = solve_mod(f.measurements, sys, d);
    out.is_avn = !sol.solvable;
    out.certificate = sol.certificate;
    return out;
}

AvNResult avn_check(const PossibilisticModel& m) {
    const auto& sc = *m.scenario();
    require(sc.size() > 0, ErrorCode::InvalidArgument, "empty scenario");
    const auto d = sc.outcome_count(0);
    for (MeasurementId x = 0; x < sc.size(); ++x)
        require(sc.outcome_count(x) == d, ErrorCode::MixedOutcomeAlphabets,
                "measurement " + sc.label(x) + " has a different outcome count");
    require(d >= 2, ErrorCode::MixedOutcomeAlphabets, "outcome sets must be Z_d with d >= 2");
    return avn_check(support_family(m), static_cast<int>(d));
}

LeftSplitting collapse_family_to_splitting(const BundleModel& m, const std::vector<std::vector<Integer>>& family) {
    require(family.size() == m.contexts.size(), ErrorCode::DimensionMismatch, "one coefficient list per context");
    const int d = m.d;
    const std::size_t n = m.monoid.size();
    std::vector<long long> g(n, -1);
    for (std::size_t c = 0; c < m.contexts.size(); ++c) {
        require(family[c].size() == m.sections[c].size(), ErrorCode::DimensionMismatch, "coefficients must align with sections");
        Integer total = 0;
        for (const auto& r : family[c]) total += r;
        require(total == 1, ErrorCode::NotAffine, "coefficients of context " + std::to_string(c) + " sum to " + total.get_str());
        for (std::size_t k = 0; k < m.contexts[c].size(); ++k) {
            // Z-module action: r . a is a added r times (negated for r < 0).
            Integer acc = 0;
            for (std::size_t s = 0; s < family[c].size(); ++s) acc += family[c][s] * Integer(static_cast<long>(m.sections[c][s][k]));
            Integer red;
            mpz_fdiv_r_ui(red.get_mpz_t(), acc.get_mpz_t(), static_cast<unsigned long>(d));
            const long long v = red.get_si();
            auto& slot = g[m.contexts[c][k]];
            require(slot < 0 || slot == v, ErrorCode::PreconditionViolated, "family is not compatible on overlaps");
            slot = v;
        }
    }
    for (std::size_t x = 0; x < n; ++x)
        require(g[x] >= 0, ErrorCode::PreconditionViolated, "element " + m.labels.at(x) + " lies in no context");
    require(g[m.monoid.zero()] == 0, ErrorCode::NotActionHomomorphism, "collapse does not fix zero");
    for (std::size_t x = 0; x < n; ++x) {
        for (int h = 0; h < d; ++h)
            require(g[m.action.act(h, x)] == mod(g[x] + h, d), ErrorCode::NotActionHomomorphism,
                    "collapse does not preserve the action at " + m.labels.at(x));
        for (std::size_t y = 0; y < n; ++y)
            if (m.monoid.defined(x, y))
                require(g[m.monoid.raw(x, y)] == mod(g[x] + g[y], d), ErrorCode::NotActionHomomorphism,
                        "collapse does not preserve " + m.labels.at(x) + " + " + m.labels.at(y));
    }
    return g;
}

Bundle bundle_of(const BundleModel& m) { return bundle_from_closed_set(m.monoid, m.action); }

ObstructionClass section_obstruction(const BundleModel& m, const Bundle& b, std::size_t context, std::size_t section) {
    require(context < m.contexts.size() && section < m.sections.at(context).size(), ErrorCode::PreconditionViolated,
            "no such supported section");
    const auto& c = m.contexts[context];
    const auto& s = m.sections[context][section];
    std::map<std::size_t, std::size_t> local;
    // R(s) on C / theta: the element of each fibre on which s vanishes.
    for (std::size_t k = 0; k < c.size(); ++k) local.emplace(b.proj(c[k]), b.action().act(-s[k], c[k]));
    std::vector<std::size_t> sub, values;
    for (const auto& [base, elem] : local) {
        sub.push_back(base);
        values.push_back(elem);
    }
    return bundle_obstruction(b, sub, values);
}

ComparisonOutcome compare_obstructions(const BundleModel& m, const SupportFamily& f, const Bundle& b,
                                       std::size_t context, std::size_t section) {
    ComparisonOutcome out;
    auto cech = cech_obstruction(f, context, section);
    auto bundle = section_obstruction(m, b, context, section);
    out.cech_vanishes = cech.vanishes;
    out.bundle_vanishes = bundle.vanishes;
    if (!cech.vanishes) return out;
    try {
        auto g = collapse_family_to_splitting(m, cech.family);
        const auto& c = m.contexts[context];
        const auto& s = m.sections[context][section];
        bool extends = true;
        for (std::size_t k = 0; k < c.size(); ++k) extends = extends && g[c[k]] == s[k];
        out.collapse_ok = extends && is_left_splitting(b, g);
        if (!extends) out.failure = "collapse does not extend the local section";
    } catch (const Error& e) {
        out.failure = e.what();
    }
    if (out.failure.empty() && !out.collapse_ok) out.failure = "collapse is not a left splitting";
    if (out.failure.empty() && !out.bundle_vanishes) out.failure = "Cech vanishes but the bundle obstruction does not";
    return out;
}

}  // namespace contextua
