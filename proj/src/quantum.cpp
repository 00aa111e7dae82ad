#include "contextua/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <tuple>

namespace contextua {

namespace {

constexpr double kStructureTol = 1e-10;

std::size_t ipow(std::size_t base, std::size_t e) {
    std::size_t r = 1;
    while (e--) r *= base;
    return r;
}

}  // namespace

WeylLabel weyl_label(int d, long long p1, long long p2) {
    return {static_cast<int>(mod(p1, d)), static_cast<int>(mod(p2, d))};
}

Complex root_of_unity(int d, long long k) {
    double angle = 2.0 * std::numbers::pi * static_cast<double>(mod(k, d)) / d;
    return {std::cos(angle), std::sin(angle)};
}

Matrix weyl_operator(int d, WeylLabel p) {
    require(d >= 2, ErrorCode::InvalidArgument, "qudit dimension must be at least 2");
    Matrix w = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) w((j + p.p1) % d, j) = root_of_unity(d, static_cast<long long>(j) * p.p2);
    return w;
}

int commutation_phase(int d, WeylLabel p, WeylLabel q) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int, int, int>, int> memo;
    auto key = std::make_tuple(d, p.p1, p.p2, q.p1, q.p2);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }
    Matrix wp = weyl_operator(d, p), wq = weyl_operator(d, q);
    Matrix a = wp * wq, b = wq * wp;
    Eigen::Index r = 0, c = 0;
    b.cwiseAbs().maxCoeff(&r, &c);
    Complex ratio = a(r, c) / b(r, c);
    require((a - ratio * b).norm() <= 1e-9, ErrorCode::NonScalarRatio, "Weyl products are not proportional");
    int found = -1;
    for (int k = 0; k < d; ++k)
        if (std::abs(ratio - root_of_unity(d, k)) <= 1e-9) found = k;
    require(found >= 0, ErrorCode::NonScalarRatio, "Weyl commutation ratio is not a power of omega");
    std::lock_guard<std::mutex> lock(mutex);
    memo.emplace(key, found);
    return found;
}

Complex weyl_normalizer(int d, WeylLabel p) {
    // W(p)^d = (-1)^{p1 p2 (d-1)}; the half-step phase fixes the even-d sign.
    if (d % 2 == 0 && (p.p1 * p.p2) % 2 == 1) return std::polar(1.0, std::numbers::pi / d);
    return 1.0;
}

Matrix weyl_observable(int d, WeylLabel p) { return weyl_operator(d, p) / weyl_normalizer(d, p); }

ProjectiveMeasurement::ProjectiveMeasurement(std::vector<std::string> labels, std::vector<Matrix> projectors)
    : labels_(std::move(labels)), projectors_(std::move(projectors)) {
    require(!projectors_.empty() && labels_.size() == projectors_.size(), ErrorCode::InvalidArgument,
            "measurement needs one projector per outcome label");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    require(seen.size() == labels_.size(), ErrorCode::LabelCollision, "duplicate outcome label");
    const long n = projectors_.front().rows();
    Matrix total = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < projectors_.size(); ++k) {
        const auto& p = projectors_[k];
        require(p.rows() == n && p.cols() == n, ErrorCode::DimensionMismatch, "projector dimensions disagree");
        require((p - p.adjoint()).norm() <= kStructureTol, ErrorCode::InvalidArgument, "projector is not Hermitian");
        require((p * p - p).norm() <= kStructureTol, ErrorCode::InvalidArgument, "projector is not idempotent");
        for (std::size_t j = 0; j < k; ++j)
            require((p * projectors_[j]).norm() <= kStructureTol, ErrorCode::InvalidArgument,
                    "projectors are not orthogonal");
        total += p;
    }
    require((total - Matrix::Identity(n, n)).norm() <= kStructureTol, ErrorCode::InvalidArgument,
            "projectors do not sum to the identity");
}

ProjectiveMeasurement ProjectiveMeasurement::conjugated(const Matrix& u) const {
    std::vector<Matrix> ps;
    for (const auto& p : projectors_) ps.push_back(u * p * u.adjoint());
    return ProjectiveMeasurement(labels_, std::move(ps));
}

std::vector<std::string> numeric_labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(std::to_string(k));
    return out;
}

ProjectiveMeasurement computational_basis(int d) {
    return basis_measurement(Matrix::Identity(d, d), numeric_labels(static_cast<std::size_t>(d)));
}

ProjectiveMeasurement trivial_measurement(long dimension) {
    return ProjectiveMeasurement({"0"}, {Matrix::Identity(dimension, dimension)});
}

ProjectiveMeasurement basis_measurement(const Matrix& basis, std::vector<std::string> labels) {
    std::vector<Matrix> ps;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) ps.push_back(basis.col(k) * basis.col(k).adjoint());
    return ProjectiveMeasurement(std::move(labels), std::move(ps));
}

ProjectiveMeasurement weyl_measurement(int d, WeylLabel p) {
    Matrix dp = weyl_observable(d, p);
    std::vector<Matrix> powers{Matrix::Identity(d, d)};
    for (int k = 1; k < d; ++k) powers.push_back(powers.back() * dp);
    std::vector<Matrix> ps;
    for (int q = 0; q < d; ++q) {
        Matrix pq = Matrix::Zero(d, d);
        for (int k = 0; k < d; ++k) pq += root_of_unity(d, -static_cast<long long>(q) * k) * powers[k];
        ps.push_back(pq / static_cast<double>(d));
    }
    return ProjectiveMeasurement(numeric_labels(static_cast<std::size_t>(d)), std::move(ps));
}

Vector bell_vector(int d, WeylLabel p) {
    Vector phi = Vector::Zero(d * d);
    for (int j = 0; j < d; ++j) phi(j * d + j) = 1.0 / std::sqrt(static_cast<double>(d));
    Vector out = phi;
    apply_local(out, weyl_operator(d, p), {1}, d, 2);
    return out;
}

ProjectiveMeasurement bell_basis(int d) {
    std::vector<Matrix> ps;
    for (int p1 = 0; p1 < d; ++p1)
        for (int p2 = 0; p2 < d; ++p2) {
            Vector v = bell_vector(d, {p1, p2});
            ps.push_back(v * v.adjoint());
        }
    return ProjectiveMeasurement(numeric_labels(static_cast<std::size_t>(d * d)), std::move(ps));
}

std::size_t amplitude_cap() {
    if (const char* env = std::getenv("CONTEXTUA_AMPLITUDE_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        require(end != env && *end == '\0' && v > 0, ErrorCode::ConfigInvalid,
                "CONTEXTUA_AMPLITUDE_CAP must be a positive integer");
        return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 22;
}

QuditState::QuditState(std::vector<std::string> labels, int d, Vector amplitudes)
    : labels_(std::move(labels)), d_(d), amps_(std::move(amplitudes)) {
    require(d_ >= 2, ErrorCode::InvalidArgument, "qudit dimension must be at least 2");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    require(seen.size() == labels_.size(), ErrorCode::LabelCollision, "duplicate qudit label");
    std::size_t cap = amplitude_cap();
    std::size_t size = 1;
    for (std::size_t k = 0; k < labels_.size(); ++k) {
        require(size <= cap / static_cast<std::size_t>(d_), ErrorCode::AmplitudeCapExceeded,
                "statevector exceeds the amplitude cap of " + std::to_string(cap));
        size *= static_cast<std::size_t>(d_);
    }
    require(static_cast<std::size_t>(amps_.size()) == size, ErrorCode::DimensionMismatch,
            "amplitude vector has the wrong length");
    require(std::fabs(amps_.norm() - 1.0) <= 1e-12 * std::max<double>(1.0, std::sqrt(static_cast<double>(size))) + 1e-12,
            ErrorCode::InvalidArgument, "state is not normalized");
}

QuditState QuditState::basis(std::vector<std::string> labels, int d, const std::vector<int>& digits) {
    require(digits.size() == labels.size(), ErrorCode::DimensionMismatch, "one digit per qudit");
    std::size_t index = 0;
    for (int x : digits) index = index * static_cast<std::size_t>(d) + static_cast<std::size_t>(mod(x, d));
    Vector v = Vector::Zero(static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), labels.size())));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return QuditState(std::move(labels), d, std::move(v));
}

QuditState QuditState::tensor(const QuditState& a, const QuditState& b) {
    require(a.d_ == b.d_, ErrorCode::DimensionMismatch, "tensor of states with different qudit dimensions");
    auto labels = a.labels_;
    labels.insert(labels.end(), b.labels_.begin(), b.labels_.end());
    Vector v(a.amps_.size() * b.amps_.size());
    for (Eigen::Index i = 0; i < a.amps_.size(); ++i) v.segment(i * b.amps_.size(), b.amps_.size()) = a.amps_(i) * b.amps_;
    return QuditState(std::move(labels), a.d_, std::move(v));
}

std::size_t QuditState::position(const std::string& label) const {
    for (std::size_t k = 0; k < labels_.size(); ++k)
        if (labels_[k] == label) return k;
    fail(ErrorCode::InvalidArgument, "unknown qudit '" + label + "'");
}

QuditState QuditState::apply(const Matrix& op, const std::vector<std::string>& targets) const {
    std::vector<std::size_t> pos;
    for (const auto& t : targets) pos.push_back(position(t));
    Vector v = amps_;
    apply_local(v, op, pos, d_, labels_.size());
    return QuditState(labels_, d_, std::move(v));
}

void apply_local(Vector& v, const Matrix& op, const std::vector<std::size_t>& positions, int d, std::size_t n) {
    const std::size_t ud = static_cast<std::size_t>(d);
    const std::size_t k = positions.size();
    const std::size_t sub = ipow(ud, k);
    require(static_cast<std::size_t>(op.rows()) == sub && static_cast<std::size_t>(op.cols()) == sub,
            ErrorCode::DimensionMismatch, "operator dimension does not match its targets");
    std::vector<std::size_t> stride(k);
    std::vector<bool> is_target(n, false);
    for (std::size_t j = 0; j < k; ++j) {
        require(positions[j] < n && !is_target[positions[j]], ErrorCode::InvalidArgument, "bad target list");
        is_target[positions[j]] = true;
        stride[j] = ipow(ud, n - 1 - positions[j]);
    }
    std::vector<std::size_t> offset(sub, 0);
    for (std::size_t m = 0; m < sub; ++m) {
        std::size_t rest = m;
        for (std::size_t j = k; j-- > 0;) {
            offset[m] += (rest % ud) * stride[j];
            rest /= ud;
        }
    }
    // Iterate over the non-target digits only.
    std::vector<std::size_t> others;
    for (std::size_t q = 0; q < n; ++q)
        if (!is_target[q]) others.push_back(ipow(ud, n - 1 - q));
    const std::size_t outer = ipow(ud, others.size());
    Vector in(static_cast<Eigen::Index>(sub)), out(static_cast<Eigen::Index>(sub));
    std::vector<std::size_t> digits(others.size(), 0);
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t base = 0;
        for (std::size_t j = 0; j < others.size(); ++j) base += digits[j] * others[j];
        for (std::size_t m = 0; m < sub; ++m) in(static_cast<Eigen::Index>(m)) = v(static_cast<Eigen::Index>(base + offset[m]));
        out.noalias() = op * in;
        for (std::size_t m = 0; m < sub; ++m) v(static_cast<Eigen::Index>(base + offset[m])) = out(static_cast<Eigen::Index>(m));
        for (std::size_t j = others.size(); j-- > 0;) {
            if (++digits[j] < ud) break;
            digits[j] = 0;
        }
    }
}

bool equal_up_to_phase(const Vector& u, const Vector& v, double tolerance) {
    if (u.size() != v.size()) return false;
    double nu = u.norm(), nv = v.norm();
    if (nu == 0 || nv == 0) return nu == nv;
    return std::fabs(std::abs(u.dot(v)) / (nu * nv) - 1.0) <= tolerance;
}

std::vector<Branch> measure(const QuditState& state, const ProjectiveMeasurement& m,
                            const std::vector<std::string>& targets) {
    std::vector<std::size_t> pos;
    for (const auto& t : targets) pos.push_back(state.position(t));
    require(static_cast<std::size_t>(m.dimension()) == ipow(static_cast<std::size_t>(state.dim()), pos.size()),
            ErrorCode::DimensionMismatch, "measurement dimension does not match its targets");
    std::vector<Branch> out;
    double total = 0;
    for (std::size_t k = 0; k < m.outcome_count(); ++k) {
        Vector v = state.amplitudes();
        apply_local(v, m.projectors()[k], pos, state.dim(), state.qudit_count());
        double p = v.squaredNorm();
        total += p;
        if (p <= 1e-14) continue;
        v /= std::sqrt(p);
        out.push_back({k, p, QuditState(state.labels(), state.dim(), std::move(v))});
    }
    require(std::fabs(total - 1.0) <= kStructureTol, ErrorCode::Internal, "Born probabilities do not sum to 1");
    return out;
}

void validate_realization(const QuantumRealization& r) {
    const auto& sc = *r.scenario;
    require(r.measurements.size() == sc.size() && r.targets.size() == sc.size(), ErrorCode::InvalidArgument,
            "realization needs one measurement per scenario measurement");
    const std::size_t d = static_cast<std::size_t>(r.state.dim());
    for (MeasurementId x = 0; x < sc.size(); ++x) {
        const auto& m = r.measurements[x];
        require(m.labels() == sc.outcome_labels(x), ErrorCode::OutcomeLabelMismatch,
                "outcome labels of '" + sc.label(x) + "' differ from the scenario");
        for (const auto& t : r.targets[x]) r.state.position(t);
        require(static_cast<std::size_t>(m.dimension()) == ipow(d, r.targets[x].size()), ErrorCode::DimensionMismatch,
                "measurement '" + sc.label(x) + "' has the wrong dimension for its targets");
    }
    if (sc.is_multipartite() && !r.site_qudits.empty()) {
        require(r.site_qudits.size() == sc.site_count(), ErrorCode::InvalidArgument, "one qudit list per site");
        std::set<std::string> owned;
        for (const auto& qs : r.site_qudits)
            for (const auto& q : qs) require(owned.insert(q).second, ErrorCode::LabelCollision, "qudit '" + q + "' held by two sites");
        for (MeasurementId x = 0; x < sc.size(); ++x) {
            const auto& mine = r.site_qudits[sc.site_of(x)];
            for (const auto& t : r.targets[x])
                require(std::find(mine.begin(), mine.end(), t) != mine.end(), ErrorCode::InvalidArgument,
                        "measurement '" + sc.label(x) + "' acts on a qudit its site does not hold");
        }
    }
}

namespace {

struct Projectors {
    const QuantumRealization& r;
    std::vector<std::vector<std::size_t>> pos;
    explicit Projectors(const QuantumRealization& real) : r(real) {
        for (const auto& ts : r.targets) {
            std::vector<std::size_t> p;
            for (const auto& t : ts) p.push_back(r.state.position(t));
            pos.push_back(std::move(p));
        }
    }
    void apply(Vector& v, MeasurementId x, std::size_t outcome) const {
        apply_local(v, r.measurements[x].projectors()[outcome], pos[x], r.state.dim(), r.state.qudit_count());
    }
};

// Unnormalized branch vectors for every section of c, appended in section order.
void branch_context(const Projectors& pr, const Context& c, std::size_t k, const Vector& v,
                    const std::function<void(const Vector&)>& leaf) {
    if (k == c.size()) {
        leaf(v);
        return;
    }
    const auto& sc = *pr.r.scenario;
    for (std::size_t o = 0; o < sc.outcome_count(c[k]); ++o) {
        Vector w = v;
        pr.apply(w, c[k], o);
        if (w.squaredNorm() <= 1e-28) {
            // Keep the section count aligned: every descendant has probability zero.
            std::size_t skip = 1;
            for (std::size_t j = k + 1; j < c.size(); ++j) skip *= sc.outcome_count(c[j]);
            Vector zero = Vector::Zero(v.size());
            for (std::size_t s = 0; s < skip; ++s) leaf(zero);
            continue;
        }
        branch_context(pr, c, k + 1, w, leaf);
    }
}

}  // namespace

std::vector<double> context_distribution(const QuantumRealization& r, const Context& c) {
    Projectors pr(r);
    std::vector<double> out;
    branch_context(pr, c, 0, r.state.amplitudes(), [&](const Vector& v) { out.push_back(v.squaredNorm()); });
    return out;
}

EmpiricalModel realize(const QuantumRealization& r) {
    validate_realization(r);
    std::vector<std::vector<Prob>> tables;
    for (const auto& c : r.scenario->maximal_contexts()) {
        std::vector<Prob> t;
        for (double p : context_distribution(r, c)) t.push_back(Prob(p));
        tables.push_back(std::move(t));
    }
    return EmpiricalModel(r.scenario, std::move(tables));
}

QuantumRealization make_realization(ScenarioPtr scenario, const QuditState& state,
                                    const std::function<ProjectiveMeasurement(std::size_t, std::size_t)>& pi) {
    const auto& sc = *scenario;
    require(sc.site_count() == state.qudit_count(), ErrorCode::DimensionMismatch, "one qudit per site expected");
    QuantumRealization r{scenario, state, {}, {}, {}};
    for (std::size_t i = 0; i < sc.site_count(); ++i) r.site_qudits.push_back({state.labels()[i]});
    for (MeasurementId x = 0; x < sc.size(); ++x) {
        r.measurements.push_back(pi(sc.site_of(x), sc.setting_of(x)));
        r.targets.push_back({state.labels()[sc.site_of(x)]});
    }
    validate_realization(r);
    return r;
}

EmpiricalModel realize(ScenarioPtr scenario, const QuditState& state,
                       const std::function<ProjectiveMeasurement(std::size_t, std::size_t)>& pi) {
    return realize(make_realization(std::move(scenario), state, pi));
}

Behaviour quantum_behaviour(std::shared_ptr<const QuantumRealization> r, int rounds) {
    validate_realization(*r);
    return Behaviour(r->scenario, rounds, [r](const MeasurementProtocol& p) {
        Projectors pr(*r);
        std::vector<Prob> out;
        std::function<void(const ProtocolNode&, const Vector&)> walk = [&](const ProtocolNode& node, const Vector& v) {
            std::size_t s = 0;
            branch_context(pr, node.context, 0, v, [&](const Vector& w) {
                if (node.next.empty()) out.push_back(Prob(w.squaredNorm()));
                else walk(node.next[s], w);
                ++s;
            });
        };
        walk(p.root(), r->state.amplitudes());
        return out;
    });
}

}  // namespace contextua
