#pragma once

#include "contextua/model.hpp"
#include "contextua/scenario.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace contextua {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Weyl label (p1, p2) in Z_d^2, always stored reduced.
struct WeylLabel {
    int p1 = 0, p2 = 0;
    auto operator<=>(const WeylLabel&) const = default;
};

WeylLabel weyl_label(int d, long long p1, long long p2);
Complex root_of_unity(int d, long long k);  // omega^k, omega = exp(2 pi i / d)

// W(p)|j> = omega^{j p2} |j + p1>.
Matrix weyl_operator(int d, WeylLabel p);
// The c in Z_d with W(p)W(q) = omega^c W(q)W(p), read off explicit matrix products.
int commutation_phase(int d, WeylLabel p, WeylLabel q);
// Scalar c_p making D(p) = W(p)/c_p satisfy D(p)^d = I.
Complex weyl_normalizer(int d, WeylLabel p);
Matrix weyl_observable(int d, WeylLabel p);

class ProjectiveMeasurement {
public:
    // Validates Hermiticity, idempotence, orthogonality and completeness within 1e-10.
    ProjectiveMeasurement(std::vector<std::string> labels, std::vector<Matrix> projectors);

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<Matrix>& projectors() const { return projectors_; }
    std::size_t outcome_count() const { return labels_.size(); }
    long dimension() const { return projectors_.front().rows(); }
    ProjectiveMeasurement conjugated(const Matrix& u) const;  // u P u^dagger

private:
    std::vector<std::string> labels_;
    std::vector<Matrix> projectors_;
};

std::vector<std::string> numeric_labels(std::size_t n);
ProjectiveMeasurement computational_basis(int d);
ProjectiveMeasurement trivial_measurement(long dimension);
// Rank-one projectors onto an orthonormal basis (columns of `basis`).
ProjectiveMeasurement basis_measurement(const Matrix& basis, std::vector<std::string> labels);
// Outcome q is the omega^q eigenspace of D(p).
ProjectiveMeasurement weyl_measurement(int d, WeylLabel p);
// |phi_p> = (I (x) W(p)) |phi>; outcome index p1 * d + p2.
Vector bell_vector(int d, WeylLabel p);
ProjectiveMeasurement bell_basis(int d);

std::size_t amplitude_cap();  // CONTEXTUA_AMPLITUDE_CAP or 2^22

class QuditState {
public:
    QuditState(std::vector<std::string> labels, int d, Vector amplitudes);
    static QuditState basis(std::vector<std::string> labels, int d, const std::vector<int>& digits);
    static QuditState tensor(const QuditState& a, const QuditState& b);

    const std::vector<std::string>& labels() const { return labels_; }
    int dim() const { return d_; }
    const Vector& amplitudes() const { return amps_; }
    std::size_t qudit_count() const { return labels_.size(); }
    std::size_t position(const std::string& label) const;

    QuditState apply(const Matrix& op, const std::vector<std::string>& targets) const;

private:
    std::vector<std::string> labels_;
    int d_;
    Vector amps_;
};

// Applies `op` in place to the listed qudit positions (first listed = most significant).
void apply_local(Vector& v, const Matrix& op, const std::vector<std::size_t>& positions, int d, std::size_t n);

bool equal_up_to_phase(const Vector& u, const Vector& v, double tolerance = 1e-9);

struct Branch {
    std::size_t outcome;
    double probability;
    QuditState post;
};

// Born-rule branches with zero-probability outcomes omitted.
std::vector<Branch> measure(const QuditState& state, const ProjectiveMeasurement& m,
                            const std::vector<std::string>& targets);

struct QuantumRealization {
    ScenarioPtr scenario;
    QuditState state;
    std::vector<std::vector<std::string>> site_qudits;  // pairwise disjoint, one list per site
    std::vector<ProjectiveMeasurement> measurements;    // indexed by MeasurementId
    std::vector<std::vector<std::string>> targets;      // qudits each measurement acts on
};

void validate_realization(const QuantumRealization& r);

// Joint distribution of a context (or run of contexts) over sections in index order.
std::vector<double> context_distribution(const QuantumRealization& r, const Context& c);

EmpiricalModel realize(const QuantumRealization& r);
// Single-qudit-per-site form: site i holds state.labels()[i].
EmpiricalModel realize(ScenarioPtr scenario, const QuditState& state,
                       const std::function<ProjectiveMeasurement(std::size_t site, std::size_t setting)>& pi);
QuantumRealization make_realization(ScenarioPtr scenario, const QuditState& state,
                                    const std::function<ProjectiveMeasurement(std::size_t, std::size_t)>& pi);

// Sequential measurement along protocol trees; rounds may revisit sites.
Behaviour quantum_behaviour(std::shared_ptr<const QuantumRealization> r, int rounds);

}  // namespace contextua
