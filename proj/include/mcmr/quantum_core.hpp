// quantum_core.hpp: dense states, operators and time evolution for small Hilbert spaces

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mcmr {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Thrown on dimension mismatches, invalid flags, or numerically unacceptable
/// results (e.g. trace drift beyond the integrator tolerance).
class QuantumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Pure state vector or density matrix over a labelled level space.
class QuantumState {
public:
    enum class Kind { pure, mixed };

    static QuantumState pure(CVector amplitudes, std::vector<std::string> labels = {});
    static QuantumState mixed(CMatrix rho, std::vector<std::string> labels = {});
    static QuantumState basis(std::size_t dim, std::size_t index, std::vector<std::string> labels = {});

    std::size_t dim() const { return dim_; }
    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::pure; }
    const std::vector<std::string>& labels() const { return labels_; }

    const CVector& amplitudes() const;
    /// Density matrix, formed as |ψ⟩⟨ψ| for pure states.
    CMatrix density() const;
    QuantumState to_mixed() const;

    double population(std::size_t level) const;
    cplx coherence(std::size_t row, std::size_t col) const;

private:
    QuantumState() = default;
    std::size_t dim_ = 0;
    Kind kind_ = Kind::pure;
    CVector psi_;
    CMatrix rho_;
    std::vector<std::string> labels_;
};

class Operator {
public:
    enum Flags : unsigned { none = 0, hermitian = 1u << 0, unitary = 1u << 1 };

    Operator() = default;
    explicit Operator(CMatrix m, unsigned flags = none);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    unsigned flags() const { return flags_; }

    bool is_hermitian(double tol = 1e-12) const;
    bool is_unitary(double tol = 1e-10) const;

    Operator adjoint() const;
    Operator operator*(const Operator& rhs) const;

private:
    CMatrix m_;
    unsigned flags_ = none;
};

struct CollapseChannel {
    Operator op;
    double rate = 0.0;  // 1/s
};

/// H plus weighted jump operators: dρ/dt = −i[H,ρ] + Σ γ (LρL† − ½{L†L,ρ}).
struct LindbladSystem {
    Operator hamiltonian;
    std::vector<CollapseChannel> collapse;

    std::size_t dim() const { return hamiltonian.dim(); }
    void validate() const;
    double max_rate() const;
};

struct HermitianEigen {
    Eigen::VectorXd values;
    CMatrix vectors;  // columns, ascending eigenvalues
};

HermitianEigen eigh(const CMatrix& h);

/// exp(−iHt) for Hermitian H via eigendecomposition.
CMatrix unitary_propagator(const CMatrix& h, double t);

QuantumState propagate_unitary(const QuantumState& state, const Operator& hamiltonian, double duration);
QuantumState apply_unitary(const QuantumState& state, const CMatrix& u);

/// Fixed-step RK4. The step is the smaller of dt_max and 0.05/(max rate + ‖H‖).
QuantumState propagate_lindblad(const QuantumState& state, const LindbladSystem& system, double duration,
                                double dt_max);

/// ⟨ψ|ρ|ψ⟩ when either side is pure, Uhlmann fidelity (tr√(√ρ σ √ρ))² otherwise.
double fidelity(const QuantumState& a, const QuantumState& b);

/// Axis-angle vector θ·n of a 2×2 unitary after stripping its global phase,
/// with u ∝ exp(−i θ n·σ / 2) and θ ∈ [0, π].
std::array<double, 3> rotation_vector(const Operator& u);

/// Coefficients (cx, cy, cz) in u/√det(u) = c0·I − i(cx σx + cy σy + cz σz), sign fixed so c0 ≥ 0.
std::array<double, 4> pauli_coefficients(const CMatrix& u);

/// exp(−i θ n·σ / 2) from a rotation vector θ·n.
CMatrix rotation_from_vector(const std::array<double, 3>& v);

namespace pauli {
CMatrix identity();
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

double max_abs(const CMatrix& m);

}  // namespace mcmr
