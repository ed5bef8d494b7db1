#include "mcmr/quantum_core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mcmr {

namespace {

void check_labels(std::size_t dim, const std::vector<std::string>& labels) {
    if (!labels.empty() && labels.size() != dim) {
        throw QuantumError("label count " + std::to_string(labels.size()) + " does not match dimension " +
                           std::to_string(dim));
    }
}

void check_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw QuantumError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                           std::to_string(b) + ")");
    }
}

}  // namespace

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// QuantumState

QuantumState QuantumState::pure(CVector amplitudes, std::vector<std::string> labels) {
    const double norm = amplitudes.norm();
    if (amplitudes.size() == 0 || std::abs(norm * norm - 1.0) > 1e-12) {
        throw QuantumError("pure state is not normalized (|psi|^2 = " + std::to_string(norm * norm) + ")");
    }
    QuantumState s;
    s.dim_ = static_cast<std::size_t>(amplitudes.size());
    check_labels(s.dim_, labels);
    s.kind_ = Kind::pure;
    s.psi_ = std::move(amplitudes);
    s.labels_ = std::move(labels);
    return s;
}

QuantumState QuantumState::mixed(CMatrix rho, std::vector<std::string> labels) {
    if (rho.rows() == 0 || rho.rows() != rho.cols()) {
        throw QuantumError("density matrix must be square and non-empty");
    }
    if (max_abs(rho - rho.adjoint()) > 1e-12) {
        throw QuantumError("density matrix is not Hermitian");
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-12) {
        throw QuantumError("density matrix trace is " + std::to_string(tr));
    }
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw QuantumError("density matrix has a negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
    }
    QuantumState s;
    s.dim_ = static_cast<std::size_t>(rho.rows());
    check_labels(s.dim_, labels);
    s.kind_ = Kind::mixed;
    s.rho_ = std::move(rho);
    s.labels_ = std::move(labels);
    return s;
}

QuantumState QuantumState::basis(std::size_t dim, std::size_t index, std::vector<std::string> labels) {
    if (index >= dim) {
        throw QuantumError("basis index out of range");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return pure(std::move(v), std::move(labels));
}

const CVector& QuantumState::amplitudes() const {
    if (kind_ != Kind::pure) {
        throw QuantumError("amplitudes requested from a mixed state");
    }
    return psi_;
}

CMatrix QuantumState::density() const { return kind_ == Kind::pure ? CMatrix(psi_ * psi_.adjoint()) : rho_; }

QuantumState QuantumState::to_mixed() const {
    if (kind_ == Kind::mixed) {
        return *this;
    }
    QuantumState s;
    s.dim_ = dim_;
    s.kind_ = Kind::mixed;
    s.rho_ = density();
    s.labels_ = labels_;
    return s;
}

double QuantumState::population(std::size_t level) const {
    const auto i = static_cast<Eigen::Index>(level);
    return kind_ == Kind::pure ? std::norm(psi_(i)) : rho_(i, i).real();
}

cplx QuantumState::coherence(std::size_t row, std::size_t col) const {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    return kind_ == Kind::pure ? psi_(r) * std::conj(psi_(c)) : rho_(r, c);
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(CMatrix m, unsigned flags) : m_(std::move(m)), flags_(flags) {
    if (m_.rows() != m_.cols()) {
        throw QuantumError("operator must be square");
    }
    if ((flags_ & hermitian) && !is_hermitian()) {
        throw QuantumError("operator flagged Hermitian is not Hermitian");
    }
    if ((flags_ & unitary) && !is_unitary()) {
        throw QuantumError("operator flagged unitary is not unitary");
    }
}

bool Operator::is_hermitian(double tol) const { return max_abs(m_ - m_.adjoint()) < tol; }

bool Operator::is_unitary(double tol) const {
    return max_abs(m_.adjoint() * m_ - CMatrix::Identity(m_.rows(), m_.cols())) < tol;
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), flags_); }

Operator Operator::operator*(const Operator& rhs) const {
    check_same_dim(dim(), rhs.dim(), "operator product");
    const unsigned keep = flags_ & rhs.flags_ & unitary;
    return Operator(m_ * rhs.m_, keep);
}

// ---------------------------------------------------------------------------
// LindbladSystem

void LindbladSystem::validate() const {
    for (const auto& c : collapse) {
        check_same_dim(c.op.dim(), dim(), "collapse operator");
        if (!(c.rate >= 0.0)) {
            throw QuantumError("collapse rate must be non-negative");
        }
    }
    if (!hamiltonian.is_hermitian()) {
        throw QuantumError("Lindblad Hamiltonian is not Hermitian");
    }
}

double LindbladSystem::max_rate() const {
    double r = 0.0;
    for (const auto& c : collapse) {
        r = std::max(r, c.rate * c.op.matrix().squaredNorm());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Propagation

HermitianEigen eigh(const CMatrix& h) {
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) {
        throw QuantumError("Hermitian eigendecomposition failed");
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix unitary_propagator(const CMatrix& h, double t) {
    if (t == 0.0) {
        return CMatrix::Identity(h.rows(), h.cols());
    }
    const auto [values, vectors] = eigh(h);
    CVector phases(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        phases(k) = std::polar(1.0, -values(k) * t);
    }
    return vectors * phases.asDiagonal() * vectors.adjoint();
}

QuantumState apply_unitary(const QuantumState& state, const CMatrix& u) {
    check_same_dim(state.dim(), static_cast<std::size_t>(u.rows()), "apply_unitary");
    if (state.is_pure()) {
        CVector out = u * state.amplitudes();
        out /= out.norm();
        return QuantumState::pure(std::move(out), state.labels());
    }
    CMatrix rho = u * state.density() * u.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return QuantumState::mixed(std::move(rho), state.labels());
}

QuantumState propagate_unitary(const QuantumState& state, const Operator& hamiltonian, double duration) {
    check_same_dim(state.dim(), hamiltonian.dim(), "propagate_unitary");
    if (!hamiltonian.is_hermitian()) {
        throw QuantumError("propagate_unitary: Hamiltonian is not Hermitian");
    }
    if (duration < 0.0) {
        throw QuantumError("propagate_unitary: negative duration");
    }
    if (duration == 0.0) {
        return state;
    }
    return apply_unitary(state, unitary_propagator(hamiltonian.matrix(), duration));
}

QuantumState propagate_lindblad(const QuantumState& state, const LindbladSystem& system, double duration,
                                double dt_max) {
    check_same_dim(state.dim(), system.dim(), "propagate_lindblad");
    system.validate();
    if (!(dt_max > 0.0)) {
        throw QuantumError("propagate_lindblad: dt_max must be positive");
    }
    if (duration < 0.0) {
        throw QuantumError("propagate_lindblad: negative duration");
    }
    if (duration == 0.0) {
        return state.to_mixed();
    }

    const CMatrix& h = system.hamiltonian.matrix();
    const Eigen::Index n = h.rows();
    std::vector<CMatrix> jumps;
    CMatrix anti = CMatrix::Zero(n, n);
    for (const auto& c : system.collapse) {
        if (c.rate == 0.0) {
            continue;
        }
        jumps.push_back(std::sqrt(c.rate) * c.op.matrix());
        anti += jumps.back().adjoint() * jumps.back();
    }
    // Effective non-Hermitian generator: ρ̇ = −i(Kρ − ρK†) + Σ LρL†, K = H − (i/2)ΣL†L.
    const CMatrix k = h - cplx(0.0, 0.5) * anti;
    const CMatrix k_adj = k.adjoint();

    const double scale = system.max_rate() + h.operatorNorm();
    double dt = dt_max;
    if (scale > 0.0) {
        dt = std::min(dt, 0.05 / scale);
    }
    const auto steps = static_cast<long>(std::ceil(duration / dt - 1e-9));
    dt = duration / static_cast<double>(steps);

    const cplx minus_i(0.0, -1.0);
    auto rhs = [&](const CMatrix& rho) {
        CMatrix out = minus_i * (k * rho - rho * k_adj);
        for (const auto& l : jumps) {
            out.noalias() += l * rho * l.adjoint();
        }
        return out;
    };

    CMatrix rho = state.density();
    for (long s = 0; s < steps; ++s) {
        const CMatrix k1 = rhs(rho);
        const CMatrix k2 = rhs(rho + 0.5 * dt * k1);
        const CMatrix k3 = rhs(rho + 0.5 * dt * k2);
        const CMatrix k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double drift = std::abs(rho.trace().real() - 1.0);
    if (drift > 1e-6) {
        throw QuantumError("propagate_lindblad: trace drift " + std::to_string(drift) + " exceeds 1e-6");
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return QuantumState::mixed(std::move(rho), state.labels());
}

// ---------------------------------------------------------------------------
// Measures

namespace {

CMatrix psd_sqrt(const CMatrix& m) {
    auto [values, vectors] = eigh(m);
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        values(k) = std::sqrt(std::max(values(k), 0.0));
    }
    return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
}

}  // namespace

double fidelity(const QuantumState& a, const QuantumState& b) {
    check_same_dim(a.dim(), b.dim(), "fidelity");
    double f = 0.0;
    if (a.is_pure() && b.is_pure()) {
        f = std::norm(a.amplitudes().dot(b.amplitudes()));
    } else if (a.is_pure()) {
        f = (a.amplitudes().adjoint() * b.density() * a.amplitudes())(0).real();
    } else if (b.is_pure()) {
        f = (b.amplitudes().adjoint() * a.density() * b.amplitudes())(0).real();
    } else {
        const CMatrix s = psd_sqrt(a.density());
        const CMatrix inner = s * b.density() * s;
        const auto [values, vectors] = eigh(0.5 * (inner + inner.adjoint()));
        double tr = 0.0;
        for (Eigen::Index k = 0; k < values.size(); ++k) {
            tr += std::sqrt(std::max(values(k), 0.0));
        }
        f = tr * tr;
    }
    return std::clamp(f, 0.0, 1.0);
}

namespace pauli {
CMatrix identity() { return CMatrix::Identity(2, 2); }
CMatrix x() {
    CMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}
CMatrix y() {
    CMatrix m(2, 2);
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}
CMatrix z() {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}
}  // namespace pauli

std::array<double, 4> pauli_coefficients(const CMatrix& u) {
    if (u.rows() != 2 || u.cols() != 2) {
        throw QuantumError("pauli_coefficients: expected a 2x2 matrix");
    }
    const CMatrix v = u / std::sqrt(u.determinant());
    // v = c0 I − i(cx X + cy Y + cz Z)
    double c0 = 0.5 * (v(0, 0) + v(1, 1)).real();
    double cx = -0.5 * (v(0, 1) + v(1, 0)).imag();
    double cy = 0.5 * (v(1, 0) - v(0, 1)).real();
    double cz = -0.5 * (v(0, 0) - v(1, 1)).imag();
    if (c0 < 0.0) {
        c0 = -c0;
        cx = -cx;
        cy = -cy;
        cz = -cz;
    }
    return {c0, cx, cy, cz};
}

std::array<double, 3> rotation_vector(const Operator& u) {
    if (u.dim() != 2) {
        throw QuantumError("rotation_vector: expected a 2x2 unitary");
    }
    if (!u.is_unitary()) {
        throw QuantumError("rotation_vector: input is not unitary");
    }
    const auto [c0, cx, cy, cz] = pauli_coefficients(u.matrix());
    const double s = std::sqrt(cx * cx + cy * cy + cz * cz);
    if (s == 0.0) {
        return {0.0, 0.0, 0.0};
    }
    const double theta = 2.0 * std::atan2(s, c0);
    return {theta * cx / s, theta * cy / s, theta * cz / s};
}

CMatrix rotation_from_vector(const std::array<double, 3>& v) {
    const double theta = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (theta == 0.0) {
        return pauli::identity();
    }
    const CMatrix gen = (v[0] * pauli::x() + v[1] * pauli::y() + v[2] * pauli::z()) / theta;
    return std::cos(theta / 2) * pauli::identity() - cplx(0.0, std::sin(theta / 2)) * gen;
}

}  // namespace mcmr
