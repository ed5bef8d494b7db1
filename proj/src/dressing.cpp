#include "mcmr/dressing.hpp"

#include <cmath>

namespace mcmr::dressing {

namespace {

void check_params(const DressingParams& p) {
    if (p.rabi < 0.0) {
        throw QuantumError("dressing: Rabi frequency must be non-negative");
    }
    if (p.rabi == 0.0 && p.detuning == 0.0) {
        throw QuantumError("dressing: degenerate parameters (rabi = 0 and detuning = 0)");
    }
}

}  // namespace

CMatrix two_level_hamiltonian(double rabi, double detuning, double phase) {
    CMatrix h(2, 2);
    h(0, 0) = detuning;
    h(1, 1) = 0.0;
    h(0, 1) = 0.5 * rabi * std::polar(1.0, -phase);
    h(1, 0) = std::conj(h(0, 1));
    return h;
}

DressedBasis dressed_basis(const DressingParams& params) {
    check_params(params);
    const double omega_g = std::hypot(params.rabi, params.detuning);
    const double r = params.detuning / omega_g;
    // Clamp guards 1 − r slightly below zero from rounding in the decoupled limit.
    const double a = std::sqrt(std::max(0.0, 1.0 + r) / 2.0);
    const double b = std::sqrt(std::max(0.0, 1.0 - r) / 2.0);

    DressedBasis out;
    out.omega_g = omega_g;
    out.shift_plus = 0.5 * (params.detuning + omega_g);
    out.shift_minus = 0.5 * (params.detuning - omega_g);
    out.psi_plus = CVector(2);
    out.psi_plus << a, b;
    out.psi_minus = CVector(2);
    out.psi_minus << b, -a;
    return out;
}

Operator target_basis_rotation(const DressingParams& params) {
    const DressedBasis basis = dressed_basis(params);
    CMatrix u(2, 2);
    u.col(0) = basis.psi_plus;
    u.col(1) = basis.psi_minus;
    return Operator(std::move(u), Operator::unitary);
}

std::pair<double, double> shift_asymmetry(const DressingParams& params) {
    const DressedBasis basis = dressed_basis(params);
    return {std::abs(basis.shift_plus), std::abs(basis.shift_minus)};
}

}  // namespace mcmr::dressing
