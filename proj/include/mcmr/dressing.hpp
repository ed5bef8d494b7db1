// dressing.hpp: Raman-dressed two-level basis: dressed states, shifts and the basis-rotation target

#pragma once

#include <utility>

#include "mcmr/quantum_core.hpp"

namespace mcmr::dressing {

enum class Regime { shelving, hands_off };

/// Raman dressing drive. Rabi and detuning are angular frequencies (rad/s),
/// or dimensionless when expressed relative to a nominal Rabi frequency.
struct DressingParams {
    double rabi = 1.0;
    double detuning = 0.0;
    Regime regime_hint = Regime::hands_off;
};

struct DressedBasis {
    CVector psi_plus;   // over (|0⟩, |1⟩)
    CVector psi_minus;
    double shift_plus = 0.0;
    double shift_minus = 0.0;
    double omega_g = 0.0;
};

/// H = δ|0⟩⟨0| + (Ω/2)(cos φ σx + sin φ σy) on (|0⟩, |1⟩).
CMatrix two_level_hamiltonian(double rabi, double detuning, double phase = 0.0);

/// Closed-form dressed states and shifts Δ± = (δ ± Ω_g)/2.
///
/// ψ₊ always carries the +Ω_g branch with a non-negative |0⟩ coefficient, and
/// ψ₋ = (√(1−δ/Ω_g)|0⟩ − √(1+δ/Ω_g)|1⟩)/√2, so both vary continuously in Ω.
/// Rabi may be zero (the decoupled limit) as long as δ ≠ 0.
DressedBasis dressed_basis(const DressingParams& params);

/// U = |ψ₊⟩⟨0| + |ψ₋⟩⟨1|.
Operator target_basis_rotation(const DressingParams& params);

/// (|Δ₊|, |Δ₋|). Larger δ/Ω gives a more asymmetric pair (hands-off regime);
/// small δ keeps the two resonances nearly symmetric (shelving regime).
std::pair<double, double> shift_asymmetry(const DressingParams& params);

}  // namespace mcmr::dressing
