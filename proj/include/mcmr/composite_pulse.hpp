// composite_pulse.hpp: three-pulse Raman sequences that map the bare qubit basis onto the
// dressed basis robustly against Rabi-frequency fluctuation and neighbour crosstalk.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmr/quantum_core.hpp"

namespace mcmr::composite {

/// One Raman pulse, dimensionless relative to the nominal Rabi frequency Ω.
struct PulseStep {
    double detuning_ratio = 0.0;    // δᵢ/Ω
    double duration_product = 0.0;  // τᵢΩ
    double phase = 0.0;             // φᵢ, rad
};

struct CompositePulse {
    std::array<PulseStep, 3> pulses{};
    double nominal_detuning_ratio = 0.0;  // δ/Ω of the dressing the sequence targets

    void validate(bool allow_zero_duration = false) const;
    double total_duration_product() const;
};

enum class Aggregation { max, mean };

struct Band {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t samples = 21;

    std::vector<double> grid() const;
};

struct RobustnessSpec {
    Band crosstalk{0.0, 0.05, 21};
    Band fluctuation{0.90, 1.05, 21};
    Aggregation aggregation = Aggregation::max;

    void validate() const;
};

struct Sample {
    double rabi_fraction = 0.0;
    bool crosstalk_band = false;
    double xy_error = 0.0;
};

struct ErrorReport {
    double e0 = 0.0;  // crosstalk band
    double e1 = 0.0;  // fluctuation band
    std::vector<Sample> per_sample;

    double combined(double w0 = 1.0, double w1 = 1.0) const { return w0 * e0 + w1 * e1; }
};

/// U = U₃U₂U₁ with Uᵢ = exp(−iHᵢτᵢ). Detunings and durations are scaled by
/// `nominal_rabi`; the coupling uses the actual `rabi`.
Operator sequence_unitary(const CompositePulse& seq, double rabi, double nominal_rabi = 1.0);

/// Same product evaluated with the closed-form SU(2) exponential.
Eigen::Matrix2cd sequence_unitary_fast(const CompositePulse& seq, double rabi_fraction);

/// Dressed-basis target for a pulse seen at `rabi_fraction` of the nominal drive:
/// the dressed basis of (fΩ, δ). At f = 0 with δ = 0 it is the identity.
Operator target_at_fraction(double nominal_detuning_ratio, double rabi_fraction);

/// Sum of squared X and Y Pauli coefficients of D = target†·achieved after
/// removing the global phase. Z (phase) errors are excluded because they are
/// refocused by echo pulses.
double xy_error(const Operator& achieved, const Operator& target);

/// √(ax² + ay²) of the rotation vector of D = target†·achieved (radians).
double xy_rotation_error(const Operator& achieved, const Operator& target);

ErrorReport evaluate(const CompositePulse& seq, const RobustnessSpec& spec);
/// Same bands against an arbitrary target per Rabi fraction (e.g. the identity).
ErrorReport evaluate(const CompositePulse& seq, const RobustnessSpec& spec,
                     const std::function<Operator(double)>& target);

/// Reversed order, δᵢ → −δᵢ, φᵢ → φᵢ + π (mod 2π). The result implements the
/// adjoint of the forward sequence at every Rabi frequency.
CompositePulse time_reversal(const CompositePulse& seq);

struct OptimizeOptions {
    std::size_t restarts = 200;
    std::size_t evaluations_per_restart = 6000;
    std::size_t polish_rounds = 2;
    double weight_crosstalk = 1.0;
    double weight_fluctuation = 1.0;
    double threshold = 1e-5;
    bool stop_at_threshold = false;
    unsigned threads = 1;
};

struct OptimizeResult {
    CompositePulse sequence;
    ErrorReport report;
    double combined = 0.0;
    std::size_t best_restart = 0;
    std::size_t restarts_run = 0;
    bool reached_threshold = false;
};

/// Multi-start Nelder–Mead over the nine pulse parameters. Deterministic for a
/// given seed regardless of thread count.
OptimizeResult optimize(double nominal_detuning_ratio, const RobustnessSpec& spec, std::uint64_t seed,
                        const OptimizeOptions& options = {});

/// Published reference sequences at their hardware-resolution precision:
/// index 1 targets δ/Ω = 0.1 (shelving dressing), index 2 targets δ/Ω = 0.5 (hands-off).
CompositePulse reference_sequence(int index);

}  // namespace mcmr::composite
