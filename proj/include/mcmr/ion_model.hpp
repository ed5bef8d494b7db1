// ion_model.hpp: ¹⁷¹Yb⁺ level scheme, drive Hamiltonians, dissipators, detection and noise

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcmr/quantum_core.hpp"

namespace mcmr::ion {

enum class Manifold { s_ground, d_metastable, d_repump_sink };
enum class TransitionKind { raman_qubit, optical_quadrupole };
enum class Shape { rectangular, blackman };
enum class Role { data, auxiliary };

struct Level {
    std::string id;
    Manifold manifold = Manifold::s_ground;
    int f = 0;
    int m = 0;
    double zeeman_shift_hz = 0.0;  // ordinary frequency, no 2π
};

/// Optical transitions sharing a `family` are driven together by one 435 nm tone
/// (the laser lock point selects the lower hyperfine level), each at its own
/// Zeeman-shifted detuning.
struct Transition {
    std::string id;
    std::string lower;
    std::string upper;
    TransitionKind kind = TransitionKind::raman_qubit;
    bool allowed = true;
    std::string family;
};

struct BranchTarget {
    std::string level;
    double weight = 0.0;
};

struct RepumpConfig {
    double rate = kTwoPi * 100e3;  // 1/s
    /// D level id → destinations. Empty entries fall back to uniform over the
    /// S(F=1) sublevels with m' ∈ {m−1, m, m+1}.
    std::map<std::string, std::vector<BranchTarget>> branching;
    bool include_sink_channel = true;
    double sink_rate = kTwoPi * 100e3;
};

/// Default control parameters. Drive rates are angular (rad/s).
struct Controls {
    double raman_rabi = kTwoPi * 100e3;
    double drive_435_rabi = kTwoPi * 10e3;
    double shelve_duration = 26e-6;          // 435 nm π plus Raman π
    double dressed_shelve_duration = 47e-6;  // same, with the auxiliary dressed
    double pump_dressed_duration = 120e-6;   // π on the dressed |0′⟩ resonance
    double pump_zeeman_duration = 20e-6;     // π on |2⟩ and |3⟩
    double repump_window = 20e-6;
    std::size_t min_slices = 64;
};

class LevelScheme {
public:
    LevelScheme() = default;
    LevelScheme(std::vector<Level> levels, std::vector<Transition> transitions);

    /// |0⟩, |1⟩, |2⟩, |3⟩ in S½, D₃/₂(F=2, m = 0, −1, +1) and the D₃/₂(F=1) sink.
    static LevelScheme ytterbium171(double zeeman_splitting_hz = 5e6);

    std::size_t size() const { return levels_.size(); }
    const std::vector<Level>& levels() const { return levels_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    std::vector<std::string> labels() const;

    std::size_t index(const std::string& level_id) const;
    const Level& level(const std::string& level_id) const;
    const Transition& transition(const std::string& transition_id) const;
    bool has_transition(const std::string& transition_id) const;
    /// Frequency offset (rad/s) of a transition: 2π(z_upper − z_lower).
    double transition_offset(const Transition& t) const;
    std::vector<std::size_t> manifold_levels(Manifold m) const;
    /// S levels with F = 1.
    std::vector<std::size_t> bright_levels() const;

    RepumpConfig repump;
    Controls controls;

private:
    std::vector<Level> levels_;
    std::vector<Transition> transitions_;
};

/// Canonical level and transition ids of the ytterbium171() scheme.
namespace ids {
inline constexpr const char* q0 = "S0";
inline constexpr const char* q1 = "S1";
inline constexpr const char* q2 = "S1m";
inline constexpr const char* q3 = "S1p";
inline constexpr const char* d0 = "D0";
inline constexpr const char* dm = "Dm";
inline constexpr const char* dp = "Dp";
inline constexpr const char* sink = "Dsink";

inline constexpr const char* raman = "raman";
inline constexpr const char* shelve_f0 = "q_s0_d0";  // |0⟩ ↔ |D⟩
inline constexpr const char* shelve_f1 = "q_s1_d0";  // |1⟩ ↔ |D⟩
inline constexpr const char* pump_m = "q_s1m_dm";    // |2⟩ ↔ D(m=−1)
inline constexpr const char* pump_p = "q_s1p_dp";    // |3⟩ ↔ D(m=+1)
}  // namespace ids

struct Target {
    bool global = true;
    std::size_t ion = 0;

    static Target all() { return {true, 0}; }
    static Target individual(std::size_t i) { return {false, i}; }
};

struct Pulse {
    std::string drive;
    double rabi = 0.0;      // Ω, rad/s (peak for shaped pulses)
    double detuning = 0.0;  // δ, rad/s, laser minus transition
    double phase = 0.0;     // φ, rad
    double duration = 0.0;  // τ, s
    Shape shape = Shape::rectangular;
    Target target;

    void validate(const LevelScheme& scheme) const;
};

/// Envelope value in [0, 1] at time t within a pulse of length `duration`.
double envelope(Shape shape, double t, double duration);
/// ∫ envelope dt / duration (0.42 for Blackman).
double envelope_area_factor(Shape shape);

struct NoiseModel {
    double t2_optical = 10e-3;
    double d_lifetime = 15e-3;
    double spam_dark_error = 0.002;
    double spam_bright_error = 0.005;
    double crosstalk_fraction = 0.01;
    double detection_time = 140e-6;
    double sd_detuning = 0.0;          // static S↔D frequency error during detection, rad/s
    double detection_leak_rate = 0.0;  // bright manifold → D₃/₂(F=1) during detection, 1/s

    void validate() const;
    /// Pure-dephasing rate of the D-manifold projector, 2/T₂ − 1/τ_D.
    double dephasing_rate() const;
};

struct DriveTerm {
    const Pulse* pulse = nullptr;
    double rabi_scale = 1.0;
    /// False when the diagonal frame terms of this drive are undone after the
    /// segment (crosstalk neighbours and optical tones see the field in the lab frame).
    bool glued = true;
};

/// Hamiltonian in the rotating frame of the drive. The coupling is
/// (Ω·scale/2)(e^{−iφ}|a⟩⟨b| + h.c.). A Raman drive shifts its lower level by +δ;
/// an optical tone lowers each coupled D sublevel by its own Zeeman-shifted
/// detuning. Drives with zero effective Rabi frequency contribute nothing.
Operator build_drive_hamiltonian(const LevelScheme& scheme, const Pulse& pulse, double rabi_scale = 1.0);

/// Several simultaneous drives. When an optical tone couples the Raman lower
/// level in the same segment, the Raman detuning moves to the upper level as −δ
/// so the optically coupled level stays in the 435 nm frame.
/// `unglued_diagonal`, when given, receives the diagonal contributed by drives with glued = false.
Operator build_segment_hamiltonian(const LevelScheme& scheme, const std::vector<DriveTerm>& drives,
                                   Eigen::VectorXd* unglued_diagonal = nullptr);

/// D₃/₂(F=2) → S½(F=1) repump jumps (plus the fixed-tone sink channel when enabled).
std::vector<CollapseChannel> build_repump_dissipator(const LevelScheme& scheme);
std::vector<CollapseChannel> build_repump_dissipator(const LevelScheme& scheme, double rate);

struct DetectionResult {
    double p_bright = 0.0;
    std::optional<QuantumState> bright_state;
    std::optional<QuantumState> dark_state;
    /// Non-selective post-measurement state p·ρ_bright + (1−p)·ρ_dark.
    QuantumState unconditional;
};

DetectionResult detect(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise);

/// D-manifold dephasing (rate 2/T₂ − 1/τ_D on the D projector), D decay into
/// S(F=1), and the optional detection leak when `detecting`.
std::vector<CollapseChannel> noise_channels(const LevelScheme& scheme, const NoiseModel& noise);
std::vector<CollapseChannel> noise_channels(const LevelScheme& scheme, const NoiseModel& noise, bool detecting);
QuantumState apply_noise_window(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise,
                                double duration);
QuantumState apply_noise_window(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise,
                                double duration, bool detecting);

struct IonState {
    Role role = Role::data;
    QuantumState state;
};

struct IonRegister {
    LevelScheme scheme;
    std::vector<IonState> ions;

    std::size_t size() const { return ions.size(); }
    void validate() const;
};

/// Qubit state a|0⟩ + b|1⟩ embedded in the scheme.
QuantumState qubit_state(const LevelScheme& scheme, cplx a, cplx b);
/// 2×2 block of ρ on (|0⟩, |1⟩).
CMatrix qubit_block(const QuantumState& state, const LevelScheme& scheme);
/// max over Z rotations of ⟨ψ_α|ρ|ψ_α⟩ for ψ = a|0⟩ + b|1⟩: equals the Ramsey
/// contrast fidelity and ignores deterministic phase shifts.
double phase_corrected_fidelity(const QuantumState& state, const LevelScheme& scheme, cplx a, cplx b);

}  // namespace mcmr::ion
