#include "mcmr/ion_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mcmr::ion {

namespace {

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

CMatrix projector(std::size_t dim, const std::vector<std::size_t>& idx) {
    CMatrix p = CMatrix::Zero(dim, dim);
    for (auto i : idx) {
        p(i, i) = 1.0;
    }
    return p;
}

CMatrix ket_bra(std::size_t dim, std::size_t row, std::size_t col) {
    CMatrix m = CMatrix::Zero(dim, dim);
    m(row, col) = 1.0;
    return m;
}

}  // namespace

LevelScheme::LevelScheme(std::vector<Level> levels, std::vector<Transition> transitions)
    : levels_(std::move(levels)), transitions_(std::move(transitions)) {
    if (levels_.empty()) {
        throw std::invalid_argument("LevelScheme: no levels");
    }
    std::set<std::string> seen;
    for (const auto& l : levels_) {
        if (l.id.empty() || !seen.insert(l.id).second) {
            throw std::invalid_argument("LevelScheme: duplicate or empty level id '" + l.id + "'");
        }
        if (!std::isfinite(l.zeeman_shift_hz)) {
            throw std::invalid_argument("LevelScheme: non-finite Zeeman shift for " + l.id);
        }
    }
    std::set<std::string> tseen;
    for (const auto& t : transitions_) {
        if (t.id.empty() || !tseen.insert(t.id).second) {
            throw std::invalid_argument("LevelScheme: duplicate or empty transition id '" + t.id + "'");
        }
        const auto& lo = level(t.lower);
        const auto& up = level(t.upper);
        if (t.kind == TransitionKind::raman_qubit) {
            if (lo.manifold != Manifold::s_ground || up.manifold != Manifold::s_ground) {
                throw std::invalid_argument("LevelScheme: Raman transition " + t.id + " must connect S levels");
            }
        } else {
            if (lo.manifold != Manifold::s_ground || up.manifold == Manifold::s_ground) {
                throw std::invalid_argument("LevelScheme: optical transition " + t.id + " must go from S to D");
            }
            if (t.family.empty()) {
                throw std::invalid_argument("LevelScheme: optical transition " + t.id + " has no family");
            }
        }
    }
}

LevelScheme LevelScheme::ytterbium171(double zeeman_splitting_hz) {
    std::vector<Level> levels = {
        {ids::q0, Manifold::s_ground, 0, 0, 0.0},
        {ids::q1, Manifold::s_ground, 1, 0, 0.0},
        {ids::q2, Manifold::s_ground, 1, -1, 0.0},
        {ids::q3, Manifold::s_ground, 1, 1, 0.0},
        {ids::d0, Manifold::d_metastable, 2, 0, 0.0},
        {ids::dm, Manifold::d_metastable, 2, -1, -zeeman_splitting_hz},
        {ids::dp, Manifold::d_metastable, 2, 1, zeeman_splitting_hz},
        {ids::sink, Manifold::d_repump_sink, 1, 0, 0.0},
    };
    std::vector<Transition> transitions = {
        {ids::raman, ids::q0, ids::q1, TransitionKind::raman_qubit, true, ""},
        {ids::shelve_f0, ids::q0, ids::d0, TransitionKind::optical_quadrupole, true, "F0"},
        {ids::shelve_f1, ids::q1, ids::d0, TransitionKind::optical_quadrupole, true, "F1"},
        {ids::pump_m, ids::q2, ids::dm, TransitionKind::optical_quadrupole, true, "F1"},
        {ids::pump_p, ids::q3, ids::dp, TransitionKind::optical_quadrupole, true, "F1"},
    };
    return LevelScheme(std::move(levels), std::move(transitions));
}

std::vector<std::string> LevelScheme::labels() const {
    std::vector<std::string> out;
    out.reserve(levels_.size());
    for (const auto& l : levels_) {
        out.push_back(l.id);
    }
    return out;
}

std::size_t LevelScheme::index(const std::string& level_id) const {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].id == level_id) {
            return i;
        }
    }
    throw std::invalid_argument("LevelScheme: unknown level '" + level_id + "'");
}

const Level& LevelScheme::level(const std::string& level_id) const { return levels_[index(level_id)]; }

bool LevelScheme::has_transition(const std::string& transition_id) const {
    return std::any_of(transitions_.begin(), transitions_.end(),
                       [&](const Transition& t) { return t.id == transition_id; });
}

const Transition& LevelScheme::transition(const std::string& transition_id) const {
    for (const auto& t : transitions_) {
        if (t.id == transition_id) {
            return t;
        }
    }
    throw std::invalid_argument("LevelScheme: unknown transition '" + transition_id + "'");
}

double LevelScheme::transition_offset(const Transition& t) const {
    return kTwoPi * (level(t.upper).zeeman_shift_hz - level(t.lower).zeeman_shift_hz);
}

std::vector<std::size_t> LevelScheme::manifold_levels(Manifold m) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].manifold == m) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> LevelScheme::bright_levels() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].manifold == Manifold::s_ground && levels_[i].f == 1) {
            out.push_back(i);
        }
    }
    return out;
}

void Pulse::validate(const LevelScheme& scheme) const {
    const auto& t = scheme.transition(drive);
    if (!t.allowed) {
        throw std::invalid_argument("Pulse: transition " + drive + " is not allowed");
    }
    if (!finite_all({rabi, detuning, phase, duration})) {
        throw std::invalid_argument("Pulse: non-finite parameter on " + drive);
    }
    if (rabi < 0.0 || duration < 0.0) {
        throw std::invalid_argument("Pulse: negative rabi or duration on " + drive);
    }
}

double envelope(Shape shape, double t, double duration) {
    if (shape == Shape::rectangular) {
        return 1.0;
    }
    const double x = t / duration;
    return 0.42 - 0.5 * std::cos(kTwoPi * x) + 0.08 * std::cos(2.0 * kTwoPi * x);
}

double envelope_area_factor(Shape shape) { return shape == Shape::rectangular ? 1.0 : 0.42; }

void NoiseModel::validate() const {
    if (!finite_all({t2_optical, d_lifetime, spam_dark_error, spam_bright_error, crosstalk_fraction, detection_time,
                     sd_detuning, detection_leak_rate})) {
        throw std::invalid_argument("NoiseModel: non-finite field");
    }
    if (t2_optical <= 0.0 || d_lifetime <= 0.0) {
        throw std::invalid_argument("NoiseModel: t2_optical and d_lifetime must be positive");
    }
    if (t2_optical > 2.0 * d_lifetime) {
        throw std::invalid_argument("NoiseModel: t2_optical exceeds twice the D lifetime (negative dephasing rate)");
    }
    for (double p : {spam_dark_error, spam_bright_error, crosstalk_fraction}) {
        if (p < 0.0 || p > 1.0) {
            throw std::invalid_argument("NoiseModel: probabilities and crosstalk must lie in [0, 1]");
        }
    }
    if (spam_dark_error + spam_bright_error >= 1.0) {
        throw std::invalid_argument("NoiseModel: spam_dark_error + spam_bright_error must be below 1");
    }
    if (detection_time < 0.0 || detection_leak_rate < 0.0) {
        throw std::invalid_argument("NoiseModel: negative detection time or leak rate");
    }
}

double NoiseModel::dephasing_rate() const { return 2.0 / t2_optical - 1.0 / d_lifetime; }

Operator build_drive_hamiltonian(const LevelScheme& scheme, const Pulse& pulse, double rabi_scale) {
    return build_segment_hamiltonian(scheme, {DriveTerm{&pulse, rabi_scale}});
}

Operator build_segment_hamiltonian(const LevelScheme& scheme, const std::vector<DriveTerm>& drives,
                                   Eigen::VectorXd* unglued_diagonal) {
    const std::size_t n = scheme.size();
    CMatrix h = CMatrix::Zero(n, n);
    Eigen::VectorXd loose = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

    std::set<std::size_t> optically_coupled;
    for (const auto& d : drives) {
        if (d.pulse == nullptr) {
            throw std::invalid_argument("build_segment_hamiltonian: null pulse");
        }
        d.pulse->validate(scheme);
        const auto& t = scheme.transition(d.pulse->drive);
        if (t.kind != TransitionKind::optical_quadrupole || d.pulse->rabi * d.rabi_scale == 0.0) {
            continue;
        }
        for (const auto& other : scheme.transitions()) {
            if (other.kind == TransitionKind::optical_quadrupole && other.allowed && other.family == t.family) {
                optically_coupled.insert(scheme.index(other.lower));
            }
        }
    }

    for (const auto& d : drives) {
        const Pulse& p = *d.pulse;
        if (!std::isfinite(d.rabi_scale) || d.rabi_scale < 0.0) {
            throw std::invalid_argument("build_segment_hamiltonian: rabi_scale must be finite and non-negative");
        }
        const double rabi = p.rabi * d.rabi_scale;
        if (rabi == 0.0) {
            continue;
        }
        const cplx coupling = 0.5 * rabi * std::exp(cplx(0.0, -p.phase));
        const auto& t = scheme.transition(p.drive);
        if (t.kind == TransitionKind::raman_qubit) {
            const auto a = scheme.index(t.lower);
            const auto b = scheme.index(t.upper);
            h(a, b) += coupling;
            h(b, a) += std::conj(coupling);
            const bool swap = optically_coupled.count(a) != 0U && optically_coupled.count(b) == 0U;
            const auto k = swap ? b : a;
            const double shift = swap ? -p.detuning : p.detuning;
            h(k, k) += shift;
            if (!d.glued) {
                loose(static_cast<Eigen::Index>(k)) += shift;
            }
            continue;
        }
        const double laser = scheme.transition_offset(t) + p.detuning;
        for (const auto& other : scheme.transitions()) {
            if (other.kind != TransitionKind::optical_quadrupole || !other.allowed || other.family != t.family) {
                continue;
            }
            const auto a = scheme.index(other.lower);
            const auto b = scheme.index(other.upper);
            h(a, b) += coupling;
            h(b, a) += std::conj(coupling);
            const double shift = -(laser - scheme.transition_offset(other));
            h(b, b) += shift;
            if (!d.glued) {
                loose(static_cast<Eigen::Index>(b)) += shift;
            }
        }
    }
    if (unglued_diagonal != nullptr) {
        *unglued_diagonal = loose;
    }
    return Operator(std::move(h), Operator::hermitian);
}

namespace {

std::vector<BranchTarget> branches_for(const LevelScheme& scheme, const Level& d) {
    const auto it = scheme.repump.branching.find(d.id);
    if (it != scheme.repump.branching.end() && !it->second.empty()) {
        return it->second;
    }
    std::vector<BranchTarget> out;
    for (const auto& l : scheme.levels()) {
        if (l.manifold == Manifold::s_ground && l.f == 1 && std::abs(l.m - d.m) <= 1) {
            out.push_back({l.id, 0.0});
        }
    }
    for (auto& b : out) {
        b.weight = 1.0 / static_cast<double>(out.size());
    }
    return out;
}

void add_decay(const LevelScheme& scheme, double rate, std::vector<CollapseChannel>& out, bool include_sink,
               double sink_rate) {
    const std::size_t n = scheme.size();
    for (const auto& d : scheme.levels()) {
        if (d.manifold == Manifold::d_metastable) {
            const auto from = scheme.index(d.id);
            for (const auto& b : branches_for(scheme, d)) {
                if (b.weight < 0.0 || !std::isfinite(b.weight)) {
                    throw std::invalid_argument("repump branching weight must be finite and non-negative");
                }
                if (b.weight > 0.0) {
                    out.push_back({Operator(ket_bra(n, scheme.index(b.level), from)), rate * b.weight});
                }
            }
        } else if (d.manifold == Manifold::d_repump_sink && include_sink) {
            const auto from = scheme.index(d.id);
            const auto bright = scheme.bright_levels();
            for (auto s : bright) {
                out.push_back({Operator(ket_bra(n, s, from)), sink_rate / static_cast<double>(bright.size())});
            }
        }
    }
}

}  // namespace

std::vector<CollapseChannel> build_repump_dissipator(const LevelScheme& scheme) {
    return build_repump_dissipator(scheme, scheme.repump.rate);
}

std::vector<CollapseChannel> build_repump_dissipator(const LevelScheme& scheme, double rate) {
    if (!std::isfinite(rate) || rate < 0.0) {
        throw std::invalid_argument("build_repump_dissipator: rate must be finite and non-negative");
    }
    std::vector<CollapseChannel> out;
    add_decay(scheme, rate, out, scheme.repump.include_sink_channel, scheme.repump.sink_rate);
    return out;
}

DetectionResult detect(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise) {
    noise.validate();
    const std::size_t n = scheme.size();
    if (state.dim() != n) {
        throw QuantumError("detect: state dimension does not match the level scheme");
    }
    const auto bright = scheme.bright_levels();
    const CMatrix pb = projector(n, bright);
    const CMatrix pr = CMatrix::Identity(n, n) - pb;
    const CMatrix rho = state.density();

    CMatrix rho_b = CMatrix::Zero(n, n);
    for (auto i : bright) {
        rho_b(i, i) = rho(i, i);
    }
    const CMatrix rho_r = pr * rho * pr;
    const double p_b = std::clamp(rho_b.trace().real(), 0.0, 1.0);
    const double p_r = 1.0 - p_b;

    const double eb = noise.spam_bright_error;
    const double ed = noise.spam_dark_error;
    DetectionResult out{p_b * (1.0 - eb) + p_r * ed, std::nullopt, std::nullopt,
                        QuantumState::mixed(rho_b + rho_r, state.labels())};

    const CMatrix post_bright = (1.0 - eb) * rho_b + ed * rho_r;
    const CMatrix post_dark = eb * rho_b + (1.0 - ed) * rho_r;
    const double tb = post_bright.trace().real();
    const double td = post_dark.trace().real();
    if (tb > 1e-15) {
        out.bright_state = QuantumState::mixed(post_bright / tb, state.labels());
    }
    if (td > 1e-15) {
        out.dark_state = QuantumState::mixed(post_dark / td, state.labels());
    }
    return out;
}

std::vector<CollapseChannel> noise_channels(const LevelScheme& scheme, const NoiseModel& noise, bool detecting) {
    noise.validate();
    const std::size_t n = scheme.size();
    std::vector<CollapseChannel> out;
    const double gphi = noise.dephasing_rate();
    if (gphi > 0.0) {
        out.push_back({Operator(projector(n, scheme.manifold_levels(Manifold::d_metastable)), Operator::hermitian), gphi});
    }
    add_decay(scheme, 1.0 / noise.d_lifetime, out, true, 1.0 / noise.d_lifetime);
    if (detecting && noise.detection_leak_rate > 0.0) {
        const auto sinks = scheme.manifold_levels(Manifold::d_repump_sink);
        if (!sinks.empty()) {
            for (auto s : scheme.bright_levels()) {
                out.push_back({Operator(ket_bra(n, sinks.front(), s)), noise.detection_leak_rate});
            }
        }
    }
    return out;
}

std::vector<CollapseChannel> noise_channels(const LevelScheme& scheme, const NoiseModel& noise) {
    return noise_channels(scheme, noise, false);
}

QuantumState apply_noise_window(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise,
                                double duration, bool detecting) {
    if (!std::isfinite(duration) || duration < 0.0) {
        throw std::invalid_argument("apply_noise_window: duration must be finite and non-negative");
    }
    if (state.dim() != scheme.size()) {
        throw QuantumError("apply_noise_window: state dimension does not match the level scheme");
    }
    LindbladSystem sys{
        Operator((detecting ? noise.sd_detuning : 0.0) *
                     projector(scheme.size(), scheme.manifold_levels(Manifold::d_metastable)),
                 Operator::hermitian),
        noise_channels(scheme, noise, detecting)};
    if (duration == 0.0) {
        return state.to_mixed();
    }
    return propagate_lindblad(state, sys, duration, 1e-5);
}

QuantumState apply_noise_window(const QuantumState& state, const LevelScheme& scheme, const NoiseModel& noise,
                                double duration) {
    return apply_noise_window(state, scheme, noise, duration, false);
}

void IonRegister::validate() const {
    if (ions.empty()) {
        throw std::invalid_argument("IonRegister: no ions");
    }
    for (const auto& ion : ions) {
        if (ion.state.dim() != scheme.size()) {
            throw std::invalid_argument("IonRegister: ion state dimension does not match the level scheme");
        }
    }
}

QuantumState qubit_state(const LevelScheme& scheme, cplx a, cplx b) {
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(scheme.size()));
    psi(static_cast<Eigen::Index>(scheme.index(ids::q0))) = a;
    psi(static_cast<Eigen::Index>(scheme.index(ids::q1))) = b;
    return QuantumState::pure(psi, scheme.labels());
}

CMatrix qubit_block(const QuantumState& state, const LevelScheme& scheme) {
    const auto i0 = static_cast<Eigen::Index>(scheme.index(ids::q0));
    const auto i1 = static_cast<Eigen::Index>(scheme.index(ids::q1));
    const CMatrix rho = state.density();
    CMatrix out(2, 2);
    out << rho(i0, i0), rho(i0, i1), rho(i1, i0), rho(i1, i1);
    return out;
}

double phase_corrected_fidelity(const QuantumState& state, const LevelScheme& scheme, cplx a, cplx b) {
    const CMatrix q = qubit_block(state, scheme);
    return std::norm(a) * q(0, 0).real() + std::norm(b) * q(1, 1).real() + 2.0 * std::abs(a) * std::abs(b) * std::abs(q(0, 1));
}

}  // namespace mcmr::ion
