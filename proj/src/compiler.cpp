#include "mcmr/compiler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mcmr::compiler {

using ion::Pulse;
using ion::Role;
using ion::Shape;
using ion::Target;

namespace {

constexpr std::array<const char*, 4> kKindNames = {"coherent", "noise", "detection", "repump"};
constexpr std::array<const char*, 10> kPurposeNames = {"shelve",    "unshelve",   "detect",         "echo", "rotate_in",
                                                       "rotate_out", "dressed_shelve", "pump", "repump", "idle"};

double raman_pi_time(const ion::LevelScheme& scheme) { return kPi / scheme.controls.raman_rabi; }

composite::CompositePulse resolve_rotation(const MCMRProgram& program) {
    const auto& d = *program.dressing;
    const double ratio = d.detuning / d.rabi;
    composite::CompositePulse seq;
    if (program.rotation) {
        seq = *program.rotation;
    } else if (std::abs(ratio - 0.1) < 1e-9) {
        seq = composite::reference_sequence(1);
    } else if (std::abs(ratio - 0.5) < 1e-9) {
        seq = composite::reference_sequence(2);
    } else {
        throw std::invalid_argument("no default rotation sequence for delta/omega = " + std::to_string(ratio) +
                                    "; supply one");
    }
    seq.validate();
    if (std::abs(seq.nominal_detuning_ratio - ratio) > 1e-6) {
        throw std::invalid_argument("rotation sequence targets delta/omega = " +
                                    std::to_string(seq.nominal_detuning_ratio) + " but the dressing has " +
                                    std::to_string(ratio));
    }
    return seq;
}

std::vector<Pulse> dressing_drives(const ion::LevelScheme& scheme, const dressing::DressingParams& d,
                                   const std::vector<std::size_t>& aux, double duration) {
    std::vector<Pulse> out;
    for (auto a : aux) {
        out.push_back({ion::ids::raman, d.rabi, d.detuning, 0.0, duration, Shape::rectangular, Target::individual(a)});
    }
    (void)scheme;
    return out;
}

ScheduleItem coherent(Purpose purpose, double duration, std::vector<Pulse> drives) {
    ScheduleItem item;
    item.kind = ItemKind::coherent;
    item.purpose = purpose;
    item.duration = duration;
    item.drives = std::move(drives);
    return item;
}

ScheduleItem detection(double duration, const std::vector<std::size_t>& measured, bool record) {
    ScheduleItem item;
    item.kind = ItemKind::detection;
    item.purpose = Purpose::detect;
    item.duration = duration;
    item.measured = measured;
    item.record = record;
    return item;
}

void append(std::vector<ScheduleItem>& dst, const std::vector<ScheduleItem>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

CMatrix diag_phase(const Eigen::VectorXd& shift, double t) {
    CMatrix d = CMatrix::Zero(shift.size(), shift.size());
    for (Eigen::Index i = 0; i < shift.size(); ++i) {
        d(i, i) = std::exp(cplx(0.0, shift(i) * t));
    }
    return d;
}

struct IonDrives {
    std::vector<ion::DriveTerm> terms;
    bool shaped = false;
};

IonDrives drives_for_ion(const ScheduleItem& item, std::size_t ion_index, const ion::LevelScheme& scheme,
                         double eps) {
    IonDrives out;
    for (const auto& p : item.drives) {
        const bool raman = scheme.transition(p.drive).kind == ion::TransitionKind::raman_qubit;
        const bool on_target = p.target.global || p.target.ion == ion_index;
        const double scale = on_target ? 1.0 : (raman ? eps : 1.0);
        out.terms.push_back({&p, scale, raman && on_target});
        out.shaped = out.shaped || p.shape != Shape::rectangular;
    }
    return out;
}

CMatrix coherent_unitary(const ScheduleItem& item, std::size_t ion_index, const ion::LevelScheme& scheme,
                         double eps) {
    const auto n = static_cast<Eigen::Index>(scheme.size());
    IonDrives d = drives_for_ion(item, ion_index, scheme, eps);
    Eigen::VectorXd loose;
    if (!d.shaped) {
        const Operator h = ion::build_segment_hamiltonian(scheme, d.terms, &loose);
        return diag_phase(loose, item.duration) * unitary_propagator(h.matrix(), item.duration);
    }
    const std::size_t slices = std::max<std::size_t>(scheme.controls.min_slices, 1);
    const double dt = item.duration / static_cast<double>(slices);
    std::vector<Pulse> sliced(item.drives.begin(), item.drives.end());
    std::vector<ion::DriveTerm> terms = d.terms;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        terms[k].pulse = &sliced[k];
    }
    CMatrix u = CMatrix::Identity(n, n);
    for (std::size_t s = 0; s < slices; ++s) {
        const double t = (static_cast<double>(s) + 0.5) * dt;
        for (std::size_t k = 0; k < sliced.size(); ++k) {
            sliced[k].rabi = item.drives[k].rabi * ion::envelope(item.drives[k].shape, t, item.duration);
        }
        Eigen::VectorXd slice_loose;
        const Operator h = ion::build_segment_hamiltonian(scheme, terms, &slice_loose);
        if (s == 0) {
            loose = slice_loose;
        }
        u = unitary_propagator(h.matrix(), dt) * u;
    }
    return diag_phase(loose, item.duration) * u;
}

QuantumState apply_item(const ScheduleItem& item, std::size_t ion_index, const QuantumState& state,
                        const ion::LevelScheme& scheme, const ion::NoiseModel& noise, bool noiseless,
                        ion::DetectionResult* detection_out) {
    const double eps = noise.crosstalk_fraction;
    switch (item.kind) {
        case ItemKind::coherent: {
            const CMatrix u = coherent_unitary(item, ion_index, scheme, eps);
            if (noiseless) {
                return apply_unitary(state, u);
            }
            QuantumState s = ion::apply_noise_window(state, scheme, noise, 0.5 * item.duration);
            s = apply_unitary(s, u);
            return ion::apply_noise_window(s, scheme, noise, 0.5 * item.duration);
        }
        case ItemKind::noise:
            return noiseless ? state : ion::apply_noise_window(state, scheme, noise, item.duration);
        case ItemKind::detection: {
            QuantumState s = state;
            if (std::find(item.measured.begin(), item.measured.end(), ion_index) != item.measured.end()) {
                auto r = ion::detect(state, scheme, noise);
                s = r.unconditional;
                if (detection_out != nullptr) {
                    *detection_out = std::move(r);
                }
            }
            return noiseless ? s : ion::apply_noise_window(s, scheme, noise, item.duration, true);
        }
        case ItemKind::repump: {
            IonDrives d = drives_for_ion(item, ion_index, scheme, eps);
            if (d.shaped) {
                throw std::invalid_argument("repump windows support rectangular drives only");
            }
            Eigen::VectorXd loose;
            LindbladSystem sys{ion::build_segment_hamiltonian(scheme, d.terms, &loose),
                               ion::build_repump_dissipator(scheme)};
            if (!noiseless) {
                auto extra = ion::noise_channels(scheme, noise);
                sys.collapse.insert(sys.collapse.end(), extra.begin(), extra.end());
            }
            QuantumState s = propagate_lindblad(state, sys, item.duration, 1e-6);
            return apply_unitary(s, diag_phase(loose, item.duration));
        }
    }
    throw std::logic_error("unknown schedule item kind");
}

QuantumState apply_x_frame(const QuantumState& state, const ion::LevelScheme& scheme) {
    const auto n = static_cast<Eigen::Index>(scheme.size());
    CMatrix p = CMatrix::Identity(n, n);
    const auto i0 = static_cast<Eigen::Index>(scheme.index(ion::ids::q0));
    const auto i1 = static_cast<Eigen::Index>(scheme.index(ion::ids::q1));
    p(i0, i0) = 0.0;
    p(i1, i1) = 0.0;
    p(i0, i1) = 1.0;
    p(i1, i0) = 1.0;
    return apply_unitary(state, p);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string to_string(ItemKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }
std::string to_string(Purpose p) { return kPurposeNames.at(static_cast<std::size_t>(p)); }

ItemKind item_kind_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (s == kKindNames[i]) {
            return static_cast<ItemKind>(i);
        }
    }
    throw std::invalid_argument("unknown schedule item type '" + s + "'");
}

Purpose purpose_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kPurposeNames.size(); ++i) {
        if (s == kPurposeNames[i]) {
            return static_cast<Purpose>(i);
        }
    }
    throw std::invalid_argument("unknown schedule purpose '" + s + "'");
}

void MCMRProgram::validate() const {
    if (auxiliary_ions().empty()) {
        throw std::invalid_argument("MCMRProgram: at least one auxiliary ion is required");
    }
    if (method == Method::hands_off) {
        if (!dressing || dressing->regime_hint != dressing::Regime::hands_off) {
            throw std::invalid_argument("MCMRProgram: hands-off method requires dressing with the hands-off regime");
        }
    }
    if (method == Method::shelving_dressing && !dressing) {
        throw std::invalid_argument("MCMRProgram: dressing variant requires dressing parameters");
    }
    if (dressing) {
        if (!(dressing->rabi > 0.0) || !std::isfinite(dressing->rabi) || !std::isfinite(dressing->detuning)) {
            throw std::invalid_argument("MCMRProgram: dressing needs a positive finite Rabi frequency");
        }
    }
}

std::vector<std::size_t> MCMRProgram::auxiliary_ions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] == Role::auxiliary) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> MCMRProgram::data_ions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] == Role::data) {
            out.push_back(i);
        }
    }
    return out;
}

void Schedule::validate(const ion::LevelScheme& scheme) const {
    if (x_frame.size() != n_ions) {
        throw std::invalid_argument("Schedule: x_frame size does not match n_ions");
    }
    for (const auto& item : items) {
        if (!(item.duration > 0.0) || !std::isfinite(item.duration)) {
            throw std::invalid_argument("Schedule: item durations must be positive");
        }
        for (const auto& p : item.drives) {
            p.validate(scheme);
            if (!p.target.global && p.target.ion >= n_ions) {
                throw std::invalid_argument("Schedule: drive targets ion " + std::to_string(p.target.ion) +
                                            " outside the register");
            }
        }
        for (auto m : item.measured) {
            if (m >= n_ions) {
                throw std::invalid_argument("Schedule: detection targets ion " + std::to_string(m) +
                                            " outside the register");
            }
        }
        if (item.kind != ItemKind::coherent && item.kind != ItemKind::repump && !item.drives.empty()) {
            throw std::invalid_argument("Schedule: only coherent and repump items may carry drives");
        }
    }
}

double Schedule::total_duration() const {
    double t = 0.0;
    for (const auto& item : items) {
        t += item.duration;
    }
    return t;
}

Pulse shelving_pulse(const ion::LevelScheme& scheme, double duration, double phase, Target target) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("shelving pulse duration must be positive");
    }
    (void)scheme;
    const double rabi = kPi / (ion::envelope_area_factor(Shape::blackman) * duration);
    return {ion::ids::shelve_f0, rabi, 0.0, phase, duration, Shape::blackman, target};
}

Pulse raman_pi(const ion::LevelScheme& scheme, double phase, std::size_t ion_index) {
    const double rabi = scheme.controls.raman_rabi;
    return {ion::ids::raman, rabi, 0.0, phase, kPi / rabi, Shape::rectangular, Target::individual(ion_index)};
}

std::vector<ScheduleItem> rotation_items(const composite::CompositePulse& seq, double rabi,
                                         const std::vector<std::size_t>& ions, Purpose purpose) {
    std::vector<ScheduleItem> out;
    for (const auto& step : seq.pulses) {
        if (step.duration_product <= 0.0) {
            continue;
        }
        const double tau = step.duration_product / rabi;
        std::vector<Pulse> drives;
        for (auto i : ions) {
            drives.push_back({ion::ids::raman, rabi, step.detuning_ratio * rabi, step.phase, tau, Shape::rectangular,
                              Target::individual(i)});
        }
        out.push_back(coherent(purpose, tau, std::move(drives)));
    }
    return out;
}

Schedule compile(const MCMRProgram& program, const ion::LevelScheme& scheme, const ion::NoiseModel& noise) {
    program.validate();
    if (program.directive == Directive::mid_circuit_measure) {
        if (program.method == Method::hands_off) {
            throw std::invalid_argument("compile: the hands-off method implements reset only");
        }
        return compile_shelving_measure(program, scheme, noise);
    }
    if (program.method != Method::hands_off) {
        throw std::invalid_argument("compile: reset is implemented by the hands-off method");
    }
    return compile_hands_off_reset(program, scheme, noise);
}

Schedule compile_shelving_measure(const MCMRProgram& program, const ion::LevelScheme& scheme,
                                  const ion::NoiseModel& noise) {
    program.validate();
    if (program.method == Method::hands_off) {
        throw std::invalid_argument("compile_shelving_measure: method must be a shelving variant");
    }
    noise.validate();
    const auto aux = program.auxiliary_ions();
    const auto data = program.data_ions();
    const double t_raman = raman_pi_time(scheme);
    const double half = 0.5 * noise.detection_time;
    if (!(half > 0.0)) {
        throw std::invalid_argument("compile_shelving_measure: detection_time must be positive");
    }

    Schedule sched;
    sched.n_ions = program.roles.size();
    sched.x_frame.assign(sched.n_ions, false);

    auto raman_on_data = [&](double phase, Purpose purpose) {
        for (auto d : data) {
            sched.items.push_back(coherent(purpose, t_raman, {raman_pi(scheme, phase, d)}));
        }
    };

    if (program.method == Method::shelving_qubit_rotation) {
        const double t435 = scheme.controls.shelve_duration - t_raman;
        if (!(t435 > 0.0)) {
            throw std::invalid_argument("shelve_duration must exceed the Raman pi time");
        }
        auto global_pi = [&](double phase, Purpose purpose) {
            return coherent(purpose, t435, {shelving_pulse(scheme, t435, phase, Target::all())});
        };
        sched.items.push_back(global_pi(0.0, Purpose::shelve));
        raman_on_data(0.0, Purpose::shelve);
        sched.items.push_back(detection(half, aux, true));
        if (program.echo) {
            sched.items.push_back(global_pi(0.0, Purpose::echo));
        }
        sched.items.push_back(detection(half, {}, false));
        raman_on_data(kPi, Purpose::unshelve);
        sched.items.push_back(global_pi(kPi, Purpose::unshelve));
    } else {
        const auto& dp = *program.dressing;
        const auto seq = resolve_rotation(program);
        const auto back = composite::time_reversal(seq);
        const double t435 = scheme.controls.dressed_shelve_duration - t_raman;
        if (!(t435 > 0.0)) {
            throw std::invalid_argument("dressed_shelve_duration must exceed the Raman pi time");
        }
        auto dressed_pi = [&](double phase, Purpose purpose) {
            std::vector<ScheduleItem> out = rotation_items(seq, dp.rabi, aux, Purpose::rotate_in);
            auto drives = dressing_drives(scheme, dp, aux, t435);
            drives.insert(drives.begin(), shelving_pulse(scheme, t435, phase, Target::all()));
            out.push_back(coherent(purpose, t435, std::move(drives)));
            append(out, rotation_items(back, dp.rabi, aux, Purpose::rotate_out));
            return out;
        };
        append(sched.items, dressed_pi(0.0, Purpose::dressed_shelve));
        raman_on_data(0.0, Purpose::shelve);
        sched.items.push_back(detection(half, aux, true));
        if (program.echo) {
            append(sched.items, dressed_pi(0.0, Purpose::echo));
        }
        sched.items.push_back(detection(half, {}, false));
        raman_on_data(kPi, Purpose::unshelve);
        append(sched.items, dressed_pi(kPi, Purpose::unshelve));
    }
    if (program.echo) {
        for (auto d : data) {
            sched.x_frame[d] = true;
        }
    }
    sched.validate(scheme);
    return sched;
}

Schedule compile_hands_off_reset(const MCMRProgram& program, const ion::LevelScheme& scheme,
                                 const ion::NoiseModel& noise) {
    program.validate();
    noise.validate();
    if (program.method != Method::hands_off) {
        throw std::invalid_argument("compile_hands_off_reset: method must be hands_off");
    }
    if (program.pump_cycles < 1) {
        throw std::invalid_argument("compile_hands_off_reset: pump_cycles must be at least 1");
    }
    const auto& dp = *program.dressing;
    const auto aux = program.auxiliary_ions();
    const auto seq = resolve_rotation(program);
    const auto basis = dressing::dressed_basis(dp);
    const double weight = std::abs(basis.psi_plus(1));
    if (weight < 1e-6) {
        throw std::invalid_argument("compile_hands_off_reset: dressed |0'> has no |1> admixture to drive");
    }
    const auto& c = scheme.controls;
    const double area = ion::envelope_area_factor(Shape::blackman);

    Schedule sched;
    sched.n_ions = program.roles.size();
    sched.x_frame.assign(sched.n_ions, false);
    sched.items = rotation_items(seq, dp.rabi, aux, Purpose::rotate_in);

    const Pulse dressed_tone{ion::ids::shelve_f1, kPi / (area * c.pump_dressed_duration * weight), -basis.shift_plus,
                             0.0, c.pump_dressed_duration, Shape::blackman, Target::all()};
    const double zeeman_rabi = kPi / (area * c.pump_zeeman_duration);
    const Pulse tone_m{ion::ids::pump_m, zeeman_rabi, 0.0, 0.0, c.pump_zeeman_duration, Shape::blackman, Target::all()};
    const Pulse tone_p{ion::ids::pump_p, zeeman_rabi, 0.0, 0.0, c.pump_zeeman_duration, Shape::blackman, Target::all()};

    for (std::size_t cycle = 0; cycle < program.pump_cycles; ++cycle) {
        for (const Pulse& tone : {dressed_tone, tone_m, tone_p}) {
            auto drives = dressing_drives(scheme, dp, aux, tone.duration);
            drives.insert(drives.begin(), tone);
            sched.items.push_back(coherent(Purpose::pump, tone.duration, std::move(drives)));
        }
        ScheduleItem rp;
        rp.kind = ItemKind::repump;
        rp.purpose = Purpose::repump;
        rp.duration = c.repump_window;
        rp.drives = dressing_drives(scheme, dp, aux, c.repump_window);
        sched.items.push_back(std::move(rp));
    }
    append(sched.items, rotation_items(composite::time_reversal(seq), dp.rabi, aux, Purpose::rotate_out));
    sched.validate(scheme);
    return sched;
}

Schedule compile_individual_shelve(std::size_t target_ion, std::size_t n_ions, const ion::LevelScheme& scheme) {
    if (n_ions < 1) {
        throw std::invalid_argument("compile_individual_shelve: n_ions must be at least 1");
    }
    if (target_ion >= n_ions) {
        throw std::invalid_argument("compile_individual_shelve: target ion " + std::to_string(target_ion) +
                                    " outside a register of " + std::to_string(n_ions));
    }
    const double t_raman = raman_pi_time(scheme);
    const double t435 = scheme.controls.shelve_duration - t_raman;
    if (!(t435 > 0.0)) {
        throw std::invalid_argument("shelve_duration must exceed the Raman pi time");
    }
    Schedule sched;
    sched.n_ions = n_ions;
    sched.x_frame.assign(n_ions, false);
    auto global_pi = [&](double phase) {
        return coherent(Purpose::shelve, t435, {shelving_pulse(scheme, t435, phase, Target::all())});
    };
    if (n_ions == 1) {
        sched.items.push_back(global_pi(0.0));
    } else {
        sched.items.push_back(coherent(Purpose::shelve, t_raman, {raman_pi(scheme, 0.0, target_ion)}));
        sched.items.push_back(global_pi(0.0));
        sched.items.push_back(coherent(Purpose::shelve, t_raman, {raman_pi(scheme, kPi, target_ion)}));
        sched.items.push_back(global_pi(kPi));
    }
    sched.validate(scheme);

    ion::NoiseModel ideal;
    ideal.crosstalk_fraction = 0.0;
    const auto d0 = scheme.index(ion::ids::d0);
    const double r = 1.0 / std::sqrt(2.0);
    const std::array<std::pair<cplx, cplx>, 6> tomo = {{{1.0, 0.0},
                                                        {0.0, 1.0},
                                                        {r, r},
                                                        {r, -r},
                                                        {r, cplx(0.0, r)},
                                                        {r, cplx(0.0, -r)}}};
    for (std::size_t i = 0; i < n_ions; ++i) {
        if (i == target_ion) {
            const auto out = simulate_ion(sched, 0, sched.items.size(), i, ion::qubit_state(scheme, 1.0, 0.0), scheme,
                                          ideal, true);
            if (out.population(d0) < 1.0 - 1e-9) {
                throw QuantumError("compile_individual_shelve: target |0> not shelved");
            }
            continue;
        }
        for (const auto& [a, b] : tomo) {
            const auto in = ion::qubit_state(scheme, a, b);
            const auto out = simulate_ion(sched, 0, sched.items.size(), i, in, scheme, ideal, true);
            if (fidelity(in, out) < 1.0 - 1e-9) {
                throw QuantumError("compile_individual_shelve: non-target ion disturbed");
            }
        }
    }
    return sched;
}

QuantumState simulate_ion(const Schedule& schedule, std::size_t first, std::size_t last, std::size_t ion_index,
                          const QuantumState& state, const ion::LevelScheme& scheme, const ion::NoiseModel& noise,
                          bool noiseless) {
    if (last > schedule.items.size() || first > last) {
        throw std::invalid_argument("simulate_ion: item range out of bounds");
    }
    QuantumState s = state;
    for (std::size_t k = first; k < last; ++k) {
        s = apply_item(schedule.items[k], ion_index, s, scheme, noise, noiseless, nullptr);
    }
    return s;
}

SimulationResult simulate_schedule(const Schedule& schedule, const ion::IonRegister& reg,
                                   const ion::NoiseModel& noise, const SimulationOptions& options) {
    reg.validate();
    noise.validate();
    schedule.validate(reg.scheme);
    if (schedule.n_ions != reg.size()) {
        throw std::invalid_argument("simulate_schedule: schedule addresses " + std::to_string(schedule.n_ions) +
                                    " ions but the register holds " + std::to_string(reg.size()));
    }
    SimulationResult result{reg, {}};
    for (std::size_t i = 0; i < reg.size(); ++i) {
        std::optional<std::mt19937_64> rng;
        if (options.sampling_seed) {
            std::seed_seq seq{static_cast<std::uint32_t>(*options.sampling_seed),
                              static_cast<std::uint32_t>(*options.sampling_seed >> 32), static_cast<std::uint32_t>(i)};
            rng.emplace(seq);
        }
        QuantumState s = reg.ions[i].state;
        for (std::size_t k = 0; k < schedule.items.size(); ++k) {
            const auto& item = schedule.items[k];
            std::optional<ion::DetectionResult> det;
            if (item.kind == ItemKind::detection) {
                det.emplace(ion::DetectionResult{0.0, std::nullopt, std::nullopt, s});
            }
            ion::DetectionResult* det_ptr = det ? &*det : nullptr;
            const bool measured = item.kind == ItemKind::detection &&
                                  std::find(item.measured.begin(), item.measured.end(), i) != item.measured.end();
            if (measured && rng) {
                auto r = ion::detect(s, reg.scheme, noise);
                const bool bright = uniform01(*rng) < r.p_bright;
                const auto& post = bright ? r.bright_state : r.dark_state;
                s = post ? *post : r.unconditional;
                if (item.record) {
                    result.records.push_back({k, i, r.p_bright, bright});
                }
                ScheduleItem rest = item;
                rest.measured.clear();
                s = apply_item(rest, i, s, reg.scheme, noise, options.noiseless, nullptr);
                continue;
            }
            s = apply_item(item, i, s, reg.scheme, noise, options.noiseless, det_ptr);
            if (measured && item.record) {
                result.records.push_back({k, i, det->p_bright, std::nullopt});
            }
        }
        if (options.apply_frame && schedule.x_frame[i]) {
            s = apply_x_frame(s, reg.scheme);
        }
        result.reg.ions[i].state = s;
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const MeasurementRecord& a, const MeasurementRecord& b) {
                         return a.item != b.item ? a.item < b.item : a.ion < b.ion;
                     });
    return result;
}

}  // namespace mcmr::compiler
