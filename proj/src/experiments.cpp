#include "mcmr/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <thread>

#include "mcmr/dressing.hpp"
#include "mcmr/serialization.hpp"

namespace mcmr::experiments {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 5> kScenarioNames = {"dstate_spectrum", "measure_fidelity", "ramsey_phase",
                                                       "pump_convergence", "dress_rotate_error"};

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

double default_ratio(const ScanSpec& spec, double fallback) {
    return std::isnan(spec.dressing_ratio) ? fallback : spec.dressing_ratio;
}

composite::CompositePulse rotation_for(const ScanSpec& spec, double ratio) {
    if (spec.sequence) {
        return *spec.sequence;
    }
    if (std::abs(ratio - 0.1) < 1e-9) {
        return composite::reference_sequence(1);
    }
    if (std::abs(ratio - 0.5) < 1e-9) {
        return composite::reference_sequence(2);
    }
    throw std::invalid_argument("no default rotation sequence for delta/omega = " + std::to_string(ratio));
}

double d_population(const QuantumState& s, const ion::LevelScheme& scheme) {
    double p = 0.0;
    for (auto i : scheme.manifold_levels(ion::Manifold::d_metastable)) {
        p += s.population(i);
    }
    return p;
}

/// Replaces exact probabilities by binomial estimates when shots > 0.
void sample_rows(ScanResult& r, const ScanSpec& spec, const std::vector<std::size_t>& probability_columns) {
    if (spec.shots == 0) {
        return;
    }
    r.sigma.assign(r.values.size(), std::vector<double>(r.columns.size(), 0.0));
    const double n = static_cast<double>(spec.shots);
    for (std::size_t row = 0; row < r.values.size(); ++row) {
        for (auto col : probability_columns) {
            std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                              static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col)};
            std::mt19937_64 rng(seq);
            const double p = std::clamp(r.values[row][col], 0.0, 1.0);
            std::binomial_distribution<std::uint64_t> dist(spec.shots, p);
            const double est = static_cast<double>(dist(rng)) / n;
            r.values[row][col] = est;
            r.sigma[row][col] = std::sqrt(std::max(est * (1.0 - est), 0.25 / n) / n);
        }
    }
}

ScanResult start(const ScanSpec& spec, std::vector<std::string> columns) {
    spec.validate();
    ScanResult r;
    r.scenario = spec.scenario;
    r.label = spec.label;
    std::tie(r.axis, r.axis_unit) = sweep_axis(spec.scenario);
    r.columns = std::move(columns);
    r.x = spec.sweep.values;
    r.values.assign(r.x.size(), std::vector<double>(r.columns.size(), 0.0));
    return r;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void finish(ScanResult& r, const ScanSpec& spec) {
    const json spec_doc = to_json(spec);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(spec_doc.dump())));
    r.metadata = {{"schema", kScanSchema},
                  {"code_version", kCodeVersion},
                  {"spec_hash", hash},
                  {"spec", spec_doc}};
}

std::vector<ion::IonState> two_ions(const ion::LevelScheme& scheme, const QuantumState& data,
                                    const QuantumState& aux) {
    (void)scheme;
    return {{ion::Role::data, data}, {ion::Role::auxiliary, aux}};
}

CMatrix embed_qubit_unitary(const ion::LevelScheme& scheme, const Eigen::Matrix2cd& u) {
    const auto n = static_cast<Eigen::Index>(scheme.size());
    CMatrix m = CMatrix::Identity(n, n);
    const std::array<Eigen::Index, 2> idx = {static_cast<Eigen::Index>(scheme.index(ion::ids::q0)),
                                             static_cast<Eigen::Index>(scheme.index(ion::ids::q1))};
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            m(idx[r], idx[c]) = u(r, c);
        }
    }
    return m;
}

/// exp(−i θ/2 (cos φ σx + sin φ σy)).
Eigen::Matrix2cd rotation(double theta, double phi) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Eigen::Matrix2cd u;
    u << c, -cplx(0.0, 1.0) * s * std::exp(cplx(0.0, -phi)), -cplx(0.0, 1.0) * s * std::exp(cplx(0.0, phi)), c;
    return u;
}

compiler::MCMRProgram measure_program(const ScanSpec& spec) {
    compiler::MCMRProgram p;
    p.directive = compiler::Directive::mid_circuit_measure;
    p.method = spec.method;
    p.roles = {ion::Role::data, ion::Role::auxiliary};
    if (spec.method == compiler::Method::hands_off) {
        throw std::invalid_argument("measurement scans need a shelving method");
    }
    if (spec.method == compiler::Method::shelving_dressing) {
        const double ratio = default_ratio(spec, 0.1);
        const double rabi = spec.scheme.controls.raman_rabi;
        p.dressing = dressing::DressingParams{rabi, ratio * rabi, dressing::Regime::shelving};
        p.rotation = rotation_for(spec, ratio);
    }
    return p;
}

}  // namespace

std::string to_string(Scenario s) { return kScenarioNames.at(static_cast<std::size_t>(s)); }

Scenario scenario_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
        if (s == kScenarioNames[i]) {
            return static_cast<Scenario>(i);
        }
    }
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::pair<std::string, std::string> sweep_axis(Scenario s) {
    switch (s) {
        case Scenario::dstate_spectrum:
            return {"detuning", "kHz"};
        case Scenario::measure_fidelity:
            return {"theta", "rad"};
        case Scenario::ramsey_phase:
            return {"phase", "rad"};
        case Scenario::pump_convergence:
            return {"cycles", "count"};
        case Scenario::dress_rotate_error:
            return {"rabi_fraction", "fraction of nominal"};
    }
    return {"", ""};
}

Sweep default_sweep(Scenario s) {
    const auto name = sweep_axis(s).first;
    switch (s) {
        case Scenario::dstate_spectrum:
            return {name, linspace(-150.0, 150.0, 301)};
        case Scenario::measure_fidelity:
        case Scenario::ramsey_phase:
            return {name, linspace(0.0, kTwoPi, 25)};
        case Scenario::pump_convergence:
            return {name, linspace(0.0, 16.0, 17)};
        case Scenario::dress_rotate_error:
            return {name, linspace(0.0, 1.2, 1201)};
    }
    return {};
}

void ScanSpec::validate() const {
    if (sweep.values.empty()) {
        throw std::invalid_argument("ScanSpec: sweep must not be empty");
    }
    for (double v : sweep.values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("ScanSpec: sweep values must be finite");
        }
    }
    if (!sweep.parameter.empty() && sweep.parameter != sweep_axis(scenario).first) {
        throw std::invalid_argument("ScanSpec: scenario " + to_string(scenario) + " sweeps '" +
                                    sweep_axis(scenario).first + "', not '" + sweep.parameter + "'");
    }
    if (aux_state < -1 || aux_state > 1) {
        throw std::invalid_argument("ScanSpec: aux_state must be 0 or 1");
    }
    if (scenario == Scenario::pump_convergence) {
        for (double v : sweep.values) {
            if (v < 0.0 || v != std::floor(v)) {
                throw std::invalid_argument("ScanSpec: cycle counts must be non-negative integers");
            }
        }
    }
    noise.validate();
}

double ScanResult::value(std::size_t row, const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw std::invalid_argument("ScanResult: no column '" + name + "'");
    }
    return values.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

std::vector<double> ScanResult::column(const std::string& name) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < values.size(); ++r) {
        out.push_back(value(r, name));
    }
    return out;
}

ScanResult run_scan(const ScanSpec& spec) {
    switch (spec.scenario) {
        case Scenario::dstate_spectrum:
            return run_dstate_spectrum(spec);
        case Scenario::measure_fidelity:
            return run_measure_fidelity(spec);
        case Scenario::ramsey_phase:
            return run_ramsey(spec);
        case Scenario::pump_convergence:
            return run_pump_convergence(spec);
        case Scenario::dress_rotate_error:
            return run_dress_rotate_error(spec);
    }
    throw std::invalid_argument("unknown scenario");
}

ScanResult run_dstate_spectrum(const ScanSpec& spec) {
    if (spec.scenario != Scenario::dstate_spectrum) {
        throw std::invalid_argument("run_dstate_spectrum: wrong scenario");
    }
    ScanResult r = start(spec, {"dressed_D", "bare_D"});
    const auto& scheme = spec.scheme;
    const double ratio = default_ratio(spec, 0.1);
    const int aux_state = spec.aux_state < 0 ? 1 : spec.aux_state;
    const double rabi = scheme.controls.raman_rabi;
    const dressing::DressingParams dp{rabi, ratio * rabi, dressing::Regime::shelving};
    const auto basis = dressing::dressed_basis(dp);
    const CVector& branch = aux_state == 0 ? basis.psi_plus : basis.psi_minus;
    const double shift = aux_state == 0 ? basis.shift_plus : basis.shift_minus;
    const double weight = std::abs(branch(1));
    if (weight < 1e-6) {
        throw std::invalid_argument("run_dstate_spectrum: dressed branch has no |1> admixture");
    }
    const double peak_rabi = scheme.controls.drive_435_rabi;
    const double duration = kPi / (ion::envelope_area_factor(ion::Shape::blackman) * peak_rabi * weight);

    // ion 0 dressed (auxiliary role), ion 1 bare
    compiler::Schedule prep;
    prep.n_ions = 2;
    prep.x_frame = {false, false};
    prep.items = compiler::rotation_items(rotation_for(spec, ratio), rabi, {0}, compiler::Purpose::rotate_in);
    const auto q0 = ion::qubit_state(scheme, aux_state == 0 ? 1.0 : 0.0, aux_state == 1 ? 1.0 : 0.0);
    const auto q1 = ion::qubit_state(scheme, 0.0, 1.0);
    const std::array<QuantumState, 2> ready = {
        compiler::simulate_ion(prep, 0, prep.items.size(), 0, q0, scheme, spec.noise, false),
        compiler::simulate_ion(prep, 0, prep.items.size(), 1, q1, scheme, spec.noise, false)};

    parallel_for(r.x.size(), spec.threads, [&](std::size_t i) {
        compiler::Schedule s = prep;
        s.items.clear();
        compiler::ScheduleItem item;
        item.kind = compiler::ItemKind::coherent;
        item.purpose = compiler::Purpose::pump;
        item.duration = duration;
        item.drives.push_back({ion::ids::shelve_f1, peak_rabi, kTwoPi * 1e3 * r.x[i], 0.0, duration,
                               ion::Shape::blackman, ion::Target::all()});
        item.drives.push_back({ion::ids::raman, rabi, dp.detuning, 0.0, duration, ion::Shape::rectangular,
                               ion::Target::individual(0)});
        s.items.push_back(item);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto out = compiler::simulate_ion(s, 0, 1, k, ready[k], scheme, spec.noise, false);
            r.values[i][k] = d_population(out, scheme);
        }
    });
    sample_rows(r, spec, {0, 1});

    const auto dressed = find_peak(r.x, r.column("dressed_D"));
    const auto bare = find_peak(r.x, r.column("bare_D"));
    r.summary = {{"dressed_peak_khz", dressed.center},
                 {"dressed_peak_height", dressed.height},
                 {"bare_peak_khz", bare.center},
                 {"bare_peak_height", bare.height},
                 {"predicted_dressed_khz", -shift / (kTwoPi * 1e3)},
                 {"omega_g_khz", basis.omega_g / (kTwoPi * 1e3)},
                 {"pulse_duration_us", duration * 1e6},
                 {"dressing_ratio", ratio}};
    finish(r, spec);
    return r;
}

ScanResult run_measure_fidelity(const ScanSpec& spec) {
    if (spec.scenario != Scenario::measure_fidelity) {
        throw std::invalid_argument("run_measure_fidelity: wrong scenario");
    }
    ScanResult r = start(spec, {"p_bright"});
    const auto& scheme = spec.scheme;
    const auto sched = compiler::compile(measure_program(spec), scheme, spec.noise);
    const auto data = ion::qubit_state(scheme, 1.0, 0.0);
    parallel_for(r.x.size(), spec.threads, [&](std::size_t i) {
        const double th = r.x[i];
        const auto aux = ion::qubit_state(scheme, std::cos(th / 2.0), cplx(0.0, -std::sin(th / 2.0)));
        const ion::IonRegister reg{scheme, two_ions(scheme, data, aux)};
        const auto res = compiler::simulate_schedule(sched, reg, spec.noise);
        r.values[i][0] = res.records.at(0).p_bright;
    });
    sample_rows(r, spec, {0});

    if (r.x.size() >= 3) {
        const auto fit = fit_sinusoid(r.x, r.column("p_bright"));
        const double f0 = 1.0 - (fit.offset + fit.cos_amplitude);
        const double f1 = fit.offset - fit.cos_amplitude;
        r.summary = {{"fidelity_0", f0}, {"fidelity_1", f1}, {"fidelity", 0.5 * (f0 + f1)}, {"contrast", fit.contrast()}};
    } else {
        r.notes.push_back("fewer than three sweep points: no sinusoid fit");
    }
    finish(r, spec);
    return r;
}

ScanResult run_ramsey(const ScanSpec& spec) {
    if (spec.scenario != Scenario::ramsey_phase) {
        throw std::invalid_argument("run_ramsey: wrong scenario");
    }
    ScanResult r = start(spec, {"p_bright_raw", "p1_corrected"});
    const auto& scheme = spec.scheme;
    const int aux_state = spec.aux_state < 0 ? 0 : spec.aux_state;
    const auto sched = compiler::compile(measure_program(spec), scheme, spec.noise);
    const auto ground = ion::qubit_state(scheme, 1.0, 0.0);
    const auto data = apply_unitary(ground, embed_qubit_unitary(scheme, rotation(kPi / 2.0, 0.0)));
    const auto aux = ion::qubit_state(scheme, aux_state == 0 ? 1.0 : 0.0, aux_state == 1 ? 1.0 : 0.0);
    const ion::IonRegister reg{scheme, two_ions(scheme, data, aux)};
    const auto res = compiler::simulate_schedule(sched, reg, spec.noise);
    const QuantumState after = res.reg.ions[0].state;

    parallel_for(r.x.size(), spec.threads, [&](std::size_t i) {
        const auto analysed = apply_unitary(after, embed_qubit_unitary(scheme, rotation(kPi / 2.0, r.x[i])));
        r.values[i][0] = ion::detect(analysed, scheme, spec.noise).p_bright;
    });
    sample_rows(r, spec, {0});
    std::vector<double> raw = r.column("p_bright_raw");
    const auto corrected = spam_correct(raw, spec.noise.spam_dark_error, spec.noise.spam_bright_error);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        r.values[i][1] = corrected.values[i];
        if (!r.sigma.empty()) {
            r.sigma[i][1] = r.sigma[i][0] / (1.0 - spec.noise.spam_dark_error - spec.noise.spam_bright_error);
        }
    }
    if (corrected.clamp_events > 0) {
        r.notes.push_back("spam correction clamped " + std::to_string(corrected.clamp_events) + " values");
    }
    r.summary = {{"aux_state", aux_state},
                 {"aux_p_bright", res.records.at(0).p_bright},
                 {"spam_clamp_events", static_cast<double>(corrected.clamp_events)}};
    if (r.x.size() >= 3) {
        const double c = fit_sinusoid(r.x, corrected.values).contrast();
        r.summary["contrast"] = c;
        r.summary["fidelity"] = 0.5 * (1.0 + c);
    } else {
        r.notes.push_back("fewer than three sweep points: no sinusoid fit");
    }
    finish(r, spec);
    return r;
}

ScanResult run_pump_convergence(const ScanSpec& spec) {
    if (spec.scenario != Scenario::pump_convergence) {
        throw std::invalid_argument("run_pump_convergence: wrong scenario");
    }
    ScanResult r = start(spec, {"aux_error_init0", "aux_error_init1", "aux_dressed_target_init0",
                                "aux_dressed_target_init1", "data_fidelity"});
    const auto& scheme = spec.scheme;
    const double ratio = default_ratio(spec, 0.5);
    const double rabi = scheme.controls.raman_rabi;

    compiler::MCMRProgram p;
    p.directive = compiler::Directive::mid_circuit_reset;
    p.method = compiler::Method::hands_off;
    p.roles = {ion::Role::data, ion::Role::auxiliary};
    p.dressing = dressing::DressingParams{rabi, ratio * rabi, dressing::Regime::hands_off};
    p.rotation = rotation_for(spec, ratio);
    const auto max_cycles = static_cast<std::size_t>(*std::max_element(r.x.begin(), r.x.end()));
    p.pump_cycles = std::max<std::size_t>(max_cycles, 1);
    const auto sched = compiler::compile(p, scheme, spec.noise);

    std::size_t n_in = 0;
    while (n_in < sched.items.size() && sched.items[n_in].purpose == compiler::Purpose::rotate_in) {
        ++n_in;
    }
    const std::size_t per_cycle = 4;
    const std::size_t out_begin = n_in + per_cycle * p.pump_cycles;
    const std::size_t out_end = sched.items.size();
    const auto target = dressing::dressed_basis(*p.dressing).psi_minus;
    const double h = 1.0 / std::sqrt(2.0);
    const auto i1 = scheme.index(ion::ids::q1);

    // trajectory[c] = state after rotate-in and c cycles, per (ion, initial state)
    auto trajectory = [&](std::size_t ion_index, const QuantumState& init) {
        std::vector<QuantumState> states;
        QuantumState s = compiler::simulate_ion(sched, 0, n_in, ion_index, init, scheme, spec.noise, false);
        states.push_back(s);
        for (std::size_t c = 0; c < max_cycles; ++c) {
            const std::size_t b = n_in + per_cycle * c;
            s = compiler::simulate_ion(sched, b, b + per_cycle, ion_index, s, scheme, spec.noise, false);
            states.push_back(s);
        }
        return states;
    };
    std::array<std::vector<QuantumState>, 3> traj;
    parallel_for(3, spec.threads, [&](std::size_t k) {
        if (k < 2) {
            traj[k] = trajectory(1, ion::qubit_state(scheme, k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0));
        } else {
            traj[k] = trajectory(0, ion::qubit_state(scheme, h, h));
        }
    });

    parallel_for(r.x.size(), spec.threads, [&](std::size_t i) {
        const auto c = static_cast<std::size_t>(r.x[i]);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& dressed = traj[k][c];
            const CMatrix q = ion::qubit_block(dressed, scheme);
            r.values[i][2 + k] = (target.adjoint() * q * target)(0, 0).real();
            const auto out = compiler::simulate_ion(sched, out_begin, out_end, 1, dressed, scheme, spec.noise, false);
            r.values[i][k] = 1.0 - out.population(i1);
        }
        const auto data = compiler::simulate_ion(sched, out_begin, out_end, 0, traj[2][c], scheme, spec.noise, false);
        r.values[i][4] = ion::phase_corrected_fidelity(data, scheme, h, h);
    });
    sample_rows(r, spec, {0, 1, 2, 3, 4});

    const auto last = r.values.size() - 1;
    r.summary = {{"dressing_ratio", ratio},
                 {"aux_error_init0_last", r.values[last][0]},
                 {"aux_error_init1_last", r.values[last][1]},
                 {"data_fidelity_last", r.values[last][4]},
                 {"cycle_duration_us", 1e6 * (sched.items[n_in].duration + sched.items[n_in + 1].duration +
                                              sched.items[n_in + 2].duration + sched.items[n_in + 3].duration)}};
    finish(r, spec);
    return r;
}

ScanResult run_dress_rotate_error(const ScanSpec& spec) {
    if (spec.scenario != Scenario::dress_rotate_error) {
        throw std::invalid_argument("run_dress_rotate_error: wrong scenario");
    }
    ScanResult r = start(spec, {"rot_x", "rot_y", "rot_z", "rot_angle", "xy_error", "in_green_band"});
    const auto seq = spec.sequence ? *spec.sequence : composite::reference_sequence(2);
    parallel_for(r.x.size(), spec.threads, [&](std::size_t i) {
        const double f = r.x[i];
        if (f < 0.0) {
            throw std::invalid_argument("run_dress_rotate_error: Rabi fractions must be non-negative");
        }
        const Operator u = composite::sequence_unitary(seq, f);
        const auto v = rotation_vector(u);
        r.values[i] = {v[0],
                       v[1],
                       v[2],
                       std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]),
                       composite::xy_error(u, composite::target_at_fraction(seq.nominal_detuning_ratio, f)),
                       (f >= 0.90 - 1e-12 && f <= 1.05 + 1e-12) ? 1.0 : 0.0};
    });
    double band_max = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        if (r.values[i][5] > 0.5) {
            band_max = std::max(band_max, r.values[i][4]);
        }
    }
    r.summary = {{"green_band_max_xy_error", band_max}, {"delta_over_omega", seq.nominal_detuning_ratio}};
    finish(r, spec);
    return r;
}

SpamCorrection spam_correct(const std::vector<double>& raw_bright, double dark_error, double bright_error) {
    const double det = 1.0 - bright_error - dark_error;
    if (std::abs(det) < 1e-12) {
        throw std::invalid_argument("spam_correct: confusion matrix is singular");
    }
    SpamCorrection out;
    out.values.reserve(raw_bright.size());
    for (double raw : raw_bright) {
        const double p = (raw - dark_error) / det;
        const double c = std::clamp(p, 0.0, 1.0);
        if (c != p) {
            ++out.clamp_events;
        }
        out.values.push_back(c);
    }
    return out;
}

double spam_apply(double p, double dark_error, double bright_error) {
    return p * (1.0 - bright_error) + (1.0 - p) * dark_error;
}

double SinusoidFit::contrast() const { return 2.0 * std::hypot(cos_amplitude, sin_amplitude); }

SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw std::invalid_argument("fit_sinusoid: need at least three matching samples");
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        a(k, 0) = 1.0;
        a(k, 1) = std::cos(x[i]);
        a(k, 2) = std::sin(x[i]);
        b(k) = y[i];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1), c(2)};
}

Peak find_peak(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("find_peak: need matching non-empty samples");
    }
    const auto k = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    if (k == 0 || k + 1 == y.size()) {
        return {x[k], y[k]};
    }
    const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
    const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if (!(a < 0.0)) {
        return {x1, y1};
    }
    const double xc = -b / (2.0 * a);
    const double c = y1 - a * x1 * x1 - b * x1;
    return {xc, a * xc * xc + b * xc + c};
}

json to_json(const ScanSpec& spec) {
    json doc = {{"scenario", to_string(spec.scenario)},
                {"sweep", {{"parameter", sweep_axis(spec.scenario).first}, {"values", spec.sweep.values}}},
                {"noise", io::to_json(spec.noise)},
                {"scheme", io::to_json(spec.scheme)},
                {"shots", spec.shots},
                {"seed", spec.seed},
                {"label", spec.label},
                {"aux_state", spec.aux_state},
                {"method", spec.method == compiler::Method::shelving_qubit_rotation ? "shelving_qubit_rotation"
                           : spec.method == compiler::Method::shelving_dressing     ? "shelving_dressing"
                                                                                    : "hands_off"}};
    doc["dressing_ratio"] = std::isnan(spec.dressing_ratio) ? json(nullptr) : json(spec.dressing_ratio);
    doc["sequence"] = spec.sequence ? io::to_json(*spec.sequence) : json(nullptr);
    return doc;
}

json to_json(const ScanResult& result) {
    json rows = json::array();
    for (std::size_t i = 0; i < result.x.size(); ++i) {
        json values = json::object();
        json sigma = json::object();
        for (std::size_t c = 0; c < result.columns.size(); ++c) {
            values[result.columns[c]] = result.values[i][c];
            if (!result.sigma.empty()) {
                sigma[result.columns[c]] = result.sigma[i][c];
            }
        }
        json row = {{result.axis, result.x[i]}, {"values", values}};
        if (!result.sigma.empty()) {
            row["sigma"] = sigma;
        }
        rows.push_back(row);
    }
    return {{"schema", kScanSchema},
            {"scenario", to_string(result.scenario)},
            {"label", result.label},
            {"axis", {{"name", result.axis}, {"unit", result.axis_unit}}},
            {"columns", result.columns},
            {"rows", rows},
            {"summary", result.summary},
            {"notes", result.notes},
            {"metadata", result.metadata}};
}

std::string to_csv(const ScanResult& result) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string out = result.axis + "_" + (result.axis_unit == "fraction of nominal" ? "fraction" : result.axis_unit);
    for (const auto& c : result.columns) {
        out += "," + c;
    }
    if (!result.sigma.empty()) {
        for (const auto& c : result.columns) {
            out += "," + c + "_sigma";
        }
    }
    out += "\n";
    for (std::size_t i = 0; i < result.x.size(); ++i) {
        out += num(result.x[i]);
        for (double v : result.values[i]) {
            out += "," + num(v);
        }
        if (!result.sigma.empty()) {
            for (double v : result.sigma[i]) {
                out += "," + num(v);
            }
        }
        out += "\n";
    }
    return out;
}

std::pair<std::string, std::string> write_result(const ScanResult& result, const std::string& dir) {
    const std::filesystem::path base = std::filesystem::path(dir) / (to_string(result.scenario) + "-" + result.label);
    const auto csv = base.string() + ".csv";
    const auto js = base.string() + ".json";
    io::write_text_file(csv, to_csv(result));
    io::write_json_file(js, to_json(result));
    return {csv, js};
}

}  // namespace mcmr::experiments
