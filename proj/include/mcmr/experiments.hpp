// experiments.hpp: scenario scans (spectrum, readout, Ramsey, pumping, rotation error) with
// SPAM correction and CSV/JSON output

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcmr/compiler.hpp"
#include "mcmr/composite_pulse.hpp"
#include "mcmr/ion_model.hpp"

namespace mcmr::experiments {

enum class Scenario { dstate_spectrum, measure_fidelity, ramsey_phase, pump_convergence, dress_rotate_error };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct Sweep {
    std::string parameter;
    std::vector<double> values;
};

/// Axis name and unit each scenario sweeps: detuning in kHz, angles in rad,
/// cycles as integers, Rabi frequency as a fraction of nominal.
std::pair<std::string, std::string> sweep_axis(Scenario s);
Sweep default_sweep(Scenario s);

struct ScanSpec {
    Scenario scenario = Scenario::dress_rotate_error;
    Sweep sweep;
    ion::NoiseModel noise;
    ion::LevelScheme scheme = ion::LevelScheme::ytterbium171();
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    std::string label = "run";
    unsigned threads = 1;

    /// Dressing δ/Ω; NaN selects the scenario default (0.1 spectrum, 0.5 pumping).
    double dressing_ratio = std::numeric_limits<double>::quiet_NaN();
    /// Initial auxiliary qubit state (0 or 1); −1 selects the scenario default.
    int aux_state = -1;
    compiler::Method method = compiler::Method::shelving_qubit_rotation;
    std::optional<composite::CompositePulse> sequence;

    void validate() const;
};

struct ScanResult {
    Scenario scenario = Scenario::dress_rotate_error;
    std::string label;
    std::string axis;
    std::string axis_unit;
    std::vector<std::string> columns;
    std::vector<double> x;
    std::vector<std::vector<double>> values;
    /// Sampling standard errors per value; empty in exact-probability mode.
    std::vector<std::vector<double>> sigma;
    std::map<std::string, double> summary;
    std::vector<std::string> notes;
    nlohmann::json metadata;

    double value(std::size_t row, const std::string& column) const;
    std::vector<double> column(const std::string& name) const;
};

ScanResult run_scan(const ScanSpec& spec);
ScanResult run_dstate_spectrum(const ScanSpec& spec);
ScanResult run_measure_fidelity(const ScanSpec& spec);
ScanResult run_ramsey(const ScanSpec& spec);
ScanResult run_pump_convergence(const ScanSpec& spec);
ScanResult run_dress_rotate_error(const ScanSpec& spec);

struct SpamCorrection {
    std::vector<double> values;
    std::size_t clamp_events = 0;
};

/// Inverts the bright/dark confusion matrix: p = (raw − e_d)/(1 − e_b − e_d), clamped to [0, 1].
SpamCorrection spam_correct(const std::vector<double>& raw_bright, double dark_error, double bright_error);
/// Forward confusion: raw = p(1 − e_b) + (1 − p)e_d.
double spam_apply(double p, double dark_error, double bright_error);

struct SinusoidFit {
    double offset = 0.0;
    double cos_amplitude = 0.0;
    double sin_amplitude = 0.0;
    double contrast() const;  // peak-to-peak, 2√(a² + b²)
};

/// Least squares y ≈ c + a cos x + b sin x.
SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y);

struct Peak {
    double center = 0.0;
    double height = 0.0;
};

/// Largest sample refined by a parabola through its neighbours.
Peak find_peak(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const ScanSpec& spec);
nlohmann::json to_json(const ScanResult& result);
std::string to_csv(const ScanResult& result);
/// Writes {scenario}-{label}.csv and .json into `dir`; returns the two paths.
std::pair<std::string, std::string> write_result(const ScanResult& result, const std::string& dir);

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr const char* kScanSchema = "mcmr.scan/1";

}  // namespace mcmr::experiments
