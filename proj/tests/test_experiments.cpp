#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mcmr/experiments.hpp"

using namespace mcmr;
using namespace mcmr::experiments;

namespace {

ion::NoiseModel ideal() {
    ion::NoiseModel n;
    n.d_lifetime = 1e12;
    n.t2_optical = 2e12;
    n.crosstalk_fraction = 0.0;
    return n;
}

ScanSpec spec_for(Scenario s, std::vector<double> values) {
    ScanSpec spec;
    spec.scenario = s;
    spec.sweep = {sweep_axis(s).first, std::move(values)};
    return spec;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Spam, ZeroErrorsIsIdentity) {
    const std::vector<double> raw = {0.0, 0.25, 0.7, 1.0};
    EXPECT_EQ(spam_correct(raw, 0.0, 0.0).values, raw);
}

TEST(Spam, KnownInversions) {
    // (0.995 − 0.002)/(1 − 0.005 − 0.002) = 0.993/0.993
    EXPECT_NEAR(spam_correct({0.995}, 0.002, 0.005).values[0], 1.0, 1e-9);
    EXPECT_NEAR(spam_correct({0.5}, 0.03, 0.03).values[0], 0.5, 1e-15);
    EXPECT_THROW(spam_correct({0.5}, 0.5, 0.5), std::invalid_argument);
    const auto c = spam_correct({0.0, 1.0, 0.5}, 0.01, 0.02);
    EXPECT_EQ(c.clamp_events, 2U);
    EXPECT_EQ(c.values[0], 0.0);
    EXPECT_EQ(c.values[1], 1.0);
}

TEST(Spam, CorrectionInvertsForwardConfusion) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = u(rng);
        const double ed = 0.05 * u(rng), eb = 0.05 * u(rng);
        EXPECT_NEAR(spam_correct({spam_apply(p, ed, eb)}, ed, eb).values[0], p, 1e-12);
    }
}

TEST(Fits, SinusoidRecoversParameters) {
    std::vector<double> x = grid(0.0, kTwoPi, 25), y;
    for (double v : x) {
        y.push_back(0.4 + 0.3 * std::cos(v) - 0.1 * std::sin(v));
    }
    const auto f = fit_sinusoid(x, y);
    EXPECT_NEAR(f.offset, 0.4, 1e-12);
    EXPECT_NEAR(f.cos_amplitude, 0.3, 1e-12);
    EXPECT_NEAR(f.sin_amplitude, -0.1, 1e-12);
    EXPECT_NEAR(f.contrast(), 2.0 * std::hypot(0.3, 0.1), 1e-12);
}

TEST(Fits, PeakParabolaExactForQuadratic) {
    std::vector<double> x = grid(-5.0, 5.0, 11), y;
    for (double v : x) {
        y.push_back(2.0 - (v - 0.37) * (v - 0.37));
    }
    const auto p = find_peak(x, y);
    EXPECT_NEAR(p.center, 0.37, 1e-12);
    EXPECT_NEAR(p.height, 2.0, 1e-12);
}

TEST(Scan, SweepAxesUseFigureUnits) {
    EXPECT_EQ(sweep_axis(Scenario::dstate_spectrum).second, "kHz");
    EXPECT_EQ(sweep_axis(Scenario::measure_fidelity).second, "rad");
    EXPECT_EQ(sweep_axis(Scenario::ramsey_phase).second, "rad");
    EXPECT_EQ(sweep_axis(Scenario::pump_convergence).second, "count");
    EXPECT_EQ(sweep_axis(Scenario::dress_rotate_error).second, "fraction of nominal");
    for (int s = 0; s < 5; ++s) {
        EXPECT_EQ(scenario_from_string(to_string(static_cast<Scenario>(s))), static_cast<Scenario>(s));
    }
    EXPECT_THROW(scenario_from_string("nope"), std::invalid_argument);
}

TEST(Scan, ValidationRejectsBadSweeps) {
    EXPECT_THROW(spec_for(Scenario::ramsey_phase, {}).validate(), std::invalid_argument);
    EXPECT_THROW(spec_for(Scenario::pump_convergence, {1.5}).validate(), std::invalid_argument);
    EXPECT_THROW(spec_for(Scenario::pump_convergence, {-1.0}).validate(), std::invalid_argument);
    auto s = spec_for(Scenario::ramsey_phase, {0.0});
    s.sweep.parameter = "detuning";
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Scan, SpectrumPeaks) {
    std::vector<double> x;
    for (int k = -20; k <= 70; ++k) {
        x.push_back(k);
    }
    const auto r = run_dstate_spectrum(spec_for(Scenario::dstate_spectrum, x));
    EXPECT_NEAR(r.summary.at("bare_peak_khz"), 0.0, 0.5);
    const double predicted = r.summary.at("predicted_dressed_khz");
    EXPECT_NEAR(r.summary.at("dressed_peak_khz"), predicted, 0.02 * std::abs(predicted));
    EXPECT_LT(r.summary.at("bare_peak_height"), r.summary.at("dressed_peak_height"));
    for (const auto& row : r.values) {
        for (double v : row) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Scan, MeasureFidelityEndpointsAreSpam) {
    auto spec = spec_for(Scenario::measure_fidelity, {0.0, kPi});
    spec.noise = ideal();
    const auto r = run_measure_fidelity(spec);
    EXPECT_NEAR(r.values[0][0], spec.noise.spam_dark_error, 1e-6);
    EXPECT_NEAR(r.values[1][0], 1.0 - spec.noise.spam_bright_error, 1e-6);
}

TEST(Scan, RamseyNoiselessContrastIsOne) {
    auto spec = spec_for(Scenario::ramsey_phase, grid(0.0, kTwoPi, 13));
    spec.noise = ideal();
    const auto r = run_ramsey(spec);
    EXPECT_NEAR(r.summary.at("contrast"), 1.0, 1e-6);
}

TEST(Scan, RamseyAuxStateBarelyMatters) {
    auto spec = spec_for(Scenario::ramsey_phase, grid(0.0, kTwoPi, 13));
    spec.aux_state = 0;
    const double f0 = run_ramsey(spec).summary.at("fidelity");
    spec.aux_state = 1;
    const double f1 = run_ramsey(spec).summary.at("fidelity");
    EXPECT_LT(std::abs(f0 - f1), 0.01);
}

TEST(Scan, PumpConvergenceMonotone) {
    const auto r = run_pump_convergence(spec_for(Scenario::pump_convergence, grid(0.0, 8.0, 9)));
    EXPECT_GT(r.value(0, "aux_error_init0"), 0.99);
    const auto e0 = r.column("aux_error_init0");
    const auto t0 = r.column("aux_dressed_target_init0");
    for (std::size_t i = 1; i < e0.size(); ++i) {
        EXPECT_LE(e0[i], e0[i - 1]);
        EXPECT_GE(t0[i], t0[i - 1]);
    }
}

TEST(Scan, PumpDressedTargetNonDecreasingFromOne) {
    const auto r = run_pump_convergence(spec_for(Scenario::pump_convergence, grid(0.0, 8.0, 9)));
    const auto t1 = r.column("aux_dressed_target_init1");
    for (std::size_t i = 1; i < t1.size(); ++i) {
        EXPECT_GE(t1[i], t1[i - 1]) << "cycle " << r.x[i];
    }
}

TEST(Scan, RotateErrorEndpointsAndContinuity) {
    auto spec = spec_for(Scenario::dress_rotate_error, grid(0.0, 1.2, 1201));
    const auto r = run_dress_rotate_error(spec);
    EXPECT_LT(r.value(0, "xy_error"), 1e-28);
    EXPECT_LT(r.value(1000, "xy_error"), 1e-6);
    const auto e = r.column("xy_error");
    const auto band = r.column("in_green_band");
    EXPECT_EQ(band[900], 1.0);
    EXPECT_EQ(band[1050], 1.0);
    EXPECT_EQ(band[899], 0.0);
    EXPECT_EQ(band[1051], 0.0);
    // dense re-sampling between neighbours bounds the step ratio
    const auto seq = composite::reference_sequence(2);
    for (std::size_t i = 1; i < e.size(); ++i) {
        const double lo = std::min(e[i], e[i - 1]), hi = std::max(e[i], e[i - 1]);
        if (hi < 1e-12) {
            continue;
        }
        if (hi > 10.0 * lo) {
            // a genuine zero crossing shows up as a deeper minimum on a finer grid
            double finer = hi;
            for (int k = 1; k < 20; ++k) {
                const double f = r.x[i - 1] + (r.x[i] - r.x[i - 1]) * k / 20.0;
                finer = std::min(finer, composite::xy_error(composite::sequence_unitary(seq, f),
                                                            composite::target_at_fraction(0.5, f)));
            }
            EXPECT_LT(finer, lo * 1.0001) << r.x[i];
        }
    }
}

TEST(Scan, ExactModeIsBitwiseReproducible) {
    for (auto s : {Scenario::measure_fidelity, Scenario::dress_rotate_error}) {
        auto spec = spec_for(s, grid(0.0, 1.0, 7));
        const auto a = run_scan(spec);
        spec.threads = 3;
        const auto b = run_scan(spec);
        EXPECT_EQ(to_csv(a), to_csv(b));
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    }
}

TEST(Scan, SampledModeReproducibleAndConverges) {
    auto spec = spec_for(Scenario::measure_fidelity, grid(0.0, kPi, 5));
    const auto exact = run_scan(spec);
    spec.shots = 20000;
    spec.seed = 42;
    const auto a = run_scan(spec);
    const auto b = run_scan(spec);
    EXPECT_EQ(to_csv(a), to_csv(b));
    ASSERT_EQ(a.sigma.size(), a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double p = exact.values[i][0];
        const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-6) / static_cast<double>(spec.shots));
        EXPECT_LT(std::abs(a.values[i][0] - p), 4.0 * sigma) << i;
    }
    spec.seed = 43;
    EXPECT_NE(to_csv(run_scan(spec)), to_csv(a));
}

TEST(Scan, WritesNamedFilesWithMetadata) {
    auto spec = spec_for(Scenario::dress_rotate_error, {0.9, 1.0});
    spec.label = "unit";
    const auto r = run_scan(spec);
    const auto dir = (std::filesystem::temp_directory_path() / "mcmr_exp_tests").string();
    const auto [csv, js] = write_result(r, dir);
    EXPECT_EQ(std::filesystem::path(csv).filename(), "dress_rotate_error-unit.csv");
    EXPECT_EQ(std::filesystem::path(js).filename(), "dress_rotate_error-unit.json");
    const auto doc = nlohmann::json::parse(slurp(js));
    EXPECT_EQ(doc.at("metadata").at("schema"), kScanSchema);
    EXPECT_EQ(doc.at("metadata").at("code_version"), kCodeVersion);
    EXPECT_EQ(doc.at("metadata").at("spec_hash").get<std::string>().size(), 16U);
    EXPECT_EQ(doc.at("rows").size(), 2U);
    std::istringstream lines(slurp(csv));
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        ++n;
    }
    EXPECT_EQ(n, 3U);
}
