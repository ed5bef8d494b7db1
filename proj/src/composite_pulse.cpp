#include "mcmr/composite_pulse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "mcmr/dressing.hpp"
#include "mcmr/nelder_mead.hpp"

namespace mcmr::composite {

namespace {

using Mat2 = Eigen::Matrix2cd;

// exp(−iHτ) for H = δ|0⟩⟨0| + (Ω/2)(cos φ σx + sin φ σy).
Mat2 su2_step(double detuning, double rabi, double phase, double tau) {
    const double ax = 0.5 * rabi * std::cos(phase);
    const double ay = 0.5 * rabi * std::sin(phase);
    const double az = 0.5 * detuning;
    const double n = std::sqrt(ax * ax + ay * ay + az * az);
    const double c = std::cos(n * tau);
    const double s = n > 0.0 ? std::sin(n * tau) / n : tau;
    const cplx i(0.0, 1.0);
    Mat2 m;
    m(0, 0) = c - i * s * az;
    m(1, 1) = c + i * s * az;
    m(0, 1) = -i * s * cplx(ax, -ay);
    m(1, 0) = -i * s * cplx(ax, ay);
    return std::polar(1.0, -az * tau) * m;
}

Mat2 target_fast(double ratio, double f) {
    Mat2 u;
    if (f == 0.0 && ratio == 0.0) {
        return Mat2::Identity();
    }
    const double g = std::hypot(f, ratio);
    const double r = ratio / g;
    const double a = std::sqrt(std::max(0.0, 1.0 + r) / 2.0);
    const double b = std::sqrt(std::max(0.0, 1.0 - r) / 2.0);
    u << a, b, b, -a;
    return u;
}

double xy_error_fast(const Mat2& achieved, const Mat2& target) {
    const Mat2 d = target.adjoint() * achieved;
    const Mat2 v = d / std::sqrt(d.determinant());
    const double cx = -0.5 * (v(0, 1) + v(1, 0)).imag();
    const double cy = 0.5 * (v(1, 0) - v(0, 1)).real();
    return cx * cx + cy * cy;
}

double aggregate(const std::vector<double>& values, Aggregation how) {
    if (values.empty()) {
        return 0.0;
    }
    if (how == Aggregation::max) {
        return *std::max_element(values.begin(), values.end());
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

double wrap_phase(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    return w;
}

}  // namespace

void CompositePulse::validate(bool allow_zero_duration) const {
    for (const auto& p : pulses) {
        if (!std::isfinite(p.detuning_ratio) || !std::isfinite(p.duration_product) || !std::isfinite(p.phase)) {
            throw QuantumError("composite pulse: non-finite parameter");
        }
        if (p.duration_product < 0.0 || (!allow_zero_duration && p.duration_product == 0.0)) {
            throw QuantumError("composite pulse: duration product must be positive");
        }
    }
}

double CompositePulse::total_duration_product() const {
    double t = 0.0;
    for (const auto& p : pulses) {
        t += p.duration_product;
    }
    return t;
}

std::vector<double> Band::grid() const {
    std::vector<double> g;
    if (samples == 1) {
        g.push_back(lo);
        return g;
    }
    g.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        g.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1));
    }
    return g;
}

void RobustnessSpec::validate() const {
    for (const Band* b : {&crosstalk, &fluctuation}) {
        if (b->samples == 0 || b->hi < b->lo) {
            throw QuantumError("robustness band is empty");
        }
        if (b->lo < 0.0) {
            throw QuantumError("robustness band fractions must be non-negative");
        }
    }
}

Operator sequence_unitary(const CompositePulse& seq, double rabi, double nominal_rabi) {
    if (rabi < 0.0) {
        throw QuantumError("sequence_unitary: negative Rabi frequency");
    }
    if (!(nominal_rabi > 0.0)) {
        throw QuantumError("sequence_unitary: nominal Rabi frequency must be positive");
    }
    CMatrix u = CMatrix::Identity(2, 2);
    for (const auto& p : seq.pulses) {
        const CMatrix h = dressing::two_level_hamiltonian(rabi, p.detuning_ratio * nominal_rabi, p.phase);
        u = unitary_propagator(h, p.duration_product / nominal_rabi) * u;
    }
    return Operator(std::move(u), Operator::unitary);
}

Eigen::Matrix2cd sequence_unitary_fast(const CompositePulse& seq, double rabi_fraction) {
    Mat2 u = Mat2::Identity();
    for (const auto& p : seq.pulses) {
        u = su2_step(p.detuning_ratio, rabi_fraction, p.phase, p.duration_product) * u;
    }
    return u;
}

Operator target_at_fraction(double nominal_detuning_ratio, double rabi_fraction) {
    if (rabi_fraction == 0.0 && nominal_detuning_ratio == 0.0) {
        return Operator(CMatrix::Identity(2, 2), Operator::unitary);
    }
    return dressing::target_basis_rotation({rabi_fraction, nominal_detuning_ratio});
}

double xy_error(const Operator& achieved, const Operator& target) {
    if (achieved.dim() != 2 || target.dim() != 2 || !achieved.is_unitary() || !target.is_unitary()) {
        throw QuantumError("xy_error: inputs must be 2x2 unitaries");
    }
    const auto c = pauli_coefficients(target.matrix().adjoint() * achieved.matrix());
    return c[1] * c[1] + c[2] * c[2];
}

double xy_rotation_error(const Operator& achieved, const Operator& target) {
    if (achieved.dim() != 2 || target.dim() != 2) {
        throw QuantumError("xy_rotation_error: inputs must be 2x2 unitaries");
    }
    const auto v = rotation_vector(target.adjoint() * achieved);
    return std::hypot(v[0], v[1]);
}

ErrorReport evaluate(const CompositePulse& seq, const RobustnessSpec& spec) {
    return evaluate(seq, spec, [&](double f) { return target_at_fraction(seq.nominal_detuning_ratio, f); });
}

ErrorReport evaluate(const CompositePulse& seq, const RobustnessSpec& spec,
                     const std::function<Operator(double)>& target) {
    spec.validate();
    ErrorReport report;
    for (const bool crosstalk : {true, false}) {
        const Band& band = crosstalk ? spec.crosstalk : spec.fluctuation;
        std::vector<double> errors;
        for (const double f : band.grid()) {
            const double e = xy_error(sequence_unitary(seq, f), target(f));
            errors.push_back(e);
            report.per_sample.push_back({f, crosstalk, e});
        }
        (crosstalk ? report.e0 : report.e1) = aggregate(errors, spec.aggregation);
    }
    return report;
}

CompositePulse time_reversal(const CompositePulse& seq) {
    CompositePulse out;
    out.nominal_detuning_ratio = seq.nominal_detuning_ratio;
    for (std::size_t k = 0; k < 3; ++k) {
        const PulseStep& p = seq.pulses[2 - k];
        out.pulses[k] = {-p.detuning_ratio, p.duration_product, wrap_phase(p.phase + kPi)};
    }
    const CMatrix check = sequence_unitary(out, 1.0).matrix() * sequence_unitary(seq, 1.0).matrix();
    const auto c = pauli_coefficients(check);
    if (std::abs(c[0] - 1.0) > 1e-10) {
        throw QuantumError("time_reversal: reversed sequence is not the inverse");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Optimization

namespace {

struct Objective {
    double ratio;
    std::vector<double> crosstalk_grid;
    std::vector<double> fluctuation_grid;
    std::vector<Mat2> crosstalk_targets;
    std::vector<Mat2> fluctuation_targets;
    Aggregation aggregation;
    double w0;
    double w1;

    Objective(double r, const RobustnessSpec& spec, double w0_, double w1_)
        : ratio(r),
          crosstalk_grid(spec.crosstalk.grid()),
          fluctuation_grid(spec.fluctuation.grid()),
          aggregation(spec.aggregation),
          w0(w0_),
          w1(w1_) {
        for (double f : crosstalk_grid) {
            crosstalk_targets.push_back(target_fast(ratio, f));
        }
        for (double f : fluctuation_grid) {
            fluctuation_targets.push_back(target_fast(ratio, f));
        }
    }

    static CompositePulse decode(const std::vector<double>& x, double ratio) {
        CompositePulse seq;
        seq.nominal_detuning_ratio = ratio;
        for (std::size_t k = 0; k < 3; ++k) {
            seq.pulses[k] = {x[3 * k], std::abs(x[3 * k + 1]), wrap_phase(x[3 * k + 2])};
        }
        return seq;
    }

    double band_error(const CompositePulse& seq, const std::vector<double>& grid,
                      const std::vector<Mat2>& targets) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double e = xy_error_fast(sequence_unitary_fast(seq, grid[k]), targets[k]);
            acc = aggregation == Aggregation::max ? std::max(acc, e) : acc + e;
        }
        return aggregation == Aggregation::max ? acc : acc / static_cast<double>(grid.size());
    }

    double operator()(const std::vector<double>& x) const {
        const CompositePulse seq = decode(x, ratio);
        return w0 * band_error(seq, crosstalk_grid, crosstalk_targets) +
               w1 * band_error(seq, fluctuation_grid, fluctuation_targets);
    }
};

struct RestartOutcome {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
};

RestartOutcome run_restart(const Objective& objective, std::uint64_t seed, std::size_t index,
                           const OptimizeOptions& options) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x6d636d72u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> detuning(-2.0, 2.0);
    std::uniform_real_distribution<double> duration(1.0, 8.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    std::vector<double> x(9);
    for (std::size_t k = 0; k < 3; ++k) {
        x[3 * k] = detuning(rng);
        x[3 * k + 1] = duration(rng);
        x[3 * k + 2] = phase(rng);
    }
    const std::vector<double> scales{0.3, 1.0, 1.0, 0.3, 1.0, 1.0, 0.3, 1.0, 1.0};

    optim::NelderMeadOptions nm;
    nm.max_evaluations = options.evaluations_per_restart;
    nm.initial_step = 0.5;
    auto fn = [&objective](const std::vector<double>& v) { return objective(v); };
    optim::NelderMeadResult best = optim::nelder_mead(fn, x, nm, scales);
    // Re-seed the simplex around the incumbent; collapsed simplices stall on the
    // non-smooth max aggregation.
    double step = 0.05;
    for (std::size_t r = 0; r < options.polish_rounds; ++r) {
        nm.initial_step = step;
        auto polished = optim::nelder_mead(fn, best.x, nm, scales);
        if (polished.value <= best.value) {
            best = std::move(polished);
        }
        step *= 0.2;
    }
    return {best.x, best.value};
}

}  // namespace

OptimizeResult optimize(double nominal_detuning_ratio, const RobustnessSpec& spec, std::uint64_t seed,
                        const OptimizeOptions& options) {
    spec.validate();
    if (options.restarts == 0) {
        throw QuantumError("optimize: budget must be positive");
    }
    const Objective objective(nominal_detuning_ratio, spec, options.weight_crosstalk, options.weight_fluctuation);

    std::vector<RestartOutcome> outcomes(options.restarts);
    std::vector<char> done(options.restarts, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t index = next.fetch_add(1);
            if (index >= options.restarts || stop.load()) {
                return;
            }
            RestartOutcome outcome = run_restart(objective, seed, index, options);
            const bool good = outcome.value <= options.threshold;
            std::lock_guard<std::mutex> lock(mutex);
            outcomes[index] = std::move(outcome);
            done[index] = 1;
            if (options.stop_at_threshold && good) {
                stop.store(true);
            }
        }
    };

    const unsigned threads = std::max(1u, options.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    // With early stopping the result must not depend on scheduling: keep only the
    // contiguous prefix of completed restarts up to the first success.
    std::size_t limit = options.restarts;
    if (options.stop_at_threshold) {
        for (std::size_t k = 0; k < options.restarts; ++k) {
            if (!done[k]) {
                limit = k;
                break;
            }
            if (outcomes[k].value <= options.threshold) {
                limit = k + 1;
                break;
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < limit; ++k) {
        if (outcomes[k].value < outcomes[best].value) {
            best = k;
        }
    }

    OptimizeResult result;
    result.sequence = Objective::decode(outcomes[best].x, nominal_detuning_ratio);
    result.report = evaluate(result.sequence, spec);
    result.combined = result.report.combined(options.weight_crosstalk, options.weight_fluctuation);
    result.best_restart = best;
    result.restarts_run = limit;
    result.reached_threshold = result.combined <= options.threshold;
    return result;
}

CompositePulse reference_sequence(int index) {
    CompositePulse seq;
    if (index == 1) {
        seq.nominal_detuning_ratio = 0.1;
        seq.pulses = {PulseStep{0.066045984, 6.101, 4.697118972032}, PulseStep{1.738387469, 3.372, 0.0},
                      PulseStep{-0.304962921, 7.47, 2.106261199596}};
    } else if (index == 2) {
        seq.nominal_detuning_ratio = 0.5;
        seq.pulses = {PulseStep{0.865404511, 2.482, 5.922001257829}, PulseStep{-0.467035375, 5.03, 3.710143207203},
                      PulseStep{0.087101714, 4.478, 0.56914785185}};
    } else {
        throw QuantumError("reference_sequence: index must be 1 or 2");
    }
    return seq;
}

}  // namespace mcmr::composite
