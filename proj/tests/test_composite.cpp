#include <gtest/gtest.h>

#include <random>

#include "mcmr/composite_pulse.hpp"
#include "mcmr/dressing.hpp"

using namespace mcmr;
using namespace mcmr::composite;

namespace {

CompositePulse random_sequence(std::mt19937_64& rng, double ratio) {
    std::uniform_real_distribution<double> d(-2.0, 2.0), t(0.5, 8.0), p(0.0, kTwoPi);
    CompositePulse s;
    s.nominal_detuning_ratio = ratio;
    for (auto& step : s.pulses) {
        step = {d(rng), t(rng), p(rng)};
    }
    return s;
}

Operator rz(double a) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -a / 2);
    m(1, 1) = std::polar(1.0, a / 2);
    return Operator(m, Operator::unitary);
}

}  // namespace

TEST(Composite, FastAndGeneralUnitariesAgree) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sequence(rng, 0.3);
        for (double f : {0.0, 0.03, 0.9, 1.0, 1.07}) {
            const CMatrix a = sequence_unitary(s, f).matrix();
            const CMatrix b = sequence_unitary_fast(s, f);
            EXPECT_LT(max_abs(a - b), 1e-12);
        }
    }
}

TEST(Composite, XyErrorInvariantUnderGlobalPhaseAndTargetZFrame) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(0.0, kTwoPi);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sequence(rng, 0.5);
        const Operator u = sequence_unitary(s, 0.97);
        const Operator t = target_at_fraction(0.5, 0.97);
        const double e = xy_error(u, t);
        const Operator phased(u.matrix() * std::polar(1.0, a(rng)), Operator::unitary);
        EXPECT_NEAR(xy_error(phased, t), e, 1e-13);
        EXPECT_NEAR(xy_error(u, t * rz(a(rng))), e, 1e-13);
    }
}

TEST(Composite, TargetAtZeroFractionIsIdentityUpToZ) {
    const Operator id(CMatrix::Identity(2, 2), Operator::unitary);
    EXPECT_NEAR(xy_error(id, target_at_fraction(0.5, 0.0)), 0.0, 1e-30);
    EXPECT_NEAR(xy_error(id, target_at_fraction(0.0, 0.0)), 0.0, 1e-30);
}

TEST(Composite, TargetMatchesNeighbourDressedBasis) {
    const double f = 0.04;
    const Operator t = target_at_fraction(0.1, f);
    const auto b = dressing::dressed_basis({f, 0.1});
    EXPECT_LT((t.matrix().col(0) - b.psi_plus).norm(), 1e-14);
}

TEST(Composite, TimeReversalIsInvolutionAndInverse) {
    const auto seq = reference_sequence(2);
    const auto rev = time_reversal(seq);
    const auto twice = time_reversal(rev);
    EXPECT_LT(max_abs(sequence_unitary(twice, 1.0).matrix() - sequence_unitary(seq, 1.0).matrix()), 1e-12);
    for (double f : {1.0, 0.95, 0.02}) {
        const CMatrix round = sequence_unitary(rev, f).matrix() * sequence_unitary(seq, f).matrix();
        const auto c = pauli_coefficients(round);
        EXPECT_NEAR(c[0], 1.0, 1e-10) << f;
    }
}

TEST(Composite, ReversedRoundTripWithinTwiceSinglePassBound) {
    const auto seq = reference_sequence(2);
    const auto rev = time_reversal(seq);
    const double f = 0.95;
    const Operator id(CMatrix::Identity(2, 2), Operator::unitary);
    const double single = xy_rotation_error(sequence_unitary(seq, f), target_at_fraction(0.5, f));
    const Operator round(sequence_unitary(rev, f).matrix() * sequence_unitary(seq, f).matrix(), Operator::unitary);
    EXPECT_LE(xy_rotation_error(round, id), 2.0 * single + 1e-12);
}

TEST(Composite, EvaluateIsMonotoneUnderBandWidening) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const auto s = random_sequence(rng, 0.5);
        RobustnessSpec narrow;
        narrow.crosstalk = {0.0, 0.04, 5};
        narrow.fluctuation = {0.95, 1.0, 6};
        RobustnessSpec wide;
        wide.crosstalk = {0.0, 0.08, 9};
        wide.fluctuation = {0.90, 1.05, 16};
        const auto a = evaluate(s, narrow);
        const auto b = evaluate(s, wide);
        EXPECT_GE(b.e0, a.e0);
        EXPECT_GE(b.e1, a.e1);
    }
}

TEST(Composite, SecondReferenceSequenceBelowMicroErrorAcrossFluctuationBand) {
    const auto seq = reference_sequence(2);
    for (int k = 0; k <= 150; ++k) {
        const double f = 0.90 + 0.001 * k;
        EXPECT_LE(xy_error(sequence_unitary(seq, f), target_at_fraction(0.5, f)), 1e-6) << f;
    }
}

TEST(Composite, EvaluateReportsEverySample) {
    const auto r = evaluate(reference_sequence(1), RobustnessSpec{});
    EXPECT_EQ(r.per_sample.size(), 42U);
    double worst = 0.0;
    for (const auto& s : r.per_sample) {
        if (!s.crosstalk_band) {
            worst = std::max(worst, s.xy_error);
        }
    }
    EXPECT_EQ(worst, r.e1);
}

TEST(Composite, MeanAggregationNeverExceedsMax) {
    RobustnessSpec mean;
    mean.aggregation = Aggregation::mean;
    const auto a = evaluate(reference_sequence(1), RobustnessSpec{});
    const auto b = evaluate(reference_sequence(1), mean);
    EXPECT_LE(b.e0, a.e0);
    EXPECT_LE(b.e1, a.e1);
}

TEST(Composite, OptimizerDeterministicAcrossRunsAndThreads) {
    OptimizeOptions o;
    o.restarts = 3;
    o.evaluations_per_restart = 600;
    o.polish_rounds = 1;
    const auto a = optimize(0.5, RobustnessSpec{}, 7, o);
    const auto b = optimize(0.5, RobustnessSpec{}, 7, o);
    o.threads = 3;
    const auto c = optimize(0.5, RobustnessSpec{}, 7, o);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(a.sequence.pulses[k].detuning_ratio, b.sequence.pulses[k].detuning_ratio);
        EXPECT_EQ(a.sequence.pulses[k].duration_product, b.sequence.pulses[k].duration_product);
        EXPECT_EQ(a.sequence.pulses[k].phase, c.sequence.pulses[k].phase);
    }
    EXPECT_EQ(a.combined, c.combined);
    EXPECT_EQ(a.best_restart, c.best_restart);
}

TEST(Composite, ValidationRejectsBadParameters) {
    auto s = reference_sequence(1);
    s.pulses[1].duration_product = -1.0;
    EXPECT_THROW(s.validate(), QuantumError);
    s.pulses[1].duration_product = 0.0;
    EXPECT_THROW(s.validate(), QuantumError);
    EXPECT_NO_THROW(s.validate(true));
    s.pulses[0].phase = std::nan("");
    EXPECT_THROW(s.validate(true), QuantumError);
    EXPECT_THROW(reference_sequence(3), QuantumError);
}
