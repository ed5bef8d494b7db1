#include <gtest/gtest.h>

#include <cmath>

#include "mcmr/ion_model.hpp"

using namespace mcmr;
using namespace mcmr::ion;

namespace {

const LevelScheme& yb() {
    static const LevelScheme s = LevelScheme::ytterbium171();
    return s;
}

NoiseModel quiet() {
    NoiseModel n;
    n.d_lifetime = 1e12;
    n.t2_optical = 2e12;
    n.crosstalk_fraction = 0.0;
    return n;
}

}  // namespace

TEST(IonModel, YtterbiumSchemeLayout) {
    const auto& s = yb();
    EXPECT_EQ(s.size(), 8U);
    EXPECT_EQ(s.index(ids::q0), 0U);
    EXPECT_EQ(s.index(ids::q1), 1U);
    EXPECT_EQ(s.manifold_levels(Manifold::d_metastable).size(), 3U);
    EXPECT_EQ(s.bright_levels().size(), 3U);
    EXPECT_NEAR(s.transition_offset(s.transition(ids::pump_m)), kTwoPi * (-5e6 - 0.0), 1e-6);
    EXPECT_EQ(s.transition(ids::shelve_f0).family, s.transition(ids::shelve_f0).family);
    EXPECT_NE(s.transition(ids::shelve_f0).family, s.transition(ids::shelve_f1).family);
    EXPECT_THROW(s.index("nope"), std::invalid_argument);
}

TEST(IonModel, SchemeValidationRejectsDanglingTransitions) {
    std::vector<Level> levels = {{"a", Manifold::s_ground, 0, 0, 0.0}, {"b", Manifold::s_ground, 1, 0, 0.0}};
    std::vector<Transition> bad = {{"t", "a", "zz", TransitionKind::raman_qubit, true, ""}};
    EXPECT_THROW(LevelScheme(levels, bad), std::invalid_argument);
    std::vector<Level> dup = {levels[0], levels[0]};
    EXPECT_THROW(LevelScheme(dup, {}), std::invalid_argument);
}

TEST(IonModel, BlackmanAreaFactorMatchesQuadrature) {
    const int n = 200000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        sum += envelope(Shape::blackman, (k + 0.5) / n, 1.0);
    }
    EXPECT_NEAR(sum / n, envelope_area_factor(Shape::blackman), 1e-9);
    EXPECT_NEAR(envelope_area_factor(Shape::blackman), 0.42, 1e-15);
    EXPECT_EQ(envelope_area_factor(Shape::rectangular), 1.0);
}

TEST(IonModel, ResonantRamanPiFlipsQubit) {
    const double rabi = kTwoPi * 100e3;
    const Pulse p{ids::raman, rabi, 0.0, 0.0, kPi / rabi, Shape::rectangular, Target::individual(0)};
    const auto h = build_drive_hamiltonian(yb(), p);
    const auto out = propagate_unitary(QuantumState::basis(8, 0), h, p.duration);
    EXPECT_NEAR(out.population(1), 1.0, 1e-12);
}

TEST(IonModel, OpticalToneDrivesWholeFamilyAtZeemanDetunings) {
    const double rabi = kTwoPi * 10e3;
    const Pulse p{ids::pump_m, rabi, 0.0, 0.0, 1e-5, Shape::rectangular, Target::all()};
    const CMatrix h = build_drive_hamiltonian(yb(), p).matrix();
    const auto s1 = yb().index(ids::q1), s1m = yb().index(ids::q2), dm = yb().index(ids::dm);
    const auto d0 = yb().index(ids::d0);
    EXPECT_NEAR(std::abs(h(dm, s1m)), 0.5 * rabi, 1e-9);
    EXPECT_NEAR(h(dm, dm).real(), 0.0, 1e-6);
    // |1⟩ ↔ D0 is in the same family and sits 5 MHz away from the tone
    EXPECT_NEAR(std::abs(h(d0, s1)), 0.5 * rabi, 1e-9);
    EXPECT_NEAR(std::abs(h(d0, d0).real()), kTwoPi * 5e6, 1e-3);
    EXPECT_NEAR(std::abs(h(0, 0)), 0.0, 1e-15);
}

TEST(IonModel, NoiseValidation) {
    NoiseModel n;
    EXPECT_NO_THROW(n.validate());
    EXPECT_NEAR(n.dephasing_rate(), 2.0 / 10e-3 - 1.0 / 15e-3, 1e-9);
    n.t2_optical = 40e-3;
    EXPECT_THROW(n.validate(), std::invalid_argument);
    n = NoiseModel{};
    n.spam_dark_error = 1.5;
    EXPECT_THROW(n.validate(), std::invalid_argument);
    n.spam_dark_error = 0.6;
    EXPECT_NO_THROW(n.validate());
    n.spam_bright_error = 0.5;
    EXPECT_THROW(n.validate(), std::invalid_argument);
    n = NoiseModel{};
    n.crosstalk_fraction = -0.1;
    EXPECT_THROW(n.validate(), std::invalid_argument);
}

TEST(IonModel, DPopulationDecaysWithLifetime) {
    NoiseModel n;
    const auto d0 = yb().index(ids::d0);
    const double t = 1e-3;
    const auto out = apply_noise_window(QuantumState::basis(8, d0), yb(), n, t);
    double d = 0.0;
    for (auto i : yb().manifold_levels(Manifold::d_metastable)) {
        d += out.population(i);
    }
    EXPECT_NEAR(d, std::exp(-t / n.d_lifetime), 1e-9);
    double bright = 0.0;
    for (auto i : yb().bright_levels()) {
        bright += out.population(i);
    }
    EXPECT_NEAR(bright, 1.0 - d, 1e-9);
}

TEST(IonModel, SdCoherenceDecaysAtOpticalT2) {
    NoiseModel n;
    const auto d0 = yb().index(ids::d0);
    CVector psi = CVector::Zero(8);
    psi(0) = psi(d0) = 1.0 / std::sqrt(2.0);
    const double t = 2e-3;
    const auto out = apply_noise_window(QuantumState::pure(psi), yb(), n, t);
    EXPECT_NEAR(std::abs(out.coherence(0, d0)), 0.5 * std::exp(-t / n.t2_optical), 1e-9);
}

TEST(IonModel, StaticSdDetuningOnlyDuringDetection) {
    NoiseModel n = quiet();
    n.sd_detuning = kTwoPi * 1e3;
    const auto d0 = yb().index(ids::d0);
    CVector psi = CVector::Zero(8);
    psi(0) = psi(d0) = 1.0 / std::sqrt(2.0);
    const auto s = QuantumState::pure(psi);
    const auto idle = apply_noise_window(s, yb(), n, 100e-6, false);
    const auto det = apply_noise_window(s, yb(), n, 100e-6, true);
    EXPECT_NEAR(std::arg(idle.coherence(0, d0)), 0.0, 1e-9);
    EXPECT_NEAR(std::arg(det.coherence(0, d0)), n.sd_detuning * 100e-6, 1e-7);
}

TEST(IonModel, DetectionPovm) {
    NoiseModel n;
    const auto one = detect(QuantumState::basis(8, 1), yb(), n);
    EXPECT_NEAR(one.p_bright, 1.0 - n.spam_bright_error, 1e-15);
    const auto zero = detect(QuantumState::basis(8, 0), yb(), n);
    EXPECT_NEAR(zero.p_bright, n.spam_dark_error, 1e-15);
    const auto dee = detect(QuantumState::basis(8, yb().index(ids::d0)), yb(), n);
    EXPECT_NEAR(dee.p_bright, n.spam_dark_error, 1e-15);

    CVector psi = CVector::Zero(8);
    psi(0) = std::sqrt(0.3);
    psi(1) = std::sqrt(0.7);
    const auto sup = detect(QuantumState::pure(psi), yb(), n);
    EXPECT_NEAR(sup.p_bright, 0.7 * (1.0 - n.spam_bright_error) + 0.3 * n.spam_dark_error, 1e-15);
    // bright/dark cross terms are destroyed
    EXPECT_NEAR(std::abs(sup.unconditional.coherence(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(sup.unconditional.population(1), 0.7, 1e-14);
    ASSERT_TRUE(sup.bright_state.has_value());
    EXPECT_GT(sup.bright_state->population(1), 0.99);
}

TEST(IonModel, RepumpBranchesUniformlyIntoBrightSublevels) {
    const auto ch = build_repump_dissipator(yb());
    LindbladSystem sys{Operator(CMatrix::Zero(8, 8), Operator::hermitian), ch};
    const auto out = propagate_lindblad(QuantumState::basis(8, yb().index(ids::d0)), sys, 100e-6, 1e-7);
    for (auto i : yb().bright_levels()) {
        EXPECT_NEAR(out.population(i), 1.0 / 3.0, 1e-6);
    }
    const auto from_m = propagate_lindblad(QuantumState::basis(8, yb().index(ids::dm)), sys, 100e-6, 1e-7);
    EXPECT_NEAR(from_m.population(yb().index(ids::q2)) + from_m.population(yb().index(ids::q1)), 1.0, 1e-6);
}

TEST(IonModel, PhaseCorrectedFidelityIgnoresZRotation) {
    const double h = 1.0 / std::sqrt(2.0);
    const auto rotated = qubit_state(yb(), h, std::polar(h, 0.8));
    EXPECT_NEAR(phase_corrected_fidelity(rotated, yb(), h, h), 1.0, 1e-14);
    EXPECT_NEAR(fidelity(rotated, qubit_state(yb(), h, h)), std::pow(std::cos(0.4), 2), 1e-14);
}

TEST(IonModel, PulseValidation) {
    Pulse p{ids::raman, 1.0, 0.0, 0.0, -1.0, Shape::rectangular, Target::all()};
    EXPECT_THROW(p.validate(yb()), std::invalid_argument);
    p.duration = 1.0;
    p.drive = "missing";
    EXPECT_THROW(p.validate(yb()), std::invalid_argument);
}
