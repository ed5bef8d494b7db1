#include <gtest/gtest.h>

#include <cmath>

#include "mcmr/compiler.hpp"
#include "mcmr/serialization.hpp"

using namespace mcmr;
using namespace mcmr::compiler;

namespace {

const ion::LevelScheme& yb() {
    static const ion::LevelScheme s = ion::LevelScheme::ytterbium171();
    return s;
}

SimulationOptions noiseless() {
    SimulationOptions o;
    o.noiseless = true;
    return o;
}

ion::NoiseModel quiet() {
    ion::NoiseModel n;
    n.d_lifetime = 1e12;
    n.t2_optical = 2e12;
    n.crosstalk_fraction = 0.0;
    return n;
}

MCMRProgram measure_program(Method m = Method::shelving_qubit_rotation) {
    MCMRProgram p;
    p.directive = Directive::mid_circuit_measure;
    p.method = m;
    p.roles = {ion::Role::data, ion::Role::auxiliary};
    if (m == Method::shelving_dressing) {
        p.dressing = dressing::DressingParams{kTwoPi * 100e3, kTwoPi * 10e3, dressing::Regime::shelving};
    }
    return p;
}

MCMRProgram reset_program(std::size_t cycles) {
    MCMRProgram p;
    p.directive = Directive::mid_circuit_reset;
    p.method = Method::hands_off;
    p.roles = {ion::Role::data, ion::Role::auxiliary};
    p.dressing = dressing::DressingParams{kTwoPi * 100e3, kTwoPi * 50e3, dressing::Regime::hands_off};
    p.pump_cycles = cycles;
    return p;
}

std::vector<std::pair<cplx, cplx>> tomography_set() {
    const double h = 1.0 / std::sqrt(2.0);
    return {{1.0, 0.0}, {0.0, 1.0}, {h, h}, {h, -h}, {h, cplx(0.0, h)}, {h, cplx(0.0, -h)}};
}

ion::IonRegister two(const QuantumState& data, const QuantumState& aux) {
    return {yb(), {{ion::Role::data, data}, {ion::Role::auxiliary, aux}}};
}

double d_population(const QuantumState& s) {
    double p = 0.0;
    for (auto i : yb().manifold_levels(ion::Manifold::d_metastable)) {
        p += s.population(i);
    }
    return p;
}

void expect_json_close(const io::json& a, const io::json& b, const std::string& path) {
    ASSERT_EQ(a.type(), b.type()) << path;
    if (a.is_number_float() || b.is_number_float()) {
        const double x = a.get<double>(), y = b.get<double>();
        EXPECT_NEAR(x, y, 1e-12 * std::max(1.0, std::abs(y))) << path;
    } else if (a.is_object()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (auto it = b.begin(); it != b.end(); ++it) {
            ASSERT_TRUE(a.contains(it.key())) << path << "/" << it.key();
            expect_json_close(a.at(it.key()), it.value(), path + "/" + it.key());
        }
    } else if (a.is_array()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (std::size_t i = 0; i < a.size(); ++i) {
            expect_json_close(a[i], b[i], path + "/" + std::to_string(i));
        }
    } else {
        EXPECT_EQ(a, b) << path;
    }
}

}  // namespace

TEST(Compiler, QubitRotationMeasureStructure) {
    const auto s = compile(measure_program(), yb(), ion::NoiseModel{});
    ASSERT_EQ(s.items.size(), 7U);
    const std::vector<Purpose> expected = {Purpose::shelve, Purpose::shelve,   Purpose::detect,  Purpose::echo,
                                           Purpose::detect, Purpose::unshelve, Purpose::unshelve};
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_EQ(s.items[i].purpose, expected[i]) << i;
    }
    EXPECT_EQ(s.items[2].kind, ItemKind::detection);
    EXPECT_NEAR(s.items[2].duration, 70e-6, 1e-15);
    EXPECT_NEAR(s.items[4].duration, 70e-6, 1e-15);
    EXPECT_NEAR(s.items[0].duration + s.items[1].duration, 26e-6, 1e-15);
    EXPECT_EQ(s.items[2].measured, std::vector<std::size_t>{1});
}

TEST(Compiler, ShelvingRoundTripOnTomographySet) {
    for (auto m : {Method::shelving_qubit_rotation, Method::shelving_dressing}) {
        const auto s = compile(measure_program(m), yb(), quiet());
        for (const auto& [a, b] : tomography_set()) {
            const auto data = ion::qubit_state(yb(), a, b);
            const auto r = simulate_schedule(s, two(data, ion::qubit_state(yb(), 1.0, 0.0)), quiet(), noiseless());
            EXPECT_GT(fidelity(r.reg.ions[0].state, data), 1.0 - 1e-9) << static_cast<int>(m);
        }
    }
}

TEST(Compiler, AuxiliaryMapping) {
    const ion::NoiseModel n = quiet();
    const auto s = compile(measure_program(), yb(), n);
    const auto d = ion::qubit_state(yb(), 1.0, 0.0);
    const auto dark = simulate_schedule(s, two(d, ion::qubit_state(yb(), 1.0, 0.0)), n, noiseless());
    const auto bright = simulate_schedule(s, two(d, ion::qubit_state(yb(), 0.0, 1.0)), n, noiseless());
    EXPECT_NEAR(dark.records.at(0).p_bright, n.spam_dark_error, 1e-6);
    EXPECT_NEAR(bright.records.at(0).p_bright, 1.0 - n.spam_bright_error, 1e-6);
}

TEST(Compiler, OutcomeIndependentOfDataState) {
    for (auto m : {Method::shelving_qubit_rotation, Method::shelving_dressing}) {
        const auto s = compile(measure_program(m), yb(), ion::NoiseModel{});
        for (int aux = 0; aux < 2; ++aux) {
            const auto a = ion::qubit_state(yb(), aux == 0 ? 1.0 : 0.0, aux == 1 ? 1.0 : 0.0);
            std::vector<double> p;
            for (const auto& [x, y] : tomography_set()) {
                p.push_back(simulate_schedule(s, two(ion::qubit_state(yb(), x, y), a), ion::NoiseModel{}, noiseless())
                                .records.at(0)
                                .p_bright);
            }
            const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
            EXPECT_LT(*hi - *lo, 1e-9);
        }
    }
}

TEST(Compiler, EchoLeavesBrightAuxiliaryUntouched) {
    const auto s = compile(measure_program(), yb(), ion::NoiseModel{});
    const auto one = ion::qubit_state(yb(), 0.0, 1.0);
    const auto out = simulate_ion(s, 3, 4, 1, one, yb(), ion::NoiseModel{}, true);
    EXPECT_EQ(out.population(1), 1.0);
}

TEST(Compiler, EchoCancelsStaticSdDetuning) {
    const double h = 1.0 / std::sqrt(2.0);
    auto phase = [&](bool echo, double sd) {
        ion::NoiseModel n = quiet();
        n.sd_detuning = sd;
        auto p = measure_program();
        p.echo = echo;
        const auto s = compile(p, yb(), n);
        const auto r = simulate_schedule(s, two(ion::qubit_state(yb(), h, h), ion::qubit_state(yb(), 1.0, 0.0)), n);
        return std::arg(ion::qubit_block(r.reg.ions[0].state, yb())(1, 0));
    };
    const double sd = kTwoPi * 1e3;
    const double with_echo = std::remainder(phase(true, sd) - phase(true, 0.0), kTwoPi);
    const double without = std::remainder(phase(false, sd) - phase(false, 0.0), kTwoPi);
    EXPECT_LT(std::abs(with_echo), 1e-6);
    EXPECT_NEAR(std::abs(without), sd * 140e-6, 0.01 * sd * 140e-6);
}

TEST(Compiler, IndividualShelveSingleIon) {
    const auto s = compile_individual_shelve(0, 1, yb());
    ASSERT_EQ(s.items.size(), 1U);
    EXPECT_TRUE(s.items[0].drives.at(0).target.global);
}

TEST(Compiler, IndividualShelveShelvesOnlyTarget) {
    for (std::size_t n : {2U, 3U}) {
        for (std::size_t target = 0; target < n; ++target) {
            const auto s = compile_individual_shelve(target, n, yb());
            const auto zero = ion::qubit_state(yb(), 1.0, 0.0);
            const auto t = simulate_ion(s, 0, s.items.size(), target, zero, yb(), quiet(), true);
            EXPECT_GT(d_population(t), 1.0 - 1e-9);
            for (std::size_t other = 0; other < n; ++other) {
                if (other == target) {
                    continue;
                }
                for (const auto& [a, b] : tomography_set()) {
                    const auto in = ion::qubit_state(yb(), a, b);
                    const auto out = simulate_ion(s, 0, s.items.size(), other, in, yb(), quiet(), true);
                    EXPECT_GT(fidelity(out, in), 1.0 - 1e-9);
                }
            }
        }
    }
    EXPECT_THROW(compile_individual_shelve(2, 2, yb()), std::invalid_argument);
    EXPECT_THROW(compile_individual_shelve(0, 0, yb()), std::invalid_argument);
}

TEST(Compiler, HandsOffStructureAndPreconditions) {
    const auto s = compile(reset_program(3), yb(), ion::NoiseModel{});
    EXPECT_EQ(s.items.size(), 3U + 4U * 3U + 3U);
    EXPECT_EQ(s.items.front().purpose, Purpose::rotate_in);
    EXPECT_EQ(s.items.back().purpose, Purpose::rotate_out);
    EXPECT_EQ(s.items[6].kind, ItemKind::repump);
    // auxiliary dressing stays on through every pump item
    for (std::size_t i = 3; i < 15; ++i) {
        bool dressed = false;
        for (const auto& d : s.items[i].drives) {
            dressed |= d.drive == ion::ids::raman && !d.target.global && d.target.ion == 1;
        }
        EXPECT_TRUE(dressed) << i;
    }
    EXPECT_THROW(compile(reset_program(0), yb(), ion::NoiseModel{}), std::invalid_argument);
    auto missing = reset_program(4);
    missing.dressing.reset();
    EXPECT_THROW(compile(missing, yb(), ion::NoiseModel{}), std::invalid_argument);
    auto no_aux = measure_program();
    no_aux.roles = {ion::Role::data};
    EXPECT_THROW(compile(no_aux, yb(), ion::NoiseModel{}), std::invalid_argument);
    auto undressed = measure_program(Method::shelving_dressing);
    undressed.dressing.reset();
    EXPECT_THROW(compile(undressed, yb(), ion::NoiseModel{}), std::invalid_argument);
}

TEST(Compiler, HandsOffLeavesDataUntouchedWithoutCrosstalk) {
    ion::NoiseModel n;
    n.crosstalk_fraction = 0.0;
    const auto s = compile(reset_program(16), yb(), n);
    const double h = 1.0 / std::sqrt(2.0);
    const auto out = simulate_ion(s, 0, s.items.size(), 0, ion::qubit_state(yb(), h, h), yb(), n, false);
    EXPECT_GT(ion::phase_corrected_fidelity(out, yb(), h, h), 1.0 - 1e-6);
}

TEST(Compiler, EmptyScheduleAndZeroCrosstalk) {
    Schedule empty;
    empty.n_ions = 2;
    empty.x_frame = {false, false};
    const auto reg = two(ion::qubit_state(yb(), 0.6, 0.8), ion::qubit_state(yb(), 1.0, 0.0));
    const auto r = simulate_schedule(empty, reg, ion::NoiseModel{});
    EXPECT_LT(max_abs(r.reg.ions[0].state.density() - reg.ions[0].state.density()), 1e-15);
    EXPECT_TRUE(r.records.empty());

    Schedule one = empty;
    ScheduleItem item;
    item.kind = ItemKind::coherent;
    item.purpose = Purpose::shelve;
    item.duration = kPi / yb().controls.raman_rabi;
    item.drives = {raman_pi(yb(), 0.0, 0)};
    one.items = {item};
    const auto r1 = simulate_schedule(one, reg, quiet(), noiseless());
    EXPECT_NEAR(r1.reg.ions[0].state.population(1), 0.36, 1e-10);
    EXPECT_LT(max_abs(r1.reg.ions[1].state.density() - reg.ions[1].state.density()), 1e-15);
}

TEST(Compiler, RegisterMismatchRejected) {
    const auto s = compile(measure_program(), yb(), ion::NoiseModel{});
    const ion::IonRegister reg{yb(), {{ion::Role::data, ion::qubit_state(yb(), 1.0, 0.0)}}};
    EXPECT_THROW(simulate_schedule(s, reg, ion::NoiseModel{}), std::invalid_argument);
}

TEST(Compiler, SampledOutcomesReproducible) {
    const auto s = compile(measure_program(), yb(), ion::NoiseModel{});
    const double h = 1.0 / std::sqrt(2.0);
    const auto reg = two(ion::qubit_state(yb(), h, h), ion::qubit_state(yb(), h, h));
    SimulationOptions o;
    o.sampling_seed = 99;
    std::vector<bool> a, b;
    for (int k = 0; k < 2; ++k) {
        const auto r = simulate_schedule(s, reg, ion::NoiseModel{}, o);
        ASSERT_TRUE(r.records.at(0).outcome.has_value());
        (k == 0 ? a : b).push_back(*r.records.at(0).outcome);
    }
    EXPECT_EQ(a, b);
}

TEST(Compiler, GoldenSchedules) {
    const std::string dir = MCMR_DATA_DIR;
    for (const std::string name : {"measure-qubit-rotation", "hands-off-reset"}) {
        const auto program = io::program_from_json(io::read_json_file(dir + "/programs/" + name + ".json"));
        const auto compiled = io::to_json(compile(program, yb(), ion::NoiseModel{}));
        const auto golden = io::read_json_file(dir + "/golden/" + name + ".schedule.json");
        expect_json_close(compiled, golden, name);
    }
}
