// compiler.hpp: mid-circuit measurement and reset programs compiled into timed pulse schedules,
// and a per-ion schedule simulator

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmr/composite_pulse.hpp"
#include "mcmr/dressing.hpp"
#include "mcmr/ion_model.hpp"

namespace mcmr::compiler {

enum class Directive { mid_circuit_measure, mid_circuit_reset };
enum class Method { shelving_qubit_rotation, shelving_dressing, hands_off };

struct MCMRProgram {
    Directive directive = Directive::mid_circuit_measure;
    Method method = Method::shelving_qubit_rotation;
    std::vector<ion::Role> roles;
    /// Raman dressing of the auxiliary ions, rad/s.
    std::optional<dressing::DressingParams> dressing;
    std::size_t pump_cycles = 16;
    /// Basis rotation; defaults to the reference sequence matching δ/Ω.
    std::optional<composite::CompositePulse> rotation;
    bool echo = true;

    void validate() const;
    std::vector<std::size_t> auxiliary_ions() const;
    std::vector<std::size_t> data_ions() const;
};

enum class ItemKind { coherent, noise, detection, repump };

enum class Purpose { shelve, unshelve, detect, echo, rotate_in, rotate_out, dressed_shelve, pump, repump, idle };

std::string to_string(ItemKind k);
std::string to_string(Purpose p);
ItemKind item_kind_from_string(const std::string& s);
Purpose purpose_from_string(const std::string& s);

struct ScheduleItem {
    ItemKind kind = ItemKind::coherent;
    Purpose purpose = Purpose::idle;
    double duration = 0.0;
    /// Simultaneous drives; each has the item's duration.
    std::vector<ion::Pulse> drives;
    /// Detection items: the POVM is applied to these ions at the start of the window.
    std::vector<std::size_t> measured;
    bool record = false;
};

struct Schedule {
    std::size_t n_ions = 0;
    std::vector<ScheduleItem> items;
    /// Software Pauli-X frame update on the qubit subspace, applied after the last item.
    std::vector<bool> x_frame;

    void validate(const ion::LevelScheme& scheme) const;
    double total_duration() const;
};

Schedule compile(const MCMRProgram& program, const ion::LevelScheme& scheme, const ion::NoiseModel& noise);
Schedule compile_shelving_measure(const MCMRProgram& program, const ion::LevelScheme& scheme,
                                  const ion::NoiseModel& noise);
Schedule compile_hands_off_reset(const MCMRProgram& program, const ion::LevelScheme& scheme,
                                 const ion::NoiseModel& noise);
/// Shelves |0⟩ of `target_ion` only, using global 435 nm π pulses and individual
/// Raman π pulses. The result is checked by noiseless simulation before returning.
Schedule compile_individual_shelve(std::size_t target_ion, std::size_t n_ions, const ion::LevelScheme& scheme);

/// Resonant Blackman π pulse on |0⟩ ↔ |D⟩ lasting `duration`.
ion::Pulse shelving_pulse(const ion::LevelScheme& scheme, double duration, double phase, ion::Target target);
ion::Pulse raman_pi(const ion::LevelScheme& scheme, double phase, std::size_t ion);
/// The three Raman pulses of `seq` on `ion` at nominal Rabi frequency `rabi`.
std::vector<ScheduleItem> rotation_items(const composite::CompositePulse& seq, double rabi,
                                         const std::vector<std::size_t>& ions, Purpose purpose);

struct MeasurementRecord {
    std::size_t item = 0;
    std::size_t ion = 0;
    double p_bright = 0.0;
    std::optional<bool> outcome;
};

struct SimulationOptions {
    bool noiseless = false;
    std::optional<std::uint64_t> sampling_seed;
    bool apply_frame = true;
};

struct SimulationResult {
    ion::IonRegister reg;
    std::vector<MeasurementRecord> records;
};

SimulationResult simulate_schedule(const Schedule& schedule, const ion::IonRegister& reg,
                                   const ion::NoiseModel& noise, const SimulationOptions& options = {});

/// Apply items [first, last) to one ion. Exposed for scans that need intermediate states.
QuantumState simulate_ion(const Schedule& schedule, std::size_t first, std::size_t last, std::size_t ion,
                          const QuantumState& state, const ion::LevelScheme& scheme, const ion::NoiseModel& noise,
                          bool noiseless);

}  // namespace mcmr::compiler
