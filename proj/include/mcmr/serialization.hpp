// serialization.hpp: JSON documents for sequences, level schemes, noise models, programs and schedules
//
// Config files give frequencies in Hz (ordinary frequency); schedules carry the
// angular values actually simulated (rad/s). Every document has a "schema" tag.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mcmr/compiler.hpp"
#include "mcmr/composite_pulse.hpp"
#include "mcmr/ion_model.hpp"

namespace mcmr::io {

using json = nlohmann::json;

/// Missing, unreadable or malformed input documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kCompositeSchema = "mcmr.composite/1";
inline constexpr const char* kReportSchema = "mcmr.error_report/1";
inline constexpr const char* kSchemeSchema = "mcmr.level_scheme/1";
inline constexpr const char* kNoiseSchema = "mcmr.noise/1";
inline constexpr const char* kProgramSchema = "mcmr.program/1";
inline constexpr const char* kScheduleSchema = "mcmr.schedule/1";

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; doubles round-trip exactly.
void write_json_file(const std::filesystem::path& path, const json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

json to_json(const composite::CompositePulse& seq);
composite::CompositePulse composite_from_json(const json& doc);
json to_json(const composite::ErrorReport& report);
json to_json(const composite::RobustnessSpec& spec);

json to_json(const ion::LevelScheme& scheme);
ion::LevelScheme scheme_from_json(const json& doc);
json to_json(const ion::NoiseModel& noise);
ion::NoiseModel noise_from_json(const json& doc);

json to_json(const compiler::MCMRProgram& program);
compiler::MCMRProgram program_from_json(const json& doc);
json to_json(const compiler::Schedule& schedule);
compiler::Schedule schedule_from_json(const json& doc);

}  // namespace mcmr::io
