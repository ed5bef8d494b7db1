#include "mcmr/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mcmr::io {

namespace {

template <typename T>
T required(const json& doc, const char* key, const char* where) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw ConfigError(std::string(where) + ": missing field '" + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

template <typename T>
T optional_field(const json& doc, const char* key, T fallback, const char* where) {
    if (!doc.contains(key)) {
        return fallback;
    }
    return required<T>(doc, key, where);
}

void check_schema(const json& doc, const char* expected, const char* where) {
    if (!doc.is_object()) {
        throw ConfigError(std::string(where) + ": expected a JSON object");
    }
    if (doc.contains("schema") && doc.at("schema") != expected) {
        throw ConfigError(std::string(where) + ": schema '" + doc.at("schema").dump() + "' is not " + expected);
    }
}

std::string manifold_name(ion::Manifold m) {
    switch (m) {
        case ion::Manifold::s_ground:
            return "S_ground";
        case ion::Manifold::d_metastable:
            return "D_metastable";
        case ion::Manifold::d_repump_sink:
            return "D_repump_sink";
    }
    return "";
}

ion::Manifold manifold_from(const std::string& s) {
    if (s == "S_ground") {
        return ion::Manifold::s_ground;
    }
    if (s == "D_metastable") {
        return ion::Manifold::d_metastable;
    }
    if (s == "D_repump_sink") {
        return ion::Manifold::d_repump_sink;
    }
    throw ConfigError("level scheme: unknown manifold '" + s + "'");
}

std::string shape_name(ion::Shape s) { return s == ion::Shape::blackman ? "blackman" : "rectangular"; }

ion::Shape shape_from(const std::string& s) {
    if (s == "blackman") {
        return ion::Shape::blackman;
    }
    if (s == "rectangular") {
        return ion::Shape::rectangular;
    }
    throw ConfigError("unknown pulse shape '" + s + "'");
}

const char* method_name(compiler::Method m) {
    switch (m) {
        case compiler::Method::shelving_qubit_rotation:
            return "shelving_qubit_rotation";
        case compiler::Method::shelving_dressing:
            return "shelving_dressing";
        case compiler::Method::hands_off:
            return "hands_off";
    }
    return "";
}

template <typename Fn>
auto wrap(const char* where, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw ConfigError("write failed for '" + path.string() + "'");
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

json to_json(const composite::CompositePulse& seq) {
    json pulses = json::array();
    for (const auto& p : seq.pulses) {
        pulses.push_back({{"delta_over_omega", p.detuning_ratio}, {"tau_omega", p.duration_product}, {"phi", p.phase}});
    }
    return {{"schema", kCompositeSchema}, {"delta_over_omega", seq.nominal_detuning_ratio}, {"pulses", pulses}};
}

composite::CompositePulse composite_from_json(const json& doc) {
    constexpr const char* where = "composite pulse";
    check_schema(doc, kCompositeSchema, where);
    composite::CompositePulse seq;
    seq.nominal_detuning_ratio = required<double>(doc, "delta_over_omega", where);
    const json pulses = required<json>(doc, "pulses", where);
    if (!pulses.is_array() || pulses.size() != 3) {
        throw ConfigError("composite pulse: 'pulses' must be an array of three entries");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        seq.pulses[i].detuning_ratio = required<double>(pulses[i], "delta_over_omega", where);
        seq.pulses[i].duration_product = required<double>(pulses[i], "tau_omega", where);
        seq.pulses[i].phase = required<double>(pulses[i], "phi", where);
    }
    wrap(where, [&] {
        seq.validate(true);
        return 0;
    });
    return seq;
}

json to_json(const composite::ErrorReport& report) {
    json samples = json::array();
    for (const auto& s : report.per_sample) {
        samples.push_back({{"band", s.crosstalk_band ? "crosstalk" : "fluctuation"},
                           {"rabi_fraction", s.rabi_fraction},
                           {"xy_error", s.xy_error}});
    }
    return {{"schema", kReportSchema}, {"e0", report.e0}, {"e1", report.e1}, {"per_sample", samples}};
}

json to_json(const composite::RobustnessSpec& spec) {
    auto band = [](const composite::Band& b) { return json{{"lo", b.lo}, {"hi", b.hi}, {"samples", b.samples}}; };
    return {{"crosstalk_band", band(spec.crosstalk)},
            {"fluctuation_band", band(spec.fluctuation)},
            {"aggregation", spec.aggregation == composite::Aggregation::max ? "max" : "mean"}};
}

json to_json(const ion::LevelScheme& scheme) {
    json levels = json::array();
    for (const auto& l : scheme.levels()) {
        levels.push_back({{"id", l.id},
                          {"manifold", manifold_name(l.manifold)},
                          {"F", l.f},
                          {"m_F", l.m},
                          {"zeeman_shift_hz", l.zeeman_shift_hz}});
    }
    json transitions = json::array();
    for (const auto& t : scheme.transitions()) {
        transitions.push_back({{"id", t.id},
                               {"lower", t.lower},
                               {"upper", t.upper},
                               {"kind", t.kind == ion::TransitionKind::raman_qubit ? "raman_qubit" : "optical_quadrupole"},
                               {"allowed", t.allowed},
                               {"family", t.family}});
    }
    json branching = json::object();
    for (const auto& [id, targets] : scheme.repump.branching) {
        json arr = json::array();
        for (const auto& b : targets) {
            arr.push_back({{"level", b.level}, {"weight", b.weight}});
        }
        branching[id] = arr;
    }
    const auto& c = scheme.controls;
    return {{"schema", kSchemeSchema},
            {"levels", levels},
            {"transitions", transitions},
            {"repump",
             {{"rate_per_s", scheme.repump.rate},
              {"include_sink_channel", scheme.repump.include_sink_channel},
              {"sink_rate_per_s", scheme.repump.sink_rate},
              {"branching", branching}}},
            {"controls",
             {{"raman_rabi_hz", c.raman_rabi / kTwoPi},
              {"drive_435_rabi_hz", c.drive_435_rabi / kTwoPi},
              {"shelve_duration_s", c.shelve_duration},
              {"dressed_shelve_duration_s", c.dressed_shelve_duration},
              {"pump_dressed_duration_s", c.pump_dressed_duration},
              {"pump_zeeman_duration_s", c.pump_zeeman_duration},
              {"repump_window_s", c.repump_window},
              {"min_slices", c.min_slices}}}};
}

ion::LevelScheme scheme_from_json(const json& doc) {
    constexpr const char* where = "level scheme";
    check_schema(doc, kSchemeSchema, where);
    std::vector<ion::Level> levels;
    for (const auto& l : required<json>(doc, "levels", where)) {
        levels.push_back({required<std::string>(l, "id", where), manifold_from(required<std::string>(l, "manifold", where)),
                          required<int>(l, "F", where), required<int>(l, "m_F", where),
                          optional_field<double>(l, "zeeman_shift_hz", 0.0, where)});
    }
    std::vector<ion::Transition> transitions;
    for (const auto& t : required<json>(doc, "transitions", where)) {
        const auto kind = required<std::string>(t, "kind", where);
        if (kind != "raman_qubit" && kind != "optical_quadrupole") {
            throw ConfigError("level scheme: unknown transition kind '" + kind + "'");
        }
        transitions.push_back({required<std::string>(t, "id", where), required<std::string>(t, "lower", where),
                               required<std::string>(t, "upper", where),
                               kind == "raman_qubit" ? ion::TransitionKind::raman_qubit
                                                     : ion::TransitionKind::optical_quadrupole,
                               optional_field<bool>(t, "allowed", true, where),
                               optional_field<std::string>(t, "family", "", where)});
    }
    ion::LevelScheme scheme = wrap(where, [&] { return ion::LevelScheme(levels, transitions); });
    if (doc.contains("repump")) {
        const json& r = doc.at("repump");
        auto& rp = scheme.repump;
        rp.rate = optional_field<double>(r, "rate_per_s", rp.rate, where);
        rp.include_sink_channel = optional_field<bool>(r, "include_sink_channel", rp.include_sink_channel, where);
        rp.sink_rate = optional_field<double>(r, "sink_rate_per_s", rp.sink_rate, where);
        if (r.contains("branching")) {
            for (const auto& [id, arr] : r.at("branching").items()) {
                std::vector<ion::BranchTarget> targets;
                for (const auto& b : arr) {
                    targets.push_back({required<std::string>(b, "level", where), required<double>(b, "weight", where)});
                }
                wrap(where, [&] { return scheme.index(id); });
                for (const auto& b : targets) {
                    wrap(where, [&] { return scheme.index(b.level); });
                }
                rp.branching[id] = targets;
            }
        }
        if (!(rp.rate >= 0.0) || !(rp.sink_rate >= 0.0)) {
            throw ConfigError("level scheme: repump rates must be non-negative");
        }
    }
    if (doc.contains("controls")) {
        const json& c = doc.at("controls");
        auto& k = scheme.controls;
        k.raman_rabi = kTwoPi * optional_field<double>(c, "raman_rabi_hz", k.raman_rabi / kTwoPi, where);
        k.drive_435_rabi = kTwoPi * optional_field<double>(c, "drive_435_rabi_hz", k.drive_435_rabi / kTwoPi, where);
        k.shelve_duration = optional_field<double>(c, "shelve_duration_s", k.shelve_duration, where);
        k.dressed_shelve_duration = optional_field<double>(c, "dressed_shelve_duration_s", k.dressed_shelve_duration, where);
        k.pump_dressed_duration = optional_field<double>(c, "pump_dressed_duration_s", k.pump_dressed_duration, where);
        k.pump_zeeman_duration = optional_field<double>(c, "pump_zeeman_duration_s", k.pump_zeeman_duration, where);
        k.repump_window = optional_field<double>(c, "repump_window_s", k.repump_window, where);
        k.min_slices = optional_field<std::size_t>(c, "min_slices", k.min_slices, where);
        for (double v : {k.raman_rabi, k.drive_435_rabi, k.shelve_duration, k.dressed_shelve_duration,
                         k.pump_dressed_duration, k.pump_zeeman_duration, k.repump_window}) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError("level scheme: control rates and durations must be positive");
            }
        }
        if (k.min_slices < 1) {
            throw ConfigError("level scheme: min_slices must be at least 1");
        }
    }
    return scheme;
}

json to_json(const ion::NoiseModel& noise) {
    return {{"schema", kNoiseSchema},
            {"t2_optical_s", noise.t2_optical},
            {"d_lifetime_s", noise.d_lifetime},
            {"spam_dark_error", noise.spam_dark_error},
            {"spam_bright_error", noise.spam_bright_error},
            {"crosstalk_fraction", noise.crosstalk_fraction},
            {"detection_time_s", noise.detection_time},
            {"sd_detuning_hz", noise.sd_detuning / kTwoPi},
            {"detection_leak_rate_per_s", noise.detection_leak_rate}};
}

ion::NoiseModel noise_from_json(const json& doc) {
    constexpr const char* where = "noise model";
    check_schema(doc, kNoiseSchema, where);
    ion::NoiseModel n;
    n.t2_optical = optional_field<double>(doc, "t2_optical_s", n.t2_optical, where);
    n.d_lifetime = optional_field<double>(doc, "d_lifetime_s", n.d_lifetime, where);
    n.spam_dark_error = optional_field<double>(doc, "spam_dark_error", n.spam_dark_error, where);
    n.spam_bright_error = optional_field<double>(doc, "spam_bright_error", n.spam_bright_error, where);
    n.crosstalk_fraction = optional_field<double>(doc, "crosstalk_fraction", n.crosstalk_fraction, where);
    n.detection_time = optional_field<double>(doc, "detection_time_s", n.detection_time, where);
    n.sd_detuning = kTwoPi * optional_field<double>(doc, "sd_detuning_hz", 0.0, where);
    n.detection_leak_rate = optional_field<double>(doc, "detection_leak_rate_per_s", 0.0, where);
    wrap(where, [&] {
        n.validate();
        return 0;
    });
    return n;
}

json to_json(const compiler::MCMRProgram& program) {
    json roles = json::array();
    for (auto r : program.roles) {
        roles.push_back(r == ion::Role::data ? "data" : "auxiliary");
    }
    json doc = {{"schema", kProgramSchema},
                {"directive",
                 program.directive == compiler::Directive::mid_circuit_measure ? "mid_circuit_measure"
                                                                               : "mid_circuit_reset"},
                {"method", method_name(program.method)},
                {"roles", roles},
                {"pump_cycles", program.pump_cycles},
                {"echo", program.echo}};
    if (program.dressing) {
        doc["dressing"] = {{"rabi_hz", program.dressing->rabi / kTwoPi},
                           {"detuning_hz", program.dressing->detuning / kTwoPi},
                           {"regime", program.dressing->regime_hint == dressing::Regime::hands_off ? "hands_off"
                                                                                                   : "shelving"}};
    }
    if (program.rotation) {
        doc["rotation"] = to_json(*program.rotation);
    }
    return doc;
}

compiler::MCMRProgram program_from_json(const json& doc) {
    constexpr const char* where = "program";
    check_schema(doc, kProgramSchema, where);
    compiler::MCMRProgram p;
    const auto directive = required<std::string>(doc, "directive", where);
    if (directive == "mid_circuit_measure") {
        p.directive = compiler::Directive::mid_circuit_measure;
    } else if (directive == "mid_circuit_reset") {
        p.directive = compiler::Directive::mid_circuit_reset;
    } else {
        throw ConfigError("program: unknown directive '" + directive + "'");
    }
    const auto method = required<std::string>(doc, "method", where);
    bool found = false;
    for (auto m : {compiler::Method::shelving_qubit_rotation, compiler::Method::shelving_dressing,
                   compiler::Method::hands_off}) {
        if (method == method_name(m)) {
            p.method = m;
            found = true;
        }
    }
    if (!found) {
        throw ConfigError("program: unknown method '" + method + "'");
    }
    for (const auto& r : required<json>(doc, "roles", where)) {
        const auto s = r.get<std::string>();
        if (s != "data" && s != "auxiliary") {
            throw ConfigError("program: unknown role '" + s + "'");
        }
        p.roles.push_back(s == "data" ? ion::Role::data : ion::Role::auxiliary);
    }
    p.pump_cycles = optional_field<std::size_t>(doc, "pump_cycles", p.pump_cycles, where);
    p.echo = optional_field<bool>(doc, "echo", p.echo, where);
    if (doc.contains("dressing")) {
        const json& d = doc.at("dressing");
        const auto regime = optional_field<std::string>(d, "regime", "hands_off", where);
        if (regime != "hands_off" && regime != "shelving") {
            throw ConfigError("program: unknown dressing regime '" + regime + "'");
        }
        p.dressing = dressing::DressingParams{kTwoPi * required<double>(d, "rabi_hz", where),
                                              kTwoPi * required<double>(d, "detuning_hz", where),
                                              regime == "hands_off" ? dressing::Regime::hands_off
                                                                    : dressing::Regime::shelving};
    }
    if (doc.contains("rotation")) {
        p.rotation = composite_from_json(doc.at("rotation"));
    }
    wrap(where, [&] {
        p.validate();
        return 0;
    });
    return p;
}

json to_json(const compiler::Schedule& schedule) {
    json items = json::array();
    for (const auto& item : schedule.items) {
        json drives = json::array();
        for (const auto& p : item.drives) {
            drives.push_back({{"transition", p.drive},
                              {"target", p.target.global ? json("global") : json(p.target.ion)},
                              {"rabi_rad_s", p.rabi},
                              {"detuning_rad_s", p.detuning},
                              {"phase_rad", p.phase},
                              {"duration_s", p.duration},
                              {"shape", shape_name(p.shape)}});
        }
        items.push_back({{"type", compiler::to_string(item.kind)},
                         {"purpose", compiler::to_string(item.purpose)},
                         {"duration_s", item.duration},
                         {"drives", drives},
                         {"measured", item.measured},
                         {"record", item.record}});
    }
    json frame = json::array();
    for (bool b : schedule.x_frame) {
        frame.push_back(b);
    }
    return {{"schema", kScheduleSchema},
            {"n_ions", schedule.n_ions},
            {"total_duration_s", schedule.total_duration()},
            {"x_frame", frame},
            {"items", items}};
}

compiler::Schedule schedule_from_json(const json& doc) {
    constexpr const char* where = "schedule";
    check_schema(doc, kScheduleSchema, where);
    compiler::Schedule s;
    s.n_ions = required<std::size_t>(doc, "n_ions", where);
    s.x_frame = optional_field<std::vector<bool>>(doc, "x_frame", std::vector<bool>(s.n_ions, false), where);
    for (const auto& it : required<json>(doc, "items", where)) {
        compiler::ScheduleItem item;
        wrap(where, [&] {
            item.kind = compiler::item_kind_from_string(required<std::string>(it, "type", where));
            item.purpose = compiler::purpose_from_string(optional_field<std::string>(it, "purpose", "idle", where));
            return 0;
        });
        item.duration = required<double>(it, "duration_s", where);
        item.measured = optional_field<std::vector<std::size_t>>(it, "measured", {}, where);
        item.record = optional_field<bool>(it, "record", false, where);
        for (const auto& d : optional_field<json>(it, "drives", json::array(), where)) {
            ion::Pulse p;
            p.drive = required<std::string>(d, "transition", where);
            const json& target = d.contains("target") ? d.at("target") : json("global");
            if (target.is_string() && target == "global") {
                p.target = ion::Target::all();
            } else if (target.is_number_unsigned()) {
                p.target = ion::Target::individual(target.get<std::size_t>());
            } else {
                throw ConfigError("schedule: drive target must be \"global\" or an ion index");
            }
            p.rabi = required<double>(d, "rabi_rad_s", where);
            p.detuning = optional_field<double>(d, "detuning_rad_s", 0.0, where);
            p.phase = optional_field<double>(d, "phase_rad", 0.0, where);
            p.duration = optional_field<double>(d, "duration_s", item.duration, where);
            p.shape = shape_from(optional_field<std::string>(d, "shape", "rectangular", where));
            item.drives.push_back(p);
        }
        s.items.push_back(std::move(item));
    }
    return s;
}

}  // namespace mcmr::io
