// mcmr: scans, composite-pulse optimization, sequence evaluation and schedule compilation

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mcmr/compiler.hpp"
#include "mcmr/composite_pulse.hpp"
#include "mcmr/experiments.hpp"
#include "mcmr/serialization.hpp"

namespace {

using namespace mcmr;
using io::ConfigError;
using io::json;

constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitBudget = 4;

/// "a..b" gives integer steps of one; "a:b:n" gives n evenly spaced points; a
/// comma list is taken verbatim.
std::vector<double> parse_sweep(const std::string& text) {
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument("");
            }
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + s + "' in '" + text + "'");
        }
    };
    std::vector<double> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const double a = number(text.substr(0, dots));
        const double b = number(text.substr(dots + 2));
        if (a != std::floor(a) || b != std::floor(b) || b < a) {
            throw ConfigError("range '" + text + "' needs integer bounds with a <= b");
        }
        for (double v = a; v <= b; v += 1.0) {
            out.push_back(v);
        }
        return out;
    }
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        const double a = number(text.substr(0, c1));
        const double b = number(text.substr(c1 + 1, c2 - c1 - 1));
        const double n = number(text.substr(c2 + 1));
        if (n < 1 || n != std::floor(n)) {
            throw ConfigError("sweep '" + text + "' needs a positive integer point count");
        }
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        out.push_back(number(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

compiler::Method parse_method(const std::string& s) {
    if (s == "shelving_qubit_rotation") {
        return compiler::Method::shelving_qubit_rotation;
    }
    if (s == "shelving_dressing") {
        return compiler::Method::shelving_dressing;
    }
    if (s == "hands_off") {
        return compiler::Method::hands_off;
    }
    throw ConfigError("unknown method '" + s + "'");
}

/// Config value for `key` unless the flag was given on the command line.
template <typename T>
void merge(T& target, const json& config, const char* key, const CLI::Option* flag) {
    if (flag->count() > 0 || !config.contains(key)) {
        return;
    }
    try {
        target = config.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

json load_config(const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    json doc = io::read_json_file(path);
    if (!doc.is_object()) {
        throw ConfigError("config '" + path + "' must be a JSON object");
    }
    return doc;
}

struct ScanArgs {
    std::string config, scenario, sweep, cycles, scheme, noise, sequence, method = "shelving_qubit_rotation";
    std::string out = "results", label = "run";
    std::uint64_t seed = 0;
    std::size_t shots = 0;
    unsigned threads = 1;
    int aux_state = -1;
    double dressing_ratio = std::nan("");
};

struct OptimizeArgs {
    std::string config, out = "results", label = "run";
    double ratio = 0.0;
    double threshold = 1e-5;
    std::size_t budget = 200;
    std::size_t evaluations = 6000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool full_budget = false;
};

struct EvaluateArgs {
    std::string sequence, target = "dressed", aggregation = "max", json_out;
};

struct CompileArgs {
    std::string program, scheme, noise, out;
};

int run_scan(const ScanArgs& a) {
    experiments::ScanSpec spec;
    spec.scenario = experiments::scenario_from_string(a.scenario);
    if (!a.scheme.empty()) {
        spec.scheme = io::scheme_from_json(io::read_json_file(a.scheme));
    }
    if (!a.noise.empty()) {
        spec.noise = io::noise_from_json(io::read_json_file(a.noise));
    }
    if (!a.sequence.empty()) {
        spec.sequence = io::composite_from_json(io::read_json_file(a.sequence));
    }
    if (!a.cycles.empty() && !a.sweep.empty()) {
        throw ConfigError("give either --sweep or --cycles, not both");
    }
    if (!a.cycles.empty() && spec.scenario != experiments::Scenario::pump_convergence) {
        throw ConfigError("--cycles only applies to pump_convergence");
    }
    const std::string range = a.cycles.empty() ? a.sweep : a.cycles;
    spec.sweep = experiments::default_sweep(spec.scenario);
    if (!range.empty()) {
        spec.sweep.values = parse_sweep(range);
    }
    spec.shots = a.shots;
    spec.seed = a.seed;
    spec.label = a.label;
    spec.threads = a.threads;
    spec.aux_state = a.aux_state;
    spec.dressing_ratio = a.dressing_ratio;
    spec.method = parse_method(a.method);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto result = experiments::run_scan(spec);
    const auto [csv, js] = experiments::write_result(result, a.out);
    std::cout << csv << "\n" << js << "\n";
    for (const auto& [k, v] : result.summary) {
        std::printf("%s = %.10g\n", k.c_str(), v);
    }
    return 0;
}

int run_optimize(const OptimizeArgs& a) {
    if (!std::isfinite(a.ratio) || a.ratio <= 0.0) {
        throw ConfigError("--delta-ratio must be positive");
    }
    if (a.budget == 0) {
        throw ConfigError("--budget must be at least 1");
    }
    composite::OptimizeOptions opt;
    opt.restarts = a.budget;
    opt.evaluations_per_restart = a.evaluations;
    opt.threshold = a.threshold;
    opt.stop_at_threshold = !a.full_budget;
    opt.threads = a.threads;
    const composite::RobustnessSpec rs;
    const auto r = composite::optimize(a.ratio, rs, a.seed, opt);

    json report = io::to_json(r.report);
    report["combined"] = r.combined;
    report["threshold"] = a.threshold;
    report["reached_threshold"] = r.reached_threshold;
    report["restarts_run"] = r.restarts_run;
    report["best_restart"] = r.best_restart;
    report["seed"] = a.seed;
    report["robustness"] = io::to_json(rs);
    const std::filesystem::path dir(a.out);
    io::write_json_file(dir / ("sequence-" + a.label + ".json"), io::to_json(r.sequence));
    io::write_json_file(dir / ("report-" + a.label + ".json"), report);
    std::printf("e0 = %.6e\ne1 = %.6e\ncombined = %.6e\nrestarts = %zu\n", r.report.e0, r.report.e1, r.combined,
                r.restarts_run);
    if (!r.reached_threshold) {
        std::cerr << "budget exhausted: combined error " << r.combined << " above threshold " << a.threshold << "\n";
        return kExitBudget;
    }
    return 0;
}

int run_evaluate(const EvaluateArgs& a) {
    const auto seq = io::composite_from_json(io::read_json_file(a.sequence));
    composite::RobustnessSpec rs;
    if (a.aggregation == "mean") {
        rs.aggregation = composite::Aggregation::mean;
    } else if (a.aggregation != "max") {
        throw ConfigError("unknown aggregation '" + a.aggregation + "'");
    }
    composite::ErrorReport report;
    if (a.target == "identity") {
        report = composite::evaluate(seq, rs, [](double) { return Operator(CMatrix::Identity(2, 2), Operator::unitary); });
    } else if (a.target == "dressed") {
        report = composite::evaluate(seq, rs);
    } else {
        throw ConfigError("unknown target '" + a.target + "'");
    }
    std::printf("e0 = %.6e\ne1 = %.6e\n", report.e0, report.e1);
    std::printf("%-12s %-14s %s\n", "band", "rabi_fraction", "xy_error");
    for (const auto& s : report.per_sample) {
        std::printf("%-12s %-14.6f %.6e\n", s.crosstalk_band ? "crosstalk" : "fluctuation", s.rabi_fraction, s.xy_error);
    }
    if (!a.json_out.empty()) {
        io::write_json_file(a.json_out, io::to_json(report));
    }
    return 0;
}

int run_compile(const CompileArgs& a) {
    const auto program = io::program_from_json(io::read_json_file(a.program));
    const auto scheme = a.scheme.empty() ? ion::LevelScheme::ytterbium171()
                                         : io::scheme_from_json(io::read_json_file(a.scheme));
    const auto noise = a.noise.empty() ? ion::NoiseModel{} : io::noise_from_json(io::read_json_file(a.noise));
    compiler::Schedule schedule;
    try {
        schedule = compiler::compile(program, scheme, noise);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const json doc = io::to_json(schedule);
    if (a.out.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        io::write_json_file(a.out, doc);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mid-circuit measurement and reset toolkit for trapped ions"};
    app.require_subcommand(1);

    ScanArgs scan;
    auto* sc = app.add_subcommand("scan", "Run an experiment scenario and write CSV + JSON results");
    sc->add_option("--config", scan.config, "JSON config; command-line flags override it");
    auto* o_scenario = sc->add_option("--scenario", scan.scenario,
                                      "dstate_spectrum | measure_fidelity | ramsey_phase | pump_convergence | "
                                      "dress_rotate_error");
    auto* o_sweep = sc->add_option("--sweep", scan.sweep, "Sweep values: a..b (integers), a:b:n, or a,b,c");
    auto* o_cycles = sc->add_option("--cycles", scan.cycles, "Cycle range for pump_convergence, e.g. 1..16");
    auto* o_scheme = sc->add_option("--scheme", scan.scheme, "Level scheme JSON (default: built-in Yb-171)");
    auto* o_noise = sc->add_option("--noise", scan.noise, "Noise model JSON (default: nominal noise)");
    auto* o_seq = sc->add_option("--sequence", scan.sequence, "Composite pulse JSON for dressing rotations");
    auto* o_method = sc->add_option("--method", scan.method, "Measurement method for readout scans");
    auto* o_aux = sc->add_option("--aux-state", scan.aux_state, "Initial auxiliary state (0 or 1)");
    auto* o_ratio = sc->add_option("--dressing-ratio", scan.dressing_ratio, "Dressing detuning over Rabi frequency");
    auto* o_out = sc->add_option("--out", scan.out, "Output directory")->capture_default_str();
    auto* o_label = sc->add_option("--label", scan.label, "Output file label")->capture_default_str();
    auto* o_seed = sc->add_option("--seed", scan.seed, "Sampling seed")->capture_default_str();
    auto* o_shots = sc->add_option("--shots", scan.shots, "Shots per point; 0 = exact probabilities")
                        ->capture_default_str();
    auto* o_threads = sc->add_option("--threads", scan.threads, "Worker threads")->capture_default_str();

    OptimizeArgs optim;
    auto* op = app.add_subcommand("optimize", "Search a robust three-pulse dressing rotation");
    op->add_option("--config", optim.config, "JSON config; command-line flags override it");
    auto* p_ratio = op->add_option("--delta-ratio", optim.ratio, "Target dressing detuning over Rabi frequency");
    auto* p_budget = op->add_option("--budget", optim.budget, "Maximum restarts")->capture_default_str();
    auto* p_evals = op->add_option("--evaluations", optim.evaluations, "Objective evaluations per restart")
                        ->capture_default_str();
    auto* p_threshold = op->add_option("--threshold", optim.threshold, "Target combined error")->capture_default_str();
    auto* p_seed = op->add_option("--seed", optim.seed, "Random seed")->capture_default_str();
    auto* p_threads = op->add_option("--threads", optim.threads, "Worker threads")->capture_default_str();
    auto* p_full = op->add_flag("--full-budget", optim.full_budget, "Run every restart even after the threshold is met");
    auto* p_out = op->add_option("--out", optim.out, "Output directory")->capture_default_str();
    auto* p_label = op->add_option("--label", optim.label, "Output file label")->capture_default_str();

    EvaluateArgs eval;
    auto* ev = app.add_subcommand("evaluate", "Print crosstalk and fluctuation band errors of a sequence file");
    ev->add_option("sequence", eval.sequence, "Composite pulse JSON")->required();
    ev->add_option("--target", eval.target, "dressed | identity")->capture_default_str();
    ev->add_option("--aggregation", eval.aggregation, "max | mean")->capture_default_str();
    ev->add_option("--json", eval.json_out, "Also write the error report here");

    CompileArgs comp;
    auto* co = app.add_subcommand("compile", "Emit the schedule JSON for an MCMR program");
    co->add_option("--program", comp.program, "Program JSON")->required();
    co->add_option("--scheme", comp.scheme, "Level scheme JSON (default: built-in Yb-171)");
    co->add_option("--noise", comp.noise, "Noise model JSON (crosstalk is used for verification)");
    co->add_option("--out", comp.out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sc) {
            const json cfg = load_config(scan.config);
            merge(scan.scenario, cfg, "scenario", o_scenario);
            merge(scan.sweep, cfg, "sweep", o_sweep);
            merge(scan.cycles, cfg, "cycles", o_cycles);
            merge(scan.scheme, cfg, "scheme", o_scheme);
            merge(scan.noise, cfg, "noise", o_noise);
            merge(scan.sequence, cfg, "sequence", o_seq);
            merge(scan.method, cfg, "method", o_method);
            merge(scan.aux_state, cfg, "aux_state", o_aux);
            merge(scan.dressing_ratio, cfg, "dressing_ratio", o_ratio);
            merge(scan.out, cfg, "out", o_out);
            merge(scan.label, cfg, "label", o_label);
            merge(scan.seed, cfg, "seed", o_seed);
            merge(scan.shots, cfg, "shots", o_shots);
            merge(scan.threads, cfg, "threads", o_threads);
            if (scan.scenario.empty()) {
                throw ConfigError("--scenario is required");
            }
            try {
                (void)experiments::scenario_from_string(scan.scenario);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            return run_scan(scan);
        }
        if (*op) {
            const json cfg = load_config(optim.config);
            merge(optim.ratio, cfg, "delta_ratio", p_ratio);
            merge(optim.budget, cfg, "budget", p_budget);
            merge(optim.evaluations, cfg, "evaluations", p_evals);
            merge(optim.threshold, cfg, "threshold", p_threshold);
            merge(optim.seed, cfg, "seed", p_seed);
            merge(optim.threads, cfg, "threads", p_threads);
            merge(optim.full_budget, cfg, "full_budget", p_full);
            merge(optim.out, cfg, "out", p_out);
            merge(optim.label, cfg, "label", p_label);
            return run_optimize(optim);
        }
        if (*ev) {
            return run_evaluate(eval);
        }
        if (*co) {
            return run_compile(comp);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    }
    return 0;
}
