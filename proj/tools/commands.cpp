#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mlm/calibration.hpp"
#include "mlm/cli.hpp"
#include "mlm/config.hpp"
#include "mlm/csv.hpp"
#include "mlm/errors.hpp"
#include "mlm/manifest.hpp"

namespace fs = std::filesystem;

namespace mlm::cli {

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

SimConfig load(const Common& c) {
    SimConfig cfg = c.config_path.empty() ? SimConfig{} : load_config(c.config_path);
    std::optional<std::uint64_t> seed = c.seed;
    if (!seed) {
        if (const char* env = std::getenv("MLM_SEED"); env && *env) {
            char* end = nullptr;
            const auto v = std::strtoull(env, &end, 10);
            if (*end != '\0') throw InvalidParameter(fmt::format("MLM_SEED '{}' is not an unsigned integer", env));
            seed = v;
        }
    }
    if (seed) {
        cfg.noise.rng_seed = *seed;
        cfg.calibration.seed = *seed;
    }
    cfg.validate();
    return cfg;
}

std::string volts(double v) { return fmt::format("{}V", v); }

std::string join_volts(const WritePattern& p) {
    std::string s;
    for (double v : p.port_voltages) {
        if (!s.empty()) s += ' ';
        s += volts(v);
    }
    return s;
}

fs::path output_file(const SimConfig& cfg, const std::string& flag, const std::string& fallback) {
    fs::path p = flag.empty() ? fs::path(cfg.output_dir) / fallback : fs::path(flag);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
    fs::path s = p;
    s.replace_filename(p.stem().string() + suffix + p.extension().string());
    return s;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InvalidParameter("cannot write '" + p.string() + "'");
    return f;
}

void finish_manifest(const std::string& command, const SimConfig& cfg, std::uint64_t seed,
                     const std::vector<fs::path>& outputs, std::ostream& out) {
    RunManifest m = make_manifest(command, dump_config(cfg), seed);
    for (const auto& p : outputs) m.outputs.push_back(p.filename().string());
    for (const auto& p : outputs) write_manifest(manifest_path_for(p), m);
    fmt::print(out, "config hash {}\n", m.config_hash);
}

int cmd_encode(const Common& c, double v_in, std::ostream& out) {
    const SimConfig cfg = load(c);
    const auto& s = cfg.setup;
    const TernaryCode code = encode_behavioral(v_in, s.table);
    const WritePattern ideal = code_to_write_voltages(code, s.encoder.write_levels);
    const WritePattern analog = encode_structural(v_in, s.table, s.encoder);
    fmt::print(out, "{} → {}\n", code.str(), join_volts(ideal));
    fmt::print(out, "structural: {} (quantized {})\n", join_volts(analog), quantize_pattern(analog, s.encoder).str());
    return 0;
}

int cmd_sweep(const Common& c, const std::string& encoder, const std::string& out_flag, std::ostream& out) {
    const SimConfig cfg = load(c);
    const auto& s = cfg.setup;
    const bool structural = encoder == "structural";
    const auto rows = run_input_sweep(s, structural ? EncoderPath::Structural : EncoderPath::Behavioral, cfg.sweep);

    std::vector<TernaryCode> codes;
    std::set<double> levels;
    for (const auto& m : rows) {
        codes.push_back(encode_behavioral(*m.v_in, s.table));
        levels.insert(m.v_out);
    }

    const fs::path csv = output_file(cfg, out_flag, fmt::format("sweep_{}.csv", encoder));
    const fs::path patterns = sibling(csv, "_patterns");
    {
        auto f = open_out(csv);
        write_measurements_csv(f, rows, codes, structural);
        auto g = open_out(patterns);
        write_patterns_csv(g, rows, codes);
    }
    fmt::print(out, "{} points, {} distinct v_out levels\n", rows.size(), levels.size());
    if (structural) {
        const auto grid = sweep_grid(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.step);
        const auto eq = check_equivalence(s.table, s.encoder, grid);
        fmt::print(out, "equivalence: {} mismatches over {} points ({} within 5 mV of a bin edge skipped)\n",
                   eq.mismatches.size(), eq.checked, eq.skipped_near_edge);
    }
    fmt::print(out, "wrote {} and {}\n", csv.string(), patterns.string());
    finish_manifest("sweep --encoder " + encoder, cfg, cfg.noise.rng_seed, {csv, patterns}, out);
    return 0;
}

struct StudyFlags {
    std::vector<double> temps;
    std::optional<std::size_t> trials;
    std::optional<double> sigma;
    std::string out;
};

int cmd_temp_study(const Common& c, const StudyFlags& flags, std::ostream& out) {
    SimConfig cfg = load(c);
    if (!flags.temps.empty()) cfg.study.temperatures_c = flags.temps;
    if (flags.trials) cfg.study.trials = *flags.trials;
    if (flags.sigma) cfg.noise.source_noise_sigma = *flags.sigma;
    cfg.validate();

    std::vector<TernaryCode> codes;
    for (const auto& row : cfg.setup.table.rows) codes.push_back(row.code);
    const StudyResult study =
        run_temperature_study(cfg.setup, codes, cfg.study.temperatures_c, cfg.study.trials, cfg.noise);

    const fs::path csv = output_file(cfg, flags.out, "temp_study.csv");
    const fs::path trials = sibling(csv, "_trials");
    {
        auto f = open_out(csv);
        write_stats_csv(f, study.stats);
        auto g = open_out(trials);
        write_trials_csv(g, study.trials);
    }
    const double drift = max_relative_temperature_drift(study);
    fmt::print(out, "{} codes x {} temperatures x {} trials\n", codes.size(), cfg.study.temperatures_c.size(),
               cfg.study.trials);
    fmt::print(out, "max relative drift of mean v_out: {:.4f}% (bound 1%): {}\n", 100.0 * drift,
               drift <= 0.01 ? "within" : "exceeds");
    fmt::print(out, "wrote {} and {}\n", csv.string(), trials.string());
    finish_manifest("temp-study", cfg, cfg.noise.rng_seed, {csv, trials}, out);
    return 0;
}

struct CalibrateFlags {
    std::string targets;
    std::string start = "config";
    std::string out;
    std::string report;
    bool self_check = false;
};

void print_fit(const CalibrationResult& r, std::ostream& out) {
    const auto& p = r.fitted.device.params;
    fmt::print(out, "residual (sum of squared relative errors): initial {:.6g}, final {:.6g}\n", r.initial_residual,
               r.final_residual);
    fmt::print(out, "fitted: r_on={} r_off={} drift_rate={} v_th_pos={} r_ground={}\n", p.r_on, p.r_off, p.drift_rate,
               p.v_th_pos, r.fitted.topology.r_ground);
    fmt::print(out, "{:>6} {:>12} {:>12} {:>9}\n", "code", "target_V", "sim_V", "rel_err");
    for (const auto& f : r.per_code) {
        fmt::print(out, "{:>6} {:>12.4e} {:>12.4e} {:>+8.2f}%\n", f.code.str(), f.target, f.simulated,
                   100.0 * f.relative_error);
    }
    std::string order;
    for (const auto& code : r.ordering) order += (order.empty() ? "" : " ") + code.str();
    fmt::print(out, "ordering by v_out: {}\n", order);
    fmt::print(out, "pairwise inversions vs table order: {}; min level separation {:.2f}% of span\n", r.inversions,
               100.0 * r.min_separation_fraction);
    fmt::print(out, "{} evaluations, {} of the starts improved on the initial point\n", r.evaluations,
               r.improving_starts);
}

int cmd_calibrate(const Common& c, const CalibrateFlags& flags, std::ostream& out) {
    SimConfig cfg = load(c);
    if (flags.self_check) {
        const RoundTripReport rt = calibration_round_trip(cfg.setup, cfg.calibration);
        fmt::print(out, "self-consistency: worst recovered level error {:.4g}% (bound 0.1%)\n",
                   100.0 * rt.max_relative_error);
        if (rt.max_relative_error > 1e-3) throw CalibrationFailed("self-consistency round trip exceeded 0.1%");
        if (flags.targets.empty()) return 0;
    }
    if (flags.targets.empty()) throw InvalidParameter("calibrate needs --targets (or --self-check)");
    const auto targets = read_targets_csv(flags.targets);

    SimSetup start = cfg.setup;
    if (flags.start == "reference") start = reference_initial_guess();
    const CalibrationResult r = calibrate(start, targets, cfg.calibration);
    print_fit(r, out);

    SimConfig fitted = cfg;
    fitted.setup = r.fitted;
    const fs::path yaml = output_file(cfg, flags.out, "calibrated.yaml");
    const fs::path report = flags.report.empty() ? sibling(yaml, "_fit").replace_extension(".csv") : fs::path(flags.report);
    {
        auto f = open_out(yaml);
        f << dump_config(fitted);
        auto g = open_out(report);
        write_fit_csv(g, r.per_code);
    }
    fmt::print(out, "wrote {} and {}\n", yaml.string(), report.string());
    finish_manifest("calibrate", cfg, cfg.calibration.seed, {yaml, report}, out);
    require_improvement(r);
    return 0;
}

int cmd_levels(const Common& c, std::ostream& out) {
    const SimConfig cfg = load(c);
    const LevelReport rep = write_then_read_all_codes(cfg.setup);
    fmt::print(out, "{:>4} {:>6} {:>12}\n", "rank", "code", "v_out_V");
    for (std::size_t i = 0; i < rep.sorted.size(); ++i) {
        fmt::print(out, "{:>4} {:>6} {:>12.5e}\n", i + 1, rep.sorted[i].code.str(), rep.sorted[i].v_out);
    }
    fmt::print(out, "span {:.5e} V, min separation {:.2f}% of span, {} pairwise inversions vs table order\n", rep.span,
               100.0 * rep.min_separation / rep.span, rep.inversions);
    return 0;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-level memristive memory cell simulator", "mlmsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    Common common;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "YAML configuration file")->check(CLI::ExistingFile);
    };

    double v_in = 0.0;
    auto* encode = app.add_subcommand("encode", "Encode an analog input into a ternary write pattern");
    encode->add_option("v_in", v_in, "Input voltage")->required()->allow_extra_args(false);
    add_common(encode);

    std::string encoder = "behavioral";
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Input sweep through reset/write/read cycles");
    sweep->add_option("--encoder", encoder, "Encoder path")->check(CLI::IsMember({"behavioral", "structural"}));
    sweep->add_option("-o,--out", sweep_out, "Measurement CSV path");
    add_common(sweep);

    StudyFlags study;
    std::uint64_t study_seed = 0;
    auto* temp = app.add_subcommand("temp-study", "Per-code statistics across temperatures");
    temp->add_option("--temps", study.temps, "Temperatures in Celsius")->delimiter(',');
    temp->add_option("--trials", study.trials, "Trials per code and temperature")->check(CLI::Range(2, 1000000));
    auto* seed_opt = temp->add_option("--seed", study_seed, "Noise seed");
    temp->add_option("--sigma", study.sigma, "Source noise sigma in volts")->check(CLI::NonNegativeNumber);
    temp->add_option("-o,--out", study.out, "Statistics CSV path");
    add_common(temp);

    CalibrateFlags cal;
    std::uint64_t cal_seed = 0;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit device parameters to target levels");
    calibrate_cmd->add_option("--targets", cal.targets, "CSV with code and mean_V columns");
    calibrate_cmd->add_option("--start", cal.start, "Starting point")->check(CLI::IsMember({"config", "reference"}));
    auto* cal_seed_opt = calibrate_cmd->add_option("--seed", cal_seed, "Restart seed");
    calibrate_cmd->add_option("-o,--out", cal.out, "Fitted configuration path");
    calibrate_cmd->add_option("--report", cal.report, "Per-code fit CSV path");
    calibrate_cmd->add_flag("--self-check", cal.self_check, "Round-trip on synthetic targets first");
    add_common(calibrate_cmd);

    auto* levels = app.add_subcommand("levels", "Write and read back every code");
    add_common(levels);

    auto* print = app.add_subcommand("print-config", "Print the effective configuration");
    add_common(print);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    if (*seed_opt) common.seed = study_seed;
    if (*cal_seed_opt) common.seed = cal_seed;

    if (encode->parsed()) return cmd_encode(common, v_in, out);
    if (sweep->parsed()) return cmd_sweep(common, encoder, sweep_out, out);
    if (temp->parsed()) return cmd_temp_study(common, study, out);
    if (calibrate_cmd->parsed()) return cmd_calibrate(common, cal, out);
    if (levels->parsed()) return cmd_levels(common, out);
    if (print->parsed()) {
        out << dump_config(load(common));
        return 0;
    }
    return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const DomainError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    } catch (const SimulationError& e) {
        fmt::print(err, "simulation error: {}\n", e.what());
        return 2;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }
}

}  // namespace mlm::cli
