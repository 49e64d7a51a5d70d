#include "mlm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mlm/errors.hpp"

namespace mlm {

void CycleConfig::validate() const {
    if (!(t_reset >= 0.0) || !(t_write >= 0.0)) throw InvalidParameter("cycle: durations must be >= 0");
    if (!(t_read > 0.0)) throw InvalidParameter("cycle: t_read must be > 0");
    if (!(dt > 0.0)) throw InvalidParameter("cycle: dt must be > 0");
    double shortest = t_read;
    if (t_reset > 0.0) shortest = std::min(shortest, t_reset);
    if (t_write > 0.0) shortest = std::min(shortest, t_write);
    if (dt > shortest / 10.0 * (1.0 + 1e-12)) {
        throw InvalidParameter(fmt::format("cycle: dt {} exceeds a tenth of the shortest phase", dt));
    }
    if (!(temperature > 0.0)) throw InvalidParameter("cycle: temperature must be > 0 K");
    if (!(read_tolerance > 0.0)) throw InvalidParameter("cycle: read_tolerance must be > 0");
}

void SimSetup::validate() const {
    topology.validate();
    device.params.validate();
    cycle.validate();
    table.validate();
    encoder.validate();
    if (table.rows.front().code.size() != static_cast<std::size_t>(topology.n_subcells)) {
        throw InvalidParameter(fmt::format("bin table codes have {} trits but the cell has {} sub-cells",
                                           table.rows.front().code.size(), topology.n_subcells));
    }
}

namespace {

class PhaseRunner {
public:
    PhaseRunner(const MlmCell& cell, std::span<MemristorState> devices, const DeviceSetup& device,
                const CycleConfig& cfg)
        : cell_(cell), devices_(devices), device_(device), cfg_(cfg), resistances_(devices.size()) {}

    /// Integrates one phase; returns the mean probe voltage over its steps.
    double run(std::span<const SourceDrive> drives, double duration) {
        const auto steps = static_cast<long>(std::llround(duration / cfg_.dt));
        if (steps <= 0) return 0.0;
        DcSystem system(cell_.netlist, drives);
        const auto probe = static_cast<Eigen::Index>(cell_.probe.value);
        const Eigen::VectorXd* v = nullptr;
        double probe_sum = 0.0;
        bool dirty = true;
        for (long s = 0; s < steps; ++s) {
            if (dirty) {
                for (std::size_t i = 0; i < devices_.size(); ++i) {
                    resistances_[i] = resistance(devices_[i], device_.params, cfg_.temperature);
                }
                v = &system.solve_voltages(resistances_);
                dirty = false;
            }
            probe_sum += (*v)(probe);
            for (std::size_t i = 0; i < devices_.size(); ++i) {
                const double across = (*v)(cell_.device_positive[i].value) - (*v)(cell_.device_negative[i].value);
                const MemristorState next = step(devices_[i], across, cfg_.dt, device_.params, device_.kind);
                if (next != devices_[i]) {
                    devices_[i] = next;
                    dirty = true;
                }
            }
        }
        return probe_sum / static_cast<double>(steps);
    }

    /// Read without integration, for the instantaneous device model.
    double read_once(std::span<const SourceDrive> drives) {
        for (std::size_t i = 0; i < devices_.size(); ++i) {
            resistances_[i] = resistance(devices_[i], device_.params, cfg_.temperature);
        }
        DcSystem system(cell_.netlist, drives);
        return system.solve_voltages(resistances_)(static_cast<Eigen::Index>(cell_.probe.value));
    }

private:
    const MlmCell& cell_;
    std::span<MemristorState> devices_;
    const DeviceSetup& device_;
    const CycleConfig& cfg_;
    std::vector<double> resistances_;
};

class SourceNoise {
public:
    explicit SourceNoise(const Perturbation& p) : sigma_(p.sigma), rng_(p.seed) {}

    void apply(std::vector<SourceDrive>& drives) {
        if (sigma_ <= 0.0) return;
        for (auto& d : drives) {
            if (d.enabled) d.volts += gauss_(rng_) * sigma_;
        }
    }

private:
    double sigma_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t code, std::size_t temp, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(code), static_cast<std::uint32_t>(temp),
                      static_cast<std::uint32_t>(trial)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

Measurement run_cycle(const MlmCell& cell, std::span<MemristorState> devices, const DeviceSetup& device,
                      const WritePattern& pattern, const CycleConfig& cfg, const Perturbation& noise) {
    if (pattern.port_voltages.size() != cell.subcells()) {
        throw InvalidParameter(fmt::format("pattern has {} port voltages, cell has {} write ports",
                                           pattern.port_voltages.size(), cell.subcells()));
    }
    if (devices.size() != cell.netlist.device_count()) {
        throw InvalidParameter(fmt::format("cell has {} devices, {} states given", cell.netlist.device_count(),
                                           devices.size()));
    }
    cfg.validate();

    PhaseRunner runner(cell, devices, device, cfg);
    SourceNoise jitter(noise);

    // Reset: erase pulse on the reset rail, write ports held at 0 V as the
    // return path; read port open.
    std::vector<SourceDrive> reset = cell.idle_drives();
    reset[cell.reset_port] = {true, cfg.v_reset};
    for (std::size_t slot : cell.write_ports) reset[slot] = {true, 0.0};
    jitter.apply(reset);

    std::vector<SourceDrive> write = cell.idle_drives();
    for (std::size_t p = 0; p < cell.subcells(); ++p) write[cell.write_ports[p]] = {true, pattern.port_voltages[p]};
    if (cfg.write_return_via_reset) write[cell.reset_port] = {true, 0.0};
    jitter.apply(write);

    std::vector<SourceDrive> read = cell.idle_drives();
    read[cell.read_port] = {true, cfg.v_read};
    jitter.apply(read);

    Measurement m;
    m.applied = pattern;
    m.code = quantize_pattern(pattern, EncoderConfig{});
    m.temperature = cfg.temperature;

    if (device.kind == DeviceModelKind::IdealThreeState) {
        if (cfg.t_reset > 0.0) {
            for (auto& s : devices) s = step(s, -reset[cell.reset_port].volts, cfg.dt, device.params, device.kind);
        }
        if (cfg.t_write > 0.0) {
            for (std::size_t p = 0; p < devices.size(); ++p) {
                devices[p] = step(devices[p], write[cell.write_ports[p]].volts, cfg.dt, device.params, device.kind);
            }
        }
        m.v_out = runner.read_once(read);
    } else {
        runner.run(reset, cfg.t_reset);
        runner.run(write, cfg.t_write);
        std::vector<MemristorState> before(devices.begin(), devices.end());
        m.v_out = runner.run(read, cfg.t_read);
        for (std::size_t i = 0; i < devices.size(); ++i) {
            m.read_disturbance = std::max(m.read_disturbance, std::abs(devices[i].w - before[i].w));
        }
        if (m.read_disturbance >= cfg.read_tolerance) {
            throw NonQuiescentRead(fmt::format("read moved a device state by {:.3g} (limit {:.3g})",
                                               m.read_disturbance, cfg.read_tolerance));
        }
    }

    m.final_w.reserve(devices.size());
    for (const auto& s : devices) m.final_w.push_back(s.w);
    return m;
}

Measurement simulate_code(const SimSetup& setup, const MlmCell& cell, const TernaryCode& code,
                          const Perturbation& noise) {
    std::vector<MemristorState> devices(cell.netlist.device_count(), reset_state(setup.device.params));
    return run_cycle(cell, devices, setup.device, code_to_write_voltages(code, setup.encoder.write_levels),
                     setup.cycle, noise);
}

std::vector<Measurement> run_input_sweep(const SimSetup& setup, EncoderPath path, const SweepSpec& sweep) {
    setup.validate();
    const MlmCell cell = build_mlm_cell(setup.topology);
    const std::vector<double> grid = sweep_grid(sweep.start, sweep.stop, sweep.step);
    std::vector<Measurement> out;
    out.reserve(grid.size());
    for (double v_in : grid) {
        const WritePattern pattern =
            path == EncoderPath::Behavioral
                ? code_to_write_voltages(encode_behavioral(v_in, setup.table), setup.encoder.write_levels)
                : encode_structural(v_in, setup.table, setup.encoder);
        std::vector<MemristorState> devices(cell.netlist.device_count(), reset_state(setup.device.params));
        Measurement m = run_cycle(cell, devices, setup.device, pattern, setup.cycle);
        m.v_in = v_in;
        out.push_back(std::move(m));
    }
    return out;
}

StudyResult run_temperature_study(const SimSetup& setup, std::span<const TernaryCode> codes,
                                  std::span<const double> temperatures_c, std::size_t trials,
                                  const NoiseConfig& noise) {
    if (trials < 2) throw InvalidParameter("temperature study needs at least 2 trials");
    if (!(noise.source_noise_sigma >= 0.0)) throw InvalidParameter("noise sigma must be >= 0");
    setup.validate();
    const MlmCell cell = build_mlm_cell(setup.topology);

    StudyResult result;
    for (std::size_t c = 0; c < codes.size(); ++c) {
        for (std::size_t t = 0; t < temperatures_c.size(); ++t) {
            SimSetup at = setup;
            at.cycle.temperature = temperatures_c[t] + kZeroCelsius;
            // Welford: identical trials give exactly zero spread.
            double mean = 0.0;
            double m2 = 0.0;
            for (std::size_t k = 0; k < trials; ++k) {
                const Perturbation p{noise.source_noise_sigma, trial_seed(noise.rng_seed, c, t, k)};
                const Measurement m = simulate_code(at, cell, codes[c], p);
                result.max_read_disturbance = std::max(result.max_read_disturbance, m.read_disturbance);
                result.trials.push_back({codes[c], temperatures_c[t], k, m.v_out});
                const double delta = m.v_out - mean;
                mean += delta / static_cast<double>(k + 1);
                m2 += delta * (m.v_out - mean);
            }
            result.stats.push_back(
                {codes[c], temperatures_c[t], mean, std::sqrt(m2 / static_cast<double>(trials - 1)), trials});
        }
    }
    return result;
}

double max_relative_temperature_drift(const StudyResult& study) {
    double worst = 0.0;
    for (std::size_t i = 0; i < study.stats.size();) {
        std::size_t j = i;
        double lo = study.stats[i].mean;
        double hi = lo;
        while (j < study.stats.size() && study.stats[j].code == study.stats[i].code) {
            lo = std::min(lo, study.stats[j].mean);
            hi = std::max(hi, study.stats[j].mean);
            ++j;
        }
        if (study.stats[i].mean != 0.0) worst = std::max(worst, (hi - lo) / std::abs(study.stats[i].mean));
        i = j;
    }
    return worst;
}

std::size_t count_inversions(std::span<const double> values) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            if (values[i] > values[j]) ++n;
        }
    }
    return n;
}

LevelReport write_then_read_all_codes(const SimSetup& setup, double min_separation_fraction) {
    setup.validate();
    const MlmCell cell = build_mlm_cell(setup.topology);
    std::vector<Measurement> by_row;
    std::vector<double> v_out;
    for (const BinRow& row : setup.table.rows) {
        by_row.push_back(simulate_code(setup, cell, row.code));
        v_out.push_back(by_row.back().v_out);
    }

    LevelReport report;
    report.inversions = count_inversions(v_out);
    std::vector<std::size_t> order(by_row.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v_out[a] < v_out[b]; });
    report.table_rows = order;
    for (std::size_t idx : order) report.sorted.push_back(by_row[idx]);

    report.span = report.sorted.back().v_out - report.sorted.front().v_out;
    report.min_separation = report.span;
    std::size_t tightest = 1;
    for (std::size_t i = 1; i < report.sorted.size(); ++i) {
        const double gap = report.sorted[i].v_out - report.sorted[i - 1].v_out;
        if (gap < report.min_separation) {
            report.min_separation = gap;
            tightest = i;
        }
    }
    if (report.sorted.size() > 1 &&
        (!(report.span > 0.0) || report.min_separation < min_separation_fraction * report.span)) {
        throw DegenerateLevels(fmt::format("codes {} and {} read back {:.4g} V apart (< {:.0f}% of the {:.4g} V span)",
                                           report.sorted[tightest - 1].code.str(), report.sorted[tightest].code.str(),
                                           report.min_separation, 100.0 * min_separation_fraction, report.span));
    }
    return report;
}

}  // namespace mlm
