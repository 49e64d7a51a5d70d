#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlm/cell.hpp"
#include "mlm/device.hpp"
#include "mlm/encoder.hpp"

namespace mlm {

inline constexpr double kZeroCelsius = 273.15;

struct CycleConfig {
    double v_reset = 4.0;
    double t_reset = 0.6e-3;
    double v_read = 0.05;
    double t_write = 0.6e-3;
    double t_read = 0.2e-3;
    double dt = 1.0e-6;
    double temperature = kZeroCelsius + 20.0;  ///< kelvin
    double read_tolerance = 1.0e-3;            ///< max |dw| allowed during a read
    /// Hold the reset port at 0 V while writing so each device returns its
    /// write current locally instead of through the shared ground resistor.
    bool write_return_via_reset = true;

    /// Throws InvalidParameter. t_reset and t_write may be 0 (phase skipped).
    void validate() const;
};

struct DeviceSetup {
    MemristorParams params;
    DeviceModelKind kind = DeviceModelKind::ThresholdDrift;
};

struct NoiseConfig {
    double source_noise_sigma = 0.0;  ///< volts, per phase and per active source
    std::uint64_t rng_seed = 1;
};

/// Everything needed to simulate one cell end to end.
struct SimSetup {
    CellTopology topology;
    DeviceSetup device;
    CycleConfig cycle;
    BinTable table = BinTable::reference();
    EncoderConfig encoder;

    void validate() const;
};

struct Measurement {
    std::optional<double> v_in;
    TernaryCode code;
    WritePattern applied;
    double v_out = 0.0;
    double temperature = 0.0;  ///< kelvin
    std::vector<double> final_w;
    double read_disturbance = 0.0;  ///< largest |dw| over the read phase

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Seeded additive noise on source amplitudes, drawn once per phase.
struct Perturbation {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Reset, write, read. Device states are updated in place. The recorded
/// code is the pattern quantized to logic levels.
///
/// Throws NonQuiescentRead when a read moves any device by more than
/// cfg.read_tolerance; SingularNetwork propagates from the solver.
Measurement run_cycle(const MlmCell& cell, std::span<MemristorState> devices, const DeviceSetup& device,
                      const WritePattern& pattern, const CycleConfig& cfg, const Perturbation& noise = {});

/// Fresh cell, full cycle for one code.
Measurement simulate_code(const SimSetup& setup, const MlmCell& cell, const TernaryCode& code,
                          const Perturbation& noise = {});

enum class EncoderPath { Behavioral, Structural };

struct SweepSpec {
    double start = 0.0;
    double stop = 3.0;
    double step = 0.05;
};

/// One full cycle on a fresh cell per input point.
std::vector<Measurement> run_input_sweep(const SimSetup& setup, EncoderPath path, const SweepSpec& sweep = {});

struct StudyStats {
    TernaryCode code;
    double temperature_c = 0.0;
    double mean = 0.0;
    double stdev = 0.0;  ///< sample standard deviation
    std::size_t trials = 0;
};

struct TrialRecord {
    TernaryCode code;
    double temperature_c = 0.0;
    std::size_t trial = 0;
    double v_out = 0.0;
};

struct StudyResult {
    std::vector<StudyStats> stats;  ///< code-major, then temperature
    std::vector<TrialRecord> trials;
    double max_read_disturbance = 0.0;
};

/// Per-code, per-temperature statistics over seeded noisy trials. The
/// noise stream of a trial depends only on (seed, code, temperature, trial).
StudyResult run_temperature_study(const SimSetup& setup, std::span<const TernaryCode> codes,
                                  std::span<const double> temperatures_c, std::size_t trials,
                                  const NoiseConfig& noise);

/// Largest relative spread of a code's mean across temperatures.
double max_relative_temperature_drift(const StudyResult& study);

struct LevelReport {
    std::vector<Measurement> sorted;        ///< ascending v_out
    std::vector<std::size_t> table_rows;    ///< table row of each sorted entry
    std::size_t inversions = 0;             ///< pairwise, relative to table order
    double span = 0.0;
    double min_separation = 0.0;
};

/// Writes and reads back every code of the table. Throws DegenerateLevels
/// when two levels are closer than min_separation_fraction * span.
LevelReport write_then_read_all_codes(const SimSetup& setup, double min_separation_fraction = 0.02);

/// Number of pairs (i < j) with values[i] > values[j].
std::size_t count_inversions(std::span<const double> values);

}  // namespace mlm
