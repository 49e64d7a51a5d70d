#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mlm/calibration.hpp"
#include "mlm/controller.hpp"

namespace mlm {

/// v_in, code, [quantized_code,] temp_C, trial, v_out. The code column is
/// the encoder's logic code; quantized_code is the code read back from the
/// analog write pattern (structural sweeps).
void write_measurements_csv(std::ostream& out, std::span<const Measurement> rows, std::span<const TernaryCode> codes,
                            bool with_quantized);

/// v_in, code, v_w1 .. v_wn: the applied per-port write staircase.
void write_patterns_csv(std::ostream& out, std::span<const Measurement> rows, std::span<const TernaryCode> codes);

/// v_in, code, temp_C, trial, v_out for every trial of a study.
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);

/// code, temp_C, mean_V, stdev_V.
void write_stats_csv(std::ostream& out, std::span<const StudyStats> stats);

/// code, target_V, simulated_V, rel_error.
void write_fit_csv(std::ostream& out, std::span<const CodeFit> fits);

/// Reads a header row with `code` and a value column (`mean_V` or `v_out`),
/// then one row per code. Throws ConfigError with the offending line.
std::vector<CalibrationTarget> read_targets_csv(const std::filesystem::path& path);
std::vector<CalibrationTarget> parse_targets_csv(std::istream& in);

}  // namespace mlm
