#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mlm/calibration.hpp"
#include "mlm/controller.hpp"

namespace mlm {

struct StudyConfig {
    std::vector<double> temperatures_c{20.0, 30.0, 40.0, 50.0};
    std::size_t trials = 10;
};

/// One simulator document. Every field is optional; omitted fields keep the
/// reference defaults, so an empty document reproduces the reference setup.
struct SimConfig {
    SimSetup setup;
    NoiseConfig noise;
    SweepSpec sweep;
    StudyConfig study;
    CalibrationOptions calibration;
    std::string output_dir = ".";

    /// Throws InvalidParameter / InvalidTopology.
    void validate() const;
};

/// Parses YAML text. Unknown keys, type mismatches and syntax errors throw
/// ConfigError carrying the offending line.
SimConfig parse_config(std::string_view text);

/// Reads and parses a file. Throws ConfigError when it cannot be read.
SimConfig load_config(const std::filesystem::path& path);

/// Canonical YAML with every field spelled out. Parsing the result yields
/// an equal configuration; equal configurations give identical text.
std::string dump_config(const SimConfig& config);

}  // namespace mlm
