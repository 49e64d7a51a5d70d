#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mlm {

std::string_view version();

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

struct RunManifest {
    std::string command;
    std::string config_hash;  ///< SHA-256 of the canonical config text
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string timestamp;    ///< UTC, ISO 8601
    std::vector<std::string> outputs;

    std::string to_json() const;
};

/// Honors SOURCE_DATE_EPOCH so runs can be pinned in time.
std::string utc_timestamp();

RunManifest make_manifest(std::string command, std::string_view canonical_config, std::uint64_t seed);

/// `<csv>.manifest.json` next to the given output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace mlm
