#include "mlm/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "mlm/errors.hpp"

#ifndef MLM_VERSION
#define MLM_VERSION "0.0.0"
#endif

namespace mlm {

std::string_view version() { return MLM_VERSION; }

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["timestamp"] = timestamp;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

std::string utc_timestamp() {
    std::chrono::sys_seconds now;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        now = std::chrono::sys_seconds{std::chrono::seconds{std::strtoll(epoch, nullptr, 10)}};
    } else {
        now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

RunManifest make_manifest(std::string command, std::string_view canonical_config, std::uint64_t seed) {
    RunManifest m;
    m.command = std::move(command);
    m.config_hash = sha256_hex(canonical_config);
    m.seed = seed;
    m.tool_version = std::string(version());
    m.timestamp = utc_timestamp();
    return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    std::filesystem::path p = output;
    p += ".manifest.json";
    return p;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << manifest.to_json();
}

}  // namespace mlm
