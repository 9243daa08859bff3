#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace chs {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Reproducibility sidecar written next to every output set. Two runs whose
// manifests agree on everything but the timestamp produce byte-identical
// result files.
struct RunManifest {
    std::string command;
    nlohmann::json config;  // fully resolved configuration
    std::uint64_t master_seed = 0;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
    std::string tool_version{kToolVersion};
    std::string timestamp;  // ISO 8601 UTC

    nlohmann::json to_json() const;
};

std::string fnv1a64_hex(std::string_view bytes);
std::string digest_file(const std::string& path);
std::string utc_timestamp();

// Writes via a temp file plus rename so interrupted runs never leave a
// partial file behind.
void write_file_atomic(const std::string& path, std::string_view contents);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace chs
