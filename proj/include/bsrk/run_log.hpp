#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsrk {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a digest of a file's bytes, for input provenance in run logs.
std::uint64_t file_digest(const std::string& path);

/// Writes <artifact>.log.json with tool version, subcommand, seeds, and
/// input digests. Timestamps are the only non-deterministic field.
void write_run_log(const std::string& artifact_path, const std::string& subcommand,
                   const std::vector<std::string>& inputs,
                   const std::vector<std::pair<std::string, std::string>>& params);

} // namespace bsrk
