#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace pelp {

inline constexpr std::string_view kToolVersion = "0.3.1";

/// Provenance recorded with every artifact a command writes.
struct Stamp {
  std::string tool_version = std::string(kToolVersion);
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;

  /// Compact JSON object {"tool_version", "config_hash", "seed"}.
  std::string to_json() const;
  static Stamp from_json(std::string_view json);
  bool operator==(const Stamp&) const = default;
};

/// FNV-1a of a canonical configuration string, as 16 lowercase hex digits.
std::string config_hash(std::string_view canonical_config);

Stamp make_stamp(std::string_view canonical_config, std::uint64_t seed);

/// Formats whose bytes are fixed (text logs, pair files) carry their stamp in
/// a sidecar file next to them: "<path>.meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& artifact);
void write_sidecar(const std::filesystem::path& artifact, const Stamp& stamp);
std::optional<Stamp> read_sidecar(const std::filesystem::path& artifact);

}  // namespace pelp
