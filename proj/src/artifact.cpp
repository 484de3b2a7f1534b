#include "pelp/artifact.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pelp/error.hpp"

namespace pelp {

std::string Stamp::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  return j.dump();
}

Stamp Stamp::from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    Stamp s;
    s.tool_version = j.at("tool_version").get<std::string>();
    s.config_hash = j.at("config_hash").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad artifact stamp: ") + e.what());
  }
}

std::string config_hash(std::string_view canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical_config) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Stamp make_stamp(std::string_view canonical_config, std::uint64_t seed) {
  Stamp s;
  s.config_hash = config_hash(canonical_config);
  s.seed = seed;
  return s;
}

std::filesystem::path sidecar_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".meta.json";
  return p;
}

void write_sidecar(const std::filesystem::path& artifact, const Stamp& stamp) {
  const auto path = sidecar_path(artifact);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << stamp.to_json() << '\n';
}

std::optional<Stamp> read_sidecar(const std::filesystem::path& artifact) {
  std::ifstream in(sidecar_path(artifact), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return Stamp::from_json(ss.str());
}

}  // namespace pelp
