#include "cli/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "perdiv/errors.hpp"

namespace perdiv::cli {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunManifest::hash() const {
  const std::string canonical = subcommand + '\n' + tool_version + '\n' + config.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["tool_version"] = tool_version;
  j["config"] = config;
  j["manifest_hash"] = hash();
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["outputs"] = outputs;
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest '" + path + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace perdiv::cli
