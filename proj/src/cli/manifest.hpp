#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace perdiv::cli {

inline constexpr const char* kToolVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& bytes);

struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> outputs;

  // Hex FNV-1a over subcommand, version and config; excludes wall clock.
  std::string hash() const;
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace perdiv::cli
