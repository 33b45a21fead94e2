#pragma once

#include <iosfwd>
#include <string>

#include "perdiv/levy_model.hpp"

namespace perdiv {

struct ModelFile {
  ModelSpec model;
  TimePreference time_pref;
};

// Flat `key = value` text; `#` starts a comment. Keys: drift_c, sigma,
// jump_rate_i, jump_scale_i (i = 1..m), gamma, delta. Throws ConfigError.
ModelFile parse_model(std::istream& in, const std::string& origin = "<input>");
ModelFile load_model_file(const std::string& path);

// Strict decimal parse of the whole string.
double parse_real(const std::string& text, const std::string& what);

std::string format_model(const ModelFile& mf);

}  // namespace perdiv
