#include "perdiv/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>

#include "perdiv/errors.hpp"

namespace perdiv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<std::size_t> indexed(const std::string& key, const std::string& prefix) {
  if (key.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string digits = key.substr(prefix.size());
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || idx == 0)
    return std::nullopt;
  return idx;
}

}  // namespace

double parse_real(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError(what + ": expected a finite decimal number, got '" + text + "'");
  return v;
}

ModelFile parse_model(std::istream& in, const std::string& origin) {
  std::map<std::string, double> scalars;
  std::map<std::size_t, double> rates, scales;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value_text = trim(line.substr(eq + 1));
    auto store = [&](auto& map, const auto& k) {
      const double v = parse_real(value_text, where + ": " + key);
      if (!map.emplace(k, v).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    };
    if (key == "drift_c" || key == "sigma" || key == "gamma" || key == "delta") {
      store(scalars, key);
    } else if (auto i = indexed(key, "jump_rate_")) {
      store(rates, *i);
    } else if (auto j = indexed(key, "jump_scale_")) {
      store(scales, *j);
    } else {
      throw ConfigError(where + ": unknown key '" + key +
                        "' (valid: drift_c, sigma, jump_rate_i, jump_scale_i, gamma, delta)");
    }
  }

  ModelFile mf;
  auto need = [&](const char* key) {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw ConfigError(origin + ": missing key '" + key + "'");
    return it->second;
  };
  mf.model.drift_c = need("drift_c");
  mf.model.sigma = need("sigma");
  mf.time_pref.gamma = need("gamma");
  mf.time_pref.delta = need("delta");
  if (rates.size() != scales.size())
    throw ConfigError(origin + ": every jump_rate_i needs a matching jump_scale_i");
  std::size_t expect = 1;
  for (const auto& [i, r] : rates) {
    if (i != expect) throw ConfigError(origin + ": jump phases must be numbered 1..m without gaps");
    auto it = scales.find(i);
    if (it == scales.end()) throw ConfigError(origin + ": jump_rate_" + std::to_string(i) + " has no scale");
    mf.model.jump_phases.push_back({r, it->second});
    ++expect;
  }
  mf.model.validate();
  mf.time_pref.validate();
  return mf;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  return parse_model(in, path);
}

std::string format_model(const ModelFile& mf) {
  auto num = [](double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::ostringstream os;
  os << "drift_c = " << num(mf.model.drift_c) << "\n";
  os << "sigma = " << num(mf.model.sigma) << "\n";
  for (std::size_t i = 0; i < mf.model.jump_phases.size(); ++i) {
    os << "jump_rate_" << i + 1 << " = " << num(mf.model.jump_phases[i].rate) << "\n";
    os << "jump_scale_" << i + 1 << " = " << num(mf.model.jump_phases[i].scale) << "\n";
  }
  os << "gamma = " << num(mf.time_pref.gamma) << "\n";
  os << "delta = " << num(mf.time_pref.delta) << "\n";
  return os.str();
}

}  // namespace perdiv
