#include "cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/csv.hpp"
#include "cli/manifest.hpp"
#include "cli/svg.hpp"
#include "perdiv/errors.hpp"
#include "perdiv/model_io.hpp"
#include "perdiv/optimizer.hpp"
#include "perdiv/simulator.hpp"
#include "perdiv/valuation.hpp"

namespace perdiv::cli {

namespace {

using nlohmann::json;

struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  int n = 11;

  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

Grid parse_grid(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos)
    throw ConfigError("--x-grid: expected lo:hi:n, got '" + text + "'");
  Grid g;
  g.lo = parse_real(text.substr(0, a), "--x-grid lo");
  g.hi = parse_real(text.substr(a + 1, b - a - 1), "--x-grid hi");
  const double n = parse_real(text.substr(b + 1), "--x-grid n");
  if (!(n >= 1.0) || n != std::floor(n) || n > 1e7) throw ConfigError("--x-grid: n must be an integer in [1, 1e7]");
  g.n = static_cast<int>(n);
  if (!(g.hi >= g.lo)) throw ConfigError("--x-grid: need lo <= hi");
  return g;
}

json model_json(const ModelFile& mf) {
  json j;
  j["drift_c"] = mf.model.drift_c;
  j["sigma"] = mf.model.sigma;
  json phases = json::array();
  for (const auto& ph : mf.model.jump_phases) phases.push_back({{"rate", ph.rate}, {"scale", ph.scale}});
  j["jump_phases"] = phases;
  j["gamma"] = mf.time_pref.gamma;
  j["delta"] = mf.time_pref.delta;
  return j;
}

// Writes to --out when given (plus a manifest sidecar), else to stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), out_(&fallback) {
    if (!path_.empty()) {
      file_ = std::make_unique<std::ofstream>(path_);
      if (!*file_) throw ConfigError("cannot open output file '" + path_ + "'");
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }
  void finish(RunManifest& m) {
    if (path_.empty()) return;
    m.outputs.push_back(path_);
    file_->close();
    m.write(path_ + ".manifest.json");
  }

 private:
  std::string path_;
  std::ostream* out_;
  std::unique_ptr<std::ofstream> file_;
};

struct Common {
  std::string model_path;
  std::string out_path;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--model", c.model_path, "model file (key = value)")->required();
  sub->add_option("--out", c.out_path, "output file (default: stdout)");
}

struct StrategyArgs {
  double bu = 0.0, bl = 0.0, kappa = 0.0;
};

void add_strategy(CLI::App* sub, StrategyArgs& s) {
  sub->add_option("--bu", s.bu, "upper barrier b_u")->required();
  sub->add_option("--bl", s.bl, "post-payment level b_l")->required();
  sub->add_option("--kappa", s.kappa, "fixed cost per payment")->required();
}

Strategy to_strategy(const StrategyArgs& a) {
  Strategy s{a.bu, a.bl, a.kappa};
  if (!s.admissible() || !(s.b_u > 0.0))
    throw ConfigError("strategy needs 0 <= bl <= bu, bu > 0, kappa >= 0 and bu - bl >= kappa");
  return s;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- scale eval -----------------------------------------------------------

int cmd_scale_eval(const Common& c, const std::string& grid_text, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  const auto grid = parse_grid(grid_text);
  const ScaleContext ctx(mf.model, mf.time_pref);
  RunManifest m;
  m.subcommand = "scale eval";
  m.config = {{"model", model_json(mf)}, {"x_grid", grid_text}};
  Sink sink(c.out_path, out);
  CsvWriter csv(sink.stream(), {"x", "W_delta", "Z_delta", "Z_gamma_delta", "J", "H"});
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.at(i);
    csv.row({x, ctx.W(QTag::delta, x), ctx.Z(QTag::delta, x), ctx.Z_gamma_delta(x), ctx.J(x), ctx.H(x)});
  }
  m.wall_clock_seconds = elapsed(t0);
  sink.finish(m);
  return kOk;
}

// ---- value ----------------------------------------------------------------

int cmd_value(const Common& c, const StrategyArgs& sa, const std::string& grid_text, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  const auto grid = parse_grid(grid_text);
  if (grid.lo < 0.0) throw ConfigError("--x-grid: surplus values must be >= 0");
  const auto s = to_strategy(sa);
  const ScaleContext ctx(mf.model, mf.time_pref);
  const ValueFunction v(ctx, s);
  RunManifest m;
  m.subcommand = "value";
  m.config = {{"model", model_json(mf)}, {"bu", s.b_u}, {"bl", s.b_l}, {"kappa", s.kappa}, {"x_grid", grid_text}};
  Sink sink(c.out_path, out);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvWriter csv(sink.stream(), {"x", "value", "dvalue", "residual_gen", "residual_hjb"});
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.at(i);
    const bool interior = x > 0.0;
    csv.row({x, v(x), interior ? v.derivative(x) : nan, interior ? generator_residual(v, x) : nan,
             interior && x >= s.kappa ? hjb_evaluate(v, x).residual : nan});
  }
  m.wall_clock_seconds = elapsed(t0);
  sink.finish(m);
  return kOk;
}

// ---- optimize -------------------------------------------------------------

int cmd_optimize(const Common& c, double kappa, bool with_kappa0, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  if (!(kappa >= 0.0)) throw ConfigError("--kappa must be >= 0");
  const ScaleContext ctx(mf.model, mf.time_pref);
  const auto sol = solve_optimal(ctx, kappa);
  RunManifest m;
  m.subcommand = "optimize";
  m.config = {{"model", model_json(mf)}, {"kappa", kappa}, {"kappa0", with_kappa0}};
  json j;
  j["b_star"] = sol.b_star;
  j["b_u_star"] = sol.b_u_star;
  j["b_l_star"] = sol.b_l_star;
  j["liquidation"] = sol.liquidation;
  j["residuals"] = {{"gamma", sol.diagnostics.gamma_residual},
                    {"unit_derivative", sol.diagnostics.g_residual},
                    {"smoothness_gap", sol.diagnostics.smoothness_gap}};
  if (with_kappa0) {
    const double k0 = solve_kappa0(ctx);
    j["kappa0"] = std::isfinite(k0) ? json(k0) : json("inf");
  }
  j["manifest_hash"] = m.hash();
  Sink sink(c.out_path, out);
  sink.stream() << j.dump(2) << '\n';
  m.wall_clock_seconds = elapsed(t0);
  sink.finish(m);
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string param = "kappa";
  double from = 0.0, to = 1.0, kappa = 0.06;
  int steps = 10;
  std::string svg_path;
};

int cmd_sweep(const Common& c, const SweepArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  const auto param = parse_sweep_param(a.param);
  if (a.steps < 2) throw ConfigError("--steps must be >= 2");
  if (!(a.to > a.from)) throw ConfigError("--from must be below --to");
  if (param == SweepParam::kappa && a.from < 0.0) throw ConfigError("--from: kappa must be >= 0");
  if (param != SweepParam::kappa && !(a.from > 0.0)) throw ConfigError("--from: gamma and delta must be > 0");
  const auto rows = sweep(mf.model, mf.time_pref, a.kappa, param, a.from, a.to, a.steps);
  RunManifest m;
  m.subcommand = "sweep";
  m.config = {{"model", model_json(mf)}, {"param", a.param}, {"from", a.from}, {"to", a.to},
              {"steps", a.steps}, {"kappa", a.kappa}};
  Sink sink(c.out_path, out);
  CsvWriter csv(sink.stream(), {"param", "value", "b_star", "b_u_star", "b_l_star", "liquidation", "status"});
  for (const auto& r : rows) {
    std::string status = r.status;
    for (auto& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    csv.row({r.param, format_number(r.value), format_number(r.b_star), format_number(r.b_u_star),
             format_number(r.b_l_star), r.liquidation ? "1" : "0", status});
  }
  if (!a.svg_path.empty()) {
    LinePlot plot;
    plot.title = "Optimal barriers vs " + a.param;
    plot.x_label = a.param;
    plot.y_label = "barrier level";
    plot.note = "manifest " + m.hash();
    Series bs{"b*", "#555555", {}}, bu{"b_u*", "#1f77b4", {}}, bl{"b_l*", "#d62728", {}};
    for (const auto& r : rows) {
      plot.x.push_back(r.value);
      bs.y.push_back(r.b_star);
      bu.y.push_back(r.b_u_star);
      bl.y.push_back(r.b_l_star);
    }
    plot.series = {bs, bu, bl};
    std::ofstream svg(a.svg_path);
    if (!svg) throw ConfigError("cannot open svg file '" + a.svg_path + "'");
    write_svg(svg, plot);
    m.outputs.push_back(a.svg_path);
  }
  m.wall_clock_seconds = elapsed(t0);
  sink.finish(m);
  for (const auto& r : rows)
    if (r.status != "ok") return kSolverFailure;
  return kOk;
}

// ---- simulate -------------------------------------------------------------

struct SimArgs {
  double x0 = 0.0;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt = 0.0;
  double horizon = 0.0;
  bool antithetic = false;
  bool no_bridge = false;
};

int cmd_simulate(const Common& c, const StrategyArgs& sa, const SimArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  Strategy s{sa.bu, sa.bl, sa.kappa};
  if (!s.admissible()) throw ConfigError("strategy needs 0 <= bl <= bu, kappa >= 0 and bu - bl >= kappa");
  SimConfig cfg;
  cfg.paths = a.paths;
  cfg.seed = a.seed;
  cfg.dt = a.dt > 0.0 ? a.dt : max_time_step(mf.model, mf.time_pref);
  cfg.horizon_T = a.horizon > 0.0 ? a.horizon : default_horizon(mf.model, mf.time_pref, s, a.x0);
  cfg.bridge_correction = !a.no_bridge;
  const auto est = a.antithetic ? simulate_value_antithetic(mf.model, mf.time_pref, s, a.x0, cfg)
                                : simulate_value(mf.model, mf.time_pref, s, a.x0, cfg);
  RunManifest m;
  m.subcommand = "simulate";
  m.config = {{"model", model_json(mf)}, {"bu", s.b_u},          {"bl", s.b_l},
              {"kappa", s.kappa},        {"x0", a.x0},          {"paths", cfg.paths},
              {"seed", cfg.seed},        {"dt", cfg.dt},        {"horizon", cfg.horizon_T},
              {"antithetic", a.antithetic}, {"bridge", cfg.bridge_correction}};
  json j;
  j["mean"] = est.mean;
  j["std_error"] = est.std_error;
  j["ruin_fraction"] = est.paths_ruined_fraction;
  j["truncation_bound"] = est.truncation_bound;
  j["manifest_hash"] = m.hash();
  Sink sink(c.out_path, out);
  sink.stream() << j.dump(2) << '\n';
  m.wall_clock_seconds = elapsed(t0);
  sink.finish(m);
  return kOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  double kappa = 0.06;
  double perturb_bu = 0.0;
  double tol_gap = 1e-10;
  double tol_gamma = 1e-10;
  double tol_unit = 1e-8;
  double tol_gen = 1e-6;
  double tol_hjb = 1e-5;
};

struct Check {
  std::string name;
  double measured;
  double tolerance;
  bool pass;
};

int cmd_verify(const Common& c, const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mf = load_model_file(c.model_path);
  if (!(a.kappa >= 0.0)) throw ConfigError("--kappa must be >= 0");
  const ScaleContext ctx(mf.model, mf.time_pref);
  const auto sol = solve_optimal(ctx, a.kappa);
  Strategy s = sol.strategy();
  s.b_u += a.perturb_bu;
  if (!s.admissible() || !(s.b_u > 0.0)) throw ConfigError("--perturb-bu leaves an inadmissible strategy");
  const ValueFunction v(ctx, s);
  const double bu = s.b_u, bl = s.b_l;

  std::vector<Check> checks;
  auto add = [&](const std::string& name, double measured, double tol, bool pass) {
    checks.push_back({name, measured, tol, pass});
  };
  const double gap = v.smoothness_gap();
  add("smoothness_gap", std::abs(gap), a.tol_gap, std::abs(gap) <= a.tol_gap);
  const double gam = Gamma_fn(ctx, bl, bu - bl, s.kappa);
  add("gamma_root", std::abs(gam), a.tol_gamma, std::abs(gam) <= a.tol_gamma);
  if (sol.liquidation) {
    const double g0 = -ctx.H_over_J(bu) * ctx.J_prime(bu) + ctx.H_prime(bu);
    add("liquidation_condition", g0, 1.0, g0 <= 1.0 && bl == 0.0);
  } else {
    const double dev = std::abs(v.derivative(bl) - 1.0);
    add("unit_derivative_at_bl", dev, a.tol_unit, dev <= a.tol_unit);
  }
  {
    const bool ordered = bl <= sol.b_star + 1e-12 && (sol.b_star == 0.0 || sol.b_star <= bu) && bu - bl > s.kappa;
    add("barrier_order", bu - bl - s.kappa, 0.0, ordered);
  }
  double min_v = v(0.0) == 0.0 ? 0.0 : -1.0, min_dv = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 200; ++i) {
    const double x = 3.0 * bu * i / 200.0;
    min_v = std::min(min_v, v(x));
    min_dv = std::min(min_dv, v.derivative(x));
  }
  add("value_nonnegative", min_v, 0.0, min_v >= -1e-12);
  add("derivative_nonnegative", min_dv, 0.0, min_dv >= -1e-12);
  double gen_lo = 0.0, gen_hi = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double x = bu * i / 21.0;
    gen_lo = std::max(gen_lo, std::abs(generator_residual(v, x)) / (1.0 + v(x)));
  }
  for (int i = 1; i <= 10; ++i) {
    const double x = bu + 2.0 * bu * i / 10.5;
    gen_hi = std::max(gen_hi, std::abs(generator_residual(v, x)));
  }
  add("generator_lower", gen_lo, a.tol_gen, gen_lo <= a.tol_gen);
  add("generator_upper", gen_hi, a.tol_gen, gen_hi <= a.tol_gen);
  double hjb = 0.0, arg_err = 0.0;
  const HjbOptions hopt;
  for (int i = 0; i <= 40; ++i) {
    const double x = s.kappa + (3.0 * bu - s.kappa) * i / 40.0;
    if (x <= 0.0 || std::abs(x - bu) < 1e-6) continue;
    const auto h = hjb_evaluate(v, x, hopt);
    hjb = std::max(hjb, std::abs(h.residual));
    const double expected = x >= bu ? x - bl : 0.0;
    const double resolution = (x - s.kappa) / (hopt.l_grid - 1) + 1e-9;
    arg_err = std::max(arg_err, std::abs(h.argmax - expected) / resolution);
  }
  add("hjb_residual", hjb, a.tol_hjb, hjb <= a.tol_hjb);
  add("hjb_argmax", arg_err, 1.0, arg_err <= 1.0);

  out << std::left << std::setw(26) << "check" << std::setw(20) << "measured" << std::setw(12) << "tolerance"
      << "result\n";
  const Check* first_fail = nullptr;
  for (const auto& ch : checks) {
    out << std::setw(26) << ch.name << std::setw(20) << format_number(ch.measured) << std::setw(12)
        << format_number(ch.tolerance) << (ch.pass ? "PASS" : "FAIL") << '\n';
    if (!ch.pass && !first_fail) first_fail = &ch;
  }
  RunManifest m;
  m.subcommand = "verify";
  m.config = {{"model", model_json(mf)}, {"kappa", a.kappa}, {"perturb_bu", a.perturb_bu},
              {"tol_gap", a.tol_gap}, {"tol_gamma", a.tol_gamma}, {"tol_unit", a.tol_unit},
              {"tol_gen", a.tol_gen}, {"tol_hjb", a.tol_hjb}};
  out << "strategy b_u=" << format_number(bu) << " b_l=" << format_number(bl)
      << " liquidation=" << (sol.liquidation ? "true" : "false") << " manifest=" << m.hash() << '\n';
  m.wall_clock_seconds = elapsed(t0);
  if (!c.out_path.empty()) m.write(c.out_path);
  if (first_fail) {
    err << "verify failed: " << first_fail->name << '\n';
    return kVerifyFailure;
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic dividend barriers with fixed transaction costs", "perdiv"};
  app.require_subcommand(1);

  Common scale_c, value_c, opt_c, sweep_c, sim_c, verify_c;
  std::string scale_grid = "0:5:51", value_grid = "0:3:31";
  StrategyArgs value_s, sim_s;
  double opt_kappa = 0.06;
  bool opt_k0 = false;
  SweepArgs sw;
  SimArgs sim;
  VerifyArgs ver;
  std::function<int()> action;

  auto* scale = app.add_subcommand("scale", "scale functions");
  scale->require_subcommand(1);
  auto* scale_eval = scale->add_subcommand("eval", "tabulate W_delta, Z_delta, Z_gamma_delta, J, H");
  add_common(scale_eval, scale_c);
  scale_eval->add_option("--x-grid", scale_grid, "lo:hi:n");
  scale_eval->callback([&] { action = [&] { return cmd_scale_eval(scale_c, scale_grid, out); }; });

  auto* value = app.add_subcommand("value", "value of a (b_u, b_l) strategy on a grid");
  add_common(value, value_c);
  add_strategy(value, value_s);
  value->add_option("--x-grid", value_grid, "lo:hi:n");
  value->callback([&] { action = [&] { return cmd_value(value_c, value_s, value_grid, out); }; });

  auto* optimize = app.add_subcommand("optimize", "optimal barriers for a given kappa");
  add_common(optimize, opt_c);
  optimize->add_option("--kappa", opt_kappa, "fixed cost per payment")->required();
  optimize->add_flag("--kappa0", opt_k0, "also report the liquidation threshold");
  optimize->callback([&] { action = [&] { return cmd_optimize(opt_c, opt_kappa, opt_k0, out); }; });

  auto* sweep_cmd = app.add_subcommand("sweep", "optimal barriers over a parameter range");
  add_common(sweep_cmd, sweep_c);
  sweep_cmd->add_option("--param", sw.param, "kappa | gamma | delta")->required();
  sweep_cmd->add_option("--from", sw.from)->required();
  sweep_cmd->add_option("--to", sw.to)->required();
  sweep_cmd->add_option("--steps", sw.steps)->required();
  sweep_cmd->add_option("--kappa", sw.kappa, "fixed cost when sweeping gamma or delta");
  sweep_cmd->add_option("--svg", sw.svg_path, "write a line plot of the barriers");
  sweep_cmd->callback([&] { action = [&] { return cmd_sweep(sweep_c, sw, out); }; });

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo value of a (b_u, b_l) strategy");
  add_common(simulate, sim_c);
  add_strategy(simulate, sim_s);
  simulate->add_option("--x0", sim.x0, "initial surplus")->required();
  simulate->add_option("--paths", sim.paths);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--dt", sim.dt, "Brownian step (default: largest admissible)");
  simulate->add_option("--horizon", sim.horizon, "truncation time (default: automatic)");
  simulate->add_flag("--antithetic", sim.antithetic);
  simulate->add_flag("--no-bridge", sim.no_bridge);
  simulate->callback([&] { action = [&] { return cmd_simulate(sim_c, sim_s, sim, out); }; });

  auto* verify = app.add_subcommand("verify", "numerical verification of the optimal strategy");
  add_common(verify, verify_c);
  verify->add_option("--kappa", ver.kappa);
  verify->add_option("--perturb-bu", ver.perturb_bu, "shift b_u away from the solution");
  verify->add_option("--tol-gap", ver.tol_gap);
  verify->add_option("--tol-gamma", ver.tol_gamma);
  verify->add_option("--tol-unit", ver.tol_unit);
  verify->add_option("--tol-gen", ver.tol_gen);
  verify->add_option("--tol-hjb", ver.tol_hjb);
  verify->callback([&] { action = [&] { return cmd_verify(verify_c, ver, out, err); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    return action ? action() : kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
}

}  // namespace perdiv::cli
