#pragma once

#include <string>
#include <vector>

#include "perdiv/scale_kernel.hpp"
#include "perdiv/valuation.hpp"

namespace perdiv {

struct SolveDiagnostics {
  double gamma_residual = 0.0;  // Gamma_{b_l}(d) at the solution
  double g_residual = 0.0;      // V'(b_l) - 1, zero unless liquidation
  double smoothness_gap = 0.0;
  int b_star_iterations = 0;
  int b_l_iterations = 0;
};

struct OptimalSolution {
  double b_star = 0.0;
  double b_u_star = 0.0;
  double b_l_star = 0.0;
  double kappa = 0.0;
  bool liquidation = false;
  SolveDiagnostics diagnostics;

  Strategy strategy() const { return {b_u_star, b_l_star, kappa}; }
};

struct SolveOptions {
  // Starting width of the expanding brackets for b* and d.
  double initial_bracket = 1.0;
};

// H(b)/J(b) + 1/phi_{gamma+delta}
double Q_fn(const ScaleContext& ctx, double b);
double solve_b_star(const ScaleContext& ctx, const SolveOptions& opt = {}, int* iterations = nullptr);

double Gamma_fn(const ScaleContext& ctx, double b_l, double d, double kappa);
// Closed-form derivative of Gamma_fn in d.
double Gamma_prime(const ScaleContext& ctx, double b_l, double d, double kappa);

// Smooth upper barrier for a given b_l in [0, b*].
double solve_b_u(const ScaleContext& ctx, double b_l, double kappa, const SolveOptions& opt = {});
double solve_b_u(const ScaleContext& ctx, double b_l, double kappa, double b_star,
                 const SolveOptions& opt);

// V'(b_l) for the smooth strategy anchored at b_l.
double G_fn(const ScaleContext& ctx, double b_l, double kappa, const SolveOptions& opt = {});

OptimalSolution solve_optimal(const ScaleContext& ctx, double kappa, const SolveOptions& opt = {});

// Smallest kappa at which liquidation at the first opportunity is optimal;
// +infinity when none up to 1e4 is.
double solve_kappa0(const ScaleContext& ctx);
bool liquidation_optimal(const ScaleContext& ctx, double kappa);

enum class SweepParam { kappa, gamma, delta };

const char* to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

struct SweepRecord {
  std::string param;
  double value = 0.0;
  double b_star = 0.0;
  double b_u_star = 0.0;
  double b_l_star = 0.0;
  bool liquidation = false;
  std::string status = "ok";
};

// Linear grid of `steps` values on [from, to]; every row solves its own model.
std::vector<SweepRecord> sweep(const ModelSpec& model, const TimePreference& tp, double kappa,
                               SweepParam param, double from, double to, int steps,
                               unsigned threads = 0);

}  // namespace perdiv
