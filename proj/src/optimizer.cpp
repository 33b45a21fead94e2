#include "perdiv/optimizer.hpp"

#include <cmath>
#include <limits>

#include "perdiv/errors.hpp"
#include "perdiv/parallel.hpp"

namespace perdiv {

namespace {

// Bisection on a sign change f(lo) <= 0 < f(hi), run until the midpoint
// no longer moves.
template <typename F>
double bisect(F&& f, double lo, double hi, int* iterations = nullptr) {
  int it = 0;
  for (; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  if (iterations) *iterations = it;
  return 0.5 * (lo + hi);
}

// Gamma_{b_l}(d) / J(b_u), without the cancelling leading exponentials.
double gamma_scaled(const ScaleContext& ctx, double b_l, double d, double kappa) {
  const double b_u = b_l + d;
  return (d - kappa - ctx.a()) - ctx.H_over_J(b_u) + ctx.HJ_cross_over_J(b_u, d);
}

}  // namespace

double Q_fn(const ScaleContext& ctx, double b) { return ctx.H_over_J(b) + 1.0 / ctx.phi_gamma_delta(); }

double solve_b_star(const ScaleContext& ctx, const SolveOptions& opt, int* iterations) {
  if (iterations) *iterations = 0;
  if (Q_fn(ctx, 0.0) >= 0.0) return 0.0;
  double hi = opt.initial_bracket > 0.0 ? opt.initial_bracket : 1.0;
  while (!(Q_fn(ctx, hi) > 0.0)) {
    hi *= 2.0;
    if (hi > 1e6 || !std::isfinite(Q_fn(ctx, hi)))
      throw BracketNotFound("Q has no sign change on [0, 1e6]");
  }
  return bisect([&](double b) { return Q_fn(ctx, b); }, 0.0, hi, iterations);
}

double Gamma_fn(const ScaleContext& ctx, double b_l, double d, double kappa) {
  const double b_u = b_l + d;
  return ctx.J(b_u) * gamma_scaled(ctx, b_l, d, kappa);
}

double Gamma_prime(const ScaleContext& ctx, double b_l, double d, double kappa) {
  const double b_u = b_l + d;
  const auto& tp = ctx.time_pref();
  const double phi = ctx.phi_gamma_delta();
  const double v_bl = ValueFunction(ctx, {b_u, b_l, kappa}).at_bl();
  return tp.delta / (tp.gamma + tp.delta) * phi * ctx.Z_gamma_delta(b_u) * (1.0 - ctx.L(d, b_u)) *
         (v_bl + d - kappa - (ctx.a() - 1.0 / phi));
}

double solve_b_u(const ScaleContext& ctx, double b_l, double kappa, const SolveOptions& opt) {
  return solve_b_u(ctx, b_l, kappa, solve_b_star(ctx, opt), opt);
}

double solve_b_u(const ScaleContext& ctx, double b_l, double kappa, double b_star,
                 const SolveOptions& opt) {
  if (!(kappa >= 0.0)) throw PreconditionViolated("kappa must be >= 0");
  if (!(b_l >= 0.0) || b_l > b_star * (1.0 + 1e-12))
    throw PreconditionViolated("b_l must lie in [0, b*]");
  auto f = [&](double d) { return gamma_scaled(ctx, b_l, d, kappa); };
  const double lo = kappa * (1.0 + 1e-9) + 1e-12;
  const double f_lo = f(lo);
  if (!(f_lo < 0.0)) throw SolverError("Gamma is not negative at the lower end of its bracket");
  double hi = std::max(opt.initial_bracket > 0.0 ? opt.initial_bracket : 1.0, 2.0 * lo);
  for (;;) {
    const double f_hi = f(hi);
    if (!std::isfinite(f_hi)) throw BracketNotFound("Gamma is not finite while expanding its bracket");
    if (f_hi > 0.0) break;
    hi *= 2.0;
    if (hi > 1e6) throw BracketNotFound("Gamma has no sign change on [kappa, 1e6]");
  }
  const double d = bisect(f, lo, hi);
  const double b_u = b_l + d;
  if (b_star > 0.0 && !(b_u > b_star)) throw SolverError("solved b_u does not exceed b*");
  if (!(ctx.phi_gamma_delta() * ctx.H_over_J(b_u) + 1.0 > 0.0))
    throw SolverError("solved b_u violates phi H/J + 1 > 0");
  return b_u;
}

namespace {

double g_value(const ScaleContext& ctx, double b_l, double b_u) {
  const double d = b_u - b_l;
  return -ctx.H_over_J(b_u) * ctx.J_prime(d) + ctx.H_prime(d);
}

}  // namespace

double G_fn(const ScaleContext& ctx, double b_l, double kappa, const SolveOptions& opt) {
  const double b_u = solve_b_u(ctx, b_l, kappa, opt);
  return g_value(ctx, b_l, b_u);
}

OptimalSolution solve_optimal(const ScaleContext& ctx, double kappa, const SolveOptions& opt) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw PreconditionViolated("kappa must be finite and >= 0");
  OptimalSolution sol;
  sol.kappa = kappa;
  sol.b_star = solve_b_star(ctx, opt, &sol.diagnostics.b_star_iterations);
  const double b_star = sol.b_star;

  if (kappa == 0.0) {
    sol.b_u_star = sol.b_l_star = b_star;
    sol.liquidation = b_star == 0.0;
    return sol;
  }

  auto b_u_of = [&](double b_l) { return solve_b_u(ctx, b_l, kappa, b_star, opt); };
  if (b_star == 0.0) {
    sol.b_l_star = 0.0;
    sol.b_u_star = b_u_of(0.0);
    sol.liquidation = true;
  } else {
    const double b_u0 = b_u_of(0.0);
    if (g_value(ctx, 0.0, b_u0) <= 1.0) {
      sol.b_l_star = 0.0;
      sol.b_u_star = b_u0;
      sol.liquidation = true;
    } else {
      // G(0) > 1 and G(b*) < 1; G is decreasing through the crossing.
      auto h = [&](double b_l) { return 1.0 - g_value(ctx, b_l, b_u_of(b_l)); };
      sol.b_l_star = bisect(h, 0.0, b_star, &sol.diagnostics.b_l_iterations);
      sol.b_u_star = b_u_of(sol.b_l_star);
      sol.liquidation = false;
      sol.diagnostics.g_residual = g_value(ctx, sol.b_l_star, sol.b_u_star) - 1.0;
    }
  }

  const double d = sol.b_u_star - sol.b_l_star;
  sol.diagnostics.gamma_residual = Gamma_fn(ctx, sol.b_l_star, d, kappa);
  sol.diagnostics.smoothness_gap = ValueFunction(ctx, sol.strategy()).smoothness_gap();
  if (!(std::abs(sol.diagnostics.gamma_residual) <= 1e-10))
    throw SolverError("Gamma residual above 1e-10 at the solution");
  if (!sol.liquidation && !(std::abs(sol.diagnostics.g_residual) <= 1e-8))
    throw SolverError("V'(b_l) - 1 residual above 1e-8 at the solution");
  return sol;
}

bool liquidation_optimal(const ScaleContext& ctx, double kappa) {
  const double b_star = solve_b_star(ctx);
  if (b_star == 0.0) return kappa > 0.0;
  if (kappa == 0.0) return false;
  const double b_u0 = solve_b_u(ctx, 0.0, kappa, b_star, {});
  return g_value(ctx, 0.0, b_u0) <= 1.0;
}

double solve_kappa0(const ScaleContext& ctx) {
  double lo = 0.0;
  double hi = 1.0;
  while (!liquidation_optimal(ctx, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (liquidation_optimal(ctx, mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kappa: return "kappa";
    case SweepParam::gamma: return "gamma";
    case SweepParam::delta: return "delta";
  }
  return "?";
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "kappa") return SweepParam::kappa;
  if (name == "gamma") return SweepParam::gamma;
  if (name == "delta") return SweepParam::delta;
  throw ConfigError("unknown sweep parameter '" + name + "' (expected kappa, gamma or delta)");
}

std::vector<SweepRecord> sweep(const ModelSpec& model, const TimePreference& tp, double kappa,
                               SweepParam param, double from, double to, int steps,
                               unsigned threads) {
  if (steps < 2) throw ConfigError("sweep needs steps >= 2");
  if (!std::isfinite(from) || !std::isfinite(to) || !(to > from))
    throw ConfigError("sweep range needs finite from < to");
  std::vector<SweepRecord> rows(static_cast<std::size_t>(steps));
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        SweepRecord& row = rows[i];
        row.param = to_string(param);
        row.value = from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
        TimePreference t = tp;
        double k = kappa;
        switch (param) {
          case SweepParam::kappa: k = row.value; break;
          case SweepParam::gamma: t.gamma = row.value; break;
          case SweepParam::delta: t.delta = row.value; break;
        }
        try {
          const ScaleContext ctx(model, t);
          const auto sol = solve_optimal(ctx, k);
          row.b_star = sol.b_star;
          row.b_u_star = sol.b_u_star;
          row.b_l_star = sol.b_l_star;
          row.liquidation = sol.liquidation;
        } catch (const Error& e) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          row.b_star = row.b_u_star = row.b_l_star = nan;
          row.status = std::string("error: ") + e.what();
        }
      },
      threads);
  return rows;
}

}  // namespace perdiv
