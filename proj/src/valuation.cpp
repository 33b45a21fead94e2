#include "perdiv/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perdiv/errors.hpp"
#include "perdiv/quadrature.hpp"

namespace perdiv {

bool Strategy::admissible() const {
  return std::isfinite(b_u) && std::isfinite(b_l) && std::isfinite(kappa) && b_l >= 0.0 &&
         kappa >= 0.0 && b_l <= b_u && b_u - b_l >= kappa;
}

void Strategy::validate() const {
  if (!admissible()) throw PreconditionViolated("strategy is not admissible: need 0 <= b_l, b_u - b_l >= kappa >= 0");
  if (!(b_u > 0.0)) throw PreconditionViolated("strategy needs b_u > 0");
}

ValueFunction::ValueFunction(const ScaleContext& ctx, const Strategy& s) : ctx_(&ctx), s_(s) {
  s_.validate();
  const double sc = ctx.scale_rate();
  const double bu = s_.b_u;
  const double d = s_.d();
  const double dk = d - s_.kappa;
  const double a = ctx.a();

  const double z_bu = ctx.Z_gamma_delta_fn().eval_scaled(bu, sc);
  const double c_bu = ctx.C_fn().eval_scaled(bu, sc) / z_bu;
  const double ga_bu = (-a * ctx.J_fn().eval_scaled(bu, sc) - ctx.H_fn().eval_scaled(bu, sc) +
                        dk * ctx.C_fn().eval_scaled(bu, sc)) /
                       z_bu;
  if (s_.b_l == 0.0) {
    v_l_ = 0.0;
    v_u_ = -ga_bu;
    return;
  }
  // V(0) = 0 and the lower-region formula evaluated at x = b_l.
  const double m11 = 1.0, m12 = c_bu, r1 = -ga_bu;
  const double m21 = ctx.Z_gamma_delta(d), m22 = ctx.C(d) - 1.0;
  const double r2 = -(-a * ctx.J(d) - ctx.H(d) + dk * ctx.C(d));
  const double det = m11 * m22 - m12 * m21;
  if (!(std::abs(det) >= 1e-14)) throw SingularSystem("value system determinant vanishes");
  v_u_ = (r1 * m22 - m12 * r2) / det;
  v_l_ = (m11 * r2 - m21 * r1) / det;
}

double ValueFunction::operator()(double x) const {
  if (x == 0.0) return 0.0;
  if (x < 0.0) return 0.0;
  const auto& c = *ctx_;
  const double g = c.g();
  if (x <= s_.b_u) {
    const double y = s_.b_u - x;
    const double gA = -c.a() * c.J(y) - c.H(y) + (s_.d() - s_.kappa) * c.C(y);
    return gA + c.Z_gamma_delta(y) * v_u_ + c.C(y) * v_l_;
  }
  const double y = x - s_.b_u;
  const double e = std::exp(-c.phi_gamma_delta() * y);
  return g * c.A_upper(y, s_.d(), s_.kappa) + e * v_u_ + g * (1.0 - e) * v_l_;
}

double ValueFunction::derivative(double x, Side side) const {
  const auto& c = *ctx_;
  const double g = c.g();
  const double dk = s_.d() - s_.kappa;
  if (!upper(x, side)) {
    const double y = s_.b_u - x;
    const auto zp = c.Z_prime_family(y);
    return -(c.gA_lower_prime(y, s_.d(), s_.kappa) + zp.z_gamma_delta_prime * v_u_ +
             c.C_prime(y) * v_l_);
  }
  const double phi = c.phi_gamma_delta();
  const double y = x - s_.b_u;
  const double e = std::exp(-phi * y);
  const double k = dk + c.mu() / (c.time_pref().gamma + c.time_pref().delta);
  return g * (1.0 + k * phi * e) - phi * e * v_u_ + g * phi * e * v_l_;
}

double ValueFunction::second_derivative(double x, Side side) const {
  const auto& c = *ctx_;
  const double g = c.g();
  const double dk = s_.d() - s_.kappa;
  if (!upper(x, side)) {
    const double y = s_.b_u - x;
    const auto zp = c.Z_prime_family(y);
    return c.gA_lower_second(y, s_.d(), s_.kappa) + zp.z_gamma_delta_second * v_u_ +
           c.C_second(y) * v_l_;
  }
  const double phi = c.phi_gamma_delta();
  const double y = x - s_.b_u;
  const double e = std::exp(-phi * y);
  const double k = dk + c.mu() / (c.time_pref().gamma + c.time_pref().delta);
  return phi * phi * e * (v_u_ - g * k - g * v_l_);
}

double value(const ScaleContext& ctx, const Strategy& s, double x) { return ValueFunction(ctx, s)(x); }

double value_derivative(const ScaleContext& ctx, const Strategy& s, double x, Side side) {
  return ValueFunction(ctx, s).derivative(x, side);
}

double smoothness_gap(const ScaleContext& ctx, const Strategy& s) {
  return ValueFunction(ctx, s).smoothness_gap();
}

double value_periodic_barrier(const ScaleContext& ctx, double b, double x) {
  if (!(b > 0.0)) throw PreconditionViolated("value_periodic_barrier needs b > 0");
  if (x == 0.0) return 0.0;
  if (x <= b) return ctx.HJ_cross_over_J(b, b - x);
  return ctx.H_over_J(b) * ctx.J(b - x) - ctx.H(b - x);
}

double value_periodic_barrier_derivative(const ScaleContext& ctx, double b, double x) {
  return -ctx.H_over_J(b) * ctx.J_prime(b - x) + ctx.H_prime(b - x);
}

namespace {

// int_0^inf V(x + s) beta e^{-beta s} ds. Below the seam at b_u the integrand
// is handled by Gauss-Legendre; above it V is linear plus one exponential.
double jump_expectation(const ValueFunction& v, double x, double beta) {
  const auto& c = v.context();
  const auto& s = v.strategy();
  const double s0 = std::max(0.0, s.b_u - x);
  auto integrand = [&](double t) { return v(x + t) * beta * std::exp(-beta * t); };
  double lower = 0.0;
  if (s0 > 0.0) {
    const double knee = std::min(s0, 20.0 / beta);
    lower = integrate_gl64(integrand, 0.0, knee) + integrate_gl64(integrand, knee, s0);
  }
  const double g = c.g();
  const double phi = c.phi_gamma_delta();
  const double k = s.d() - s.kappa + c.mu() / (c.time_pref().gamma + c.time_pref().delta);
  // V(b_u + y) = alpha0 + alpha1 y + alpha2 e^{-phi y} for y >= 0.
  const double alpha0 = g * k + g * v.at_bl();
  const double alpha1 = g;
  const double alpha2 = v.at_bu() - g * k - g * v.at_bl();
  double upper;
  if (x >= s.b_u) {
    const double y0 = x - s.b_u;
    const double e0 = std::exp(-phi * y0);
    upper = alpha0 + alpha1 * (y0 + 1.0 / beta) + alpha2 * e0 * beta / (beta + phi);
  } else {
    upper = std::exp(-beta * s0) * (alpha0 + alpha1 / beta + alpha2 * beta / (beta + phi));
  }
  return lower + upper;
}

double generator_without_gamma(const ValueFunction& v, double x) {
  const auto& c = v.context();
  const auto& m = c.model();
  const Side side = x >= v.strategy().b_u ? Side::right : Side::left;
  const double val = v(x);
  const double d1 = v.derivative(x, side);
  const double d2 = m.sigma > 0.0 ? v.second_derivative(x, side) : 0.0;
  const double m1 = m.small_jump_first_moment();
  const double c_comp = m.drift_c - m1;  // drift in the compensated-at-1 representation
  double jumps = 0.0;
  for (const auto& ph : m.jump_phases) jumps += ph.rate * (jump_expectation(v, x, ph.scale) - val);
  jumps -= m1 * d1;
  return -c_comp * d1 + 0.5 * m.sigma * m.sigma * d2 + jumps - c.time_pref().delta * val;
}

}  // namespace

double generator_residual(const ValueFunction& v, double x) {
  const auto& s = v.strategy();
  double r = generator_without_gamma(v, x);
  if (x >= s.b_u) r += v.context().time_pref().gamma * (x - s.b_l - s.kappa + v.at_bl() - v(x));
  return r;
}

double generator_residual(const ScaleContext& ctx, const Strategy& s, double x) {
  return generator_residual(ValueFunction(ctx, s), x);
}

HjbEvaluation hjb_evaluate(const ValueFunction& v, double x, const HjbOptions& opt) {
  const auto& s = v.strategy();
  if (x < s.kappa) throw PreconditionViolated("hjb residual needs x >= kappa");
  const double vx = v(x);
  auto bracket = [&](double l) { return (l - s.kappa) + v(x - l) - vx; };

  double best_l = s.kappa;
  double best = bracket(best_l);
  auto consider = [&](double l) {
    if (!(l >= s.kappa && l <= x)) return;
    const double p = bracket(l);
    if (p > best) {
      best = p;
      best_l = l;
    }
  };
  const int n = std::max(opt.l_grid, 2);
  const double step = (x - s.kappa) / (n - 1);
  for (int i = 0; i < n; ++i) consider(s.kappa + step * i);
  consider(x);
  consider(x - s.b_l);

  // Golden-section refinement inside the neighbouring grid cells.
  if (step > 0.0) {
    double lo = std::max(s.kappa, best_l - step);
    double hi = std::min(x, best_l + step);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = hi - invphi * (hi - lo), c2 = lo + invphi * (hi - lo);
    double f1 = bracket(c1), f2 = bracket(c2);
    for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + x); ++it) {
      if (f1 > f2) {
        hi = c2;
        c2 = c1;
        f2 = f1;
        c1 = hi - invphi * (hi - lo);
        f1 = bracket(c1);
      } else {
        lo = c1;
        c1 = c2;
        f1 = f2;
        c2 = lo + invphi * (hi - lo);
        f2 = bracket(c2);
      }
    }
    consider(0.5 * (lo + hi));
  }

  HjbEvaluation out;
  out.bracket_max = best;
  out.argmax = best > 0.0 ? best_l : 0.0;
  out.residual = generator_without_gamma(v, x) + v.context().time_pref().gamma * std::max(best, 0.0);
  return out;
}

double hjb_residual(const ScaleContext& ctx, const Strategy& s, double x) {
  return hjb_evaluate(ValueFunction(ctx, s), x).residual;
}

ValuationReport valuation_report(const ScaleContext& ctx, const Strategy& s, int n) {
  if (n < 2) throw PreconditionViolated("report grid needs at least 2 points");
  ValueFunction v(ctx, s);
  ValuationReport rep;
  rep.at_bu = v.at_bu();
  rep.at_bl = v.at_bl();
  rep.smoothness_gap = v.smoothness_gap();
  const double hi = 3.0 * s.b_u;
  for (int i = 0; i < n; ++i) {
    const double x = hi * i / (n - 1);
    GridPoint p{x, v(x), x > 0.0 ? v.derivative(x) : std::numeric_limits<double>::quiet_NaN()};
    rep.grid.push_back(p);
    if (x <= 0.0 || std::abs(x - s.b_u) < 1e-6) continue;
    rep.generator_residual_max = std::max(rep.generator_residual_max, std::abs(generator_residual(v, x)));
    if (x >= s.kappa)
      rep.hjb_residual_max = std::max(rep.hjb_residual_max, std::abs(hjb_evaluate(v, x).residual));
  }
  return rep;
}

}  // namespace perdiv
