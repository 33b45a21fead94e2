#pragma once

#include <vector>

#include "perdiv/scale_kernel.hpp"

namespace perdiv {

// Pay X - b_l at a decision time whenever X >= b_u; each payment costs kappa.
struct Strategy {
  double b_u = 0.0;
  double b_l = 0.0;
  double kappa = 0.0;

  double d() const { return b_u - b_l; }
  bool admissible() const;
  // Throws PreconditionViolated unless admissible with b_u > 0.
  void validate() const;
};

enum class Side { left, right };

// Value of a fixed (b_u, b_l) strategy. Solves for V(b_u), V(b_l) once.
class ValueFunction {
 public:
  ValueFunction(const ScaleContext& ctx, const Strategy& s);

  double operator()(double x) const;
  double derivative(double x, Side side = Side::right) const;
  double second_derivative(double x, Side side = Side::right) const;

  double at_bu() const { return v_u_; }
  double at_bl() const { return v_l_; }
  double smoothness_gap() const { return v_u_ - v_l_ - (s_.d() - s_.kappa); }

  const ScaleContext& context() const { return *ctx_; }
  const Strategy& strategy() const { return s_; }

 private:
  bool upper(double x, Side side) const { return x > s_.b_u || (x == s_.b_u && side == Side::right); }

  const ScaleContext* ctx_;
  Strategy s_;
  double v_u_ = 0.0;
  double v_l_ = 0.0;
};

double value(const ScaleContext& ctx, const Strategy& s, double x);
double value_derivative(const ScaleContext& ctx, const Strategy& s, double x, Side side);
double smoothness_gap(const ScaleContext& ctx, const Strategy& s);

// No-cost single periodic barrier at b.
double value_periodic_barrier(const ScaleContext& ctx, double b, double x);
double value_periodic_barrier_derivative(const ScaleContext& ctx, double b, double x);

// (L - delta) V(x) + gamma [x - b_l - kappa + V(b_l) - V(x)] 1{x >= b_u}; one-sided derivatives from the right at b_u.
double generator_residual(const ValueFunction& v, double x);
double generator_residual(const ScaleContext& ctx, const Strategy& s, double x);

struct HjbEvaluation {
  double residual = 0.0;
  double bracket_max = 0.0;  // max over kappa <= l <= x of (l - kappa) + V(x - l) - V(x)
  double argmax = 0.0;       // 0 when the bracket is not positive
};

struct HjbOptions {
  int l_grid = 400;
};

HjbEvaluation hjb_evaluate(const ValueFunction& v, double x, const HjbOptions& opt = {});
double hjb_residual(const ScaleContext& ctx, const Strategy& s, double x);

struct GridPoint {
  double x = 0.0;
  double value = 0.0;
  double derivative = 0.0;
};

struct ValuationReport {
  double at_bu = 0.0;
  double at_bl = 0.0;
  std::vector<GridPoint> grid;
  double smoothness_gap = 0.0;
  double generator_residual_max = 0.0;
  double hjb_residual_max = 0.0;
};

// Grid of n points on [0, 3 b_u].
ValuationReport valuation_report(const ScaleContext& ctx, const Strategy& s, int n = 200);

}  // namespace perdiv
