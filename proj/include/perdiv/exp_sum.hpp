#pragma once

#include <complex>
#include <vector>

namespace perdiv {

using cplx = std::complex<double>;

struct ExpTerm {
  cplx coef;
  cplx rate;
};

// f(x) = poly(x) + sum_k coef_k exp(rate_k x), real-valued by construction
// (complex terms come in conjugate pairs).
class ExpSum {
 public:
  std::vector<double> poly;  // ascending powers
  std::vector<ExpTerm> terms;

  ExpSum() = default;
  static ExpSum constant(double c);
  static ExpSum exponential(cplx coef, cplx rate);
  static ExpSum monomial(double coef, int power);

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;
  cplx eval_complex(double x) const;
  // exp(-s x) f(x), finite for large x when s >= max Re(rate).
  double eval_scaled(double x, double s) const;

  ExpSum derivative() const;
  // F(x) = int_0^x f.
  ExpSum antiderivative() const;

  double max_real_rate() const;

  ExpSum& operator+=(const ExpSum& other);
  ExpSum& operator*=(double s);

 private:
  void compact();
};

ExpSum operator+(ExpSum a, const ExpSum& b);
ExpSum operator-(ExpSum a, const ExpSum& b);
ExpSum operator*(double s, ExpSum a);

// Separate closed forms on x >= 0 and x < 0.
struct PiecewiseExpSum {
  ExpSum pos;
  ExpSum neg;

  double operator()(double x) const { return x >= 0.0 ? pos.eval(x) : neg.eval(x); }
  double eval_scaled(double x, double s) const {
    return x >= 0.0 ? pos.eval_scaled(x, s) : neg.eval_scaled(x, s);
  }
  PiecewiseExpSum derivative() const { return {pos.derivative(), neg.derivative()}; }
};

// exp(-s u) [f(u) g(v) - f(v) g(u)] for u, v >= 0, with the products of
// matching basis functions dropped since they cancel exactly.
double cross_scaled(const ExpSum& f, const ExpSum& g, double u, double v, double s);

PiecewiseExpSum operator+(const PiecewiseExpSum& a, const PiecewiseExpSum& b);
PiecewiseExpSum operator-(const PiecewiseExpSum& a, const PiecewiseExpSum& b);
PiecewiseExpSum operator*(double s, const PiecewiseExpSum& a);

}  // namespace perdiv
