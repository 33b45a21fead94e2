#include "perdiv/exp_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perdiv/errors.hpp"

namespace perdiv {

namespace {

double horner(const std::vector<double>& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

ExpSum ExpSum::constant(double c) {
  ExpSum f;
  f.poly = {c};
  return f;
}

ExpSum ExpSum::exponential(cplx coef, cplx rate) {
  ExpSum f;
  f.terms.push_back({coef, rate});
  return f;
}

ExpSum ExpSum::monomial(double coef, int power) {
  ExpSum f;
  f.poly.assign(static_cast<std::size_t>(power) + 1, 0.0);
  f.poly.back() = coef;
  return f;
}

double ExpSum::eval(double x) const { return eval_scaled(x, 0.0); }

cplx ExpSum::eval_complex(double x) const {
  cplx acc = horner(poly, x);
  for (const auto& t : terms) acc += t.coef * std::exp(t.rate * x);
  return acc;
}

double ExpSum::eval_scaled(double x, double s) const {
  double acc = 0.0;
  if (!poly.empty()) {
    const double p = horner(poly, x);
    acc = (s == 0.0) ? p : p * std::exp(-s * x);
  }
  for (const auto& t : terms) {
    const cplx e = std::exp((t.rate - s) * x);
    acc += (t.coef * e).real();
  }
  return acc;
}

ExpSum ExpSum::derivative() const {
  ExpSum d;
  for (std::size_t k = 1; k < poly.size(); ++k) d.poly.push_back(static_cast<double>(k) * poly[k]);
  for (const auto& t : terms) d.terms.push_back({t.coef * t.rate, t.rate});
  d.compact();
  return d;
}

ExpSum ExpSum::antiderivative() const {
  ExpSum F;
  F.poly.assign(poly.size() + 1, 0.0);
  for (std::size_t k = 0; k < poly.size(); ++k) F.poly[k + 1] = poly[k] / static_cast<double>(k + 1);
  cplx shift = 0.0;
  for (const auto& t : terms) {
    if (t.rate == cplx(0.0)) throw NumericalError("antiderivative of a zero-rate exponential term");
    const cplx c = t.coef / t.rate;
    F.terms.push_back({c, t.rate});
    shift += c;
  }
  F.poly[0] -= shift.real();
  F.compact();
  return F;
}

double ExpSum::max_real_rate() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) m = std::max(m, t.rate.real());
  return m;
}

ExpSum& ExpSum::operator+=(const ExpSum& other) {
  if (poly.size() < other.poly.size()) poly.resize(other.poly.size(), 0.0);
  for (std::size_t k = 0; k < other.poly.size(); ++k) poly[k] += other.poly[k];
  for (const auto& t : other.terms) {
    auto it = std::find_if(terms.begin(), terms.end(),
                           [&](const ExpTerm& u) { return u.rate == t.rate; });
    if (it != terms.end())
      it->coef += t.coef;
    else
      terms.push_back(t);
  }
  compact();
  return *this;
}

ExpSum& ExpSum::operator*=(double s) {
  for (auto& c : poly) c *= s;
  for (auto& t : terms) t.coef *= s;
  compact();
  return *this;
}

void ExpSum::compact() {
  while (!poly.empty() && poly.back() == 0.0) poly.pop_back();
  terms.erase(std::remove_if(terms.begin(), terms.end(),
                             [](const ExpTerm& t) { return t.coef == cplx(0.0); }),
              terms.end());
}

ExpSum operator+(ExpSum a, const ExpSum& b) {
  a += b;
  return a;
}

ExpSum operator-(ExpSum a, const ExpSum& b) {
  ExpSum nb = b;
  nb *= -1.0;
  a += nb;
  return a;
}

ExpSum operator*(double s, ExpSum a) {
  a *= s;
  return a;
}

namespace {

struct Basis {
  cplx coef;
  int power;
  cplx rate;
};

std::vector<Basis> expand(const ExpSum& f) {
  std::vector<Basis> out;
  for (std::size_t k = 0; k < f.poly.size(); ++k)
    if (f.poly[k] != 0.0) out.push_back({f.poly[k], static_cast<int>(k), 0.0});
  for (const auto& t : f.terms) out.push_back({t.coef, 0, t.rate});
  return out;
}

cplx basis_product(const Basis& a, double x, const Basis& b, double y, double s) {
  return std::pow(x, a.power) * std::pow(y, b.power) * std::exp(a.rate * x + b.rate * y - s * x);
}

}  // namespace

double cross_scaled(const ExpSum& f, const ExpSum& g, double u, double v, double s) {
  const auto fb = expand(f);
  const auto gb = expand(g);
  cplx acc = 0.0;
  for (const auto& a : fb)
    for (const auto& b : gb) {
      if (a.power == b.power && a.rate == b.rate) continue;
      // f(u)g(v) - f(v)g(u), scaled by exp(-s u) in both products.
      const cplx first = basis_product(a, u, b, v, s);
      const cplx second = basis_product(b, u, a, v, s);
      acc += a.coef * b.coef * (first - second);
    }
  return acc.real();
}

PiecewiseExpSum operator+(const PiecewiseExpSum& a, const PiecewiseExpSum& b) {
  return {a.pos + b.pos, a.neg + b.neg};
}

PiecewiseExpSum operator-(const PiecewiseExpSum& a, const PiecewiseExpSum& b) {
  return {a.pos - b.pos, a.neg - b.neg};
}

PiecewiseExpSum operator*(double s, const PiecewiseExpSum& a) { return {s * a.pos, s * a.neg}; }

}  // namespace perdiv
