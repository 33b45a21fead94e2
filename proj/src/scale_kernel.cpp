#include "perdiv/scale_kernel.hpp"

#include <cmath>

#include "perdiv/errors.hpp"

namespace perdiv {

namespace {

PiecewiseExpSum constant(double c) { return {ExpSum::constant(c), ExpSum::constant(c)}; }

}  // namespace

ScaleContext::Family ScaleContext::build_family(const RootDecomposition& dec) {
  Family f;
  for (std::size_t j = 0; j < dec.roots.size(); ++j) {
    if (dec.roots[j] == cplx(0.0)) throw NumericalError("root at zero for q > 0");
    f.W.pos += ExpSum::exponential(dec.weights[j], dec.roots[j]);
  }
  f.W1 = f.W.derivative();
  f.W2 = f.W1.derivative();
  f.Wbar.pos = f.W.pos.antiderivative();
  f.Wbarbar.pos = f.Wbar.pos.antiderivative();
  f.Z.pos = ExpSum::constant(1.0) + dec.q * f.Wbar.pos;
  f.Z.neg = ExpSum::constant(1.0);
  return f;
}

ScaleContext::ScaleContext(const ModelSpec& model, const TimePreference& tp)
    : model_(model), tp_(tp) {
  model_.validate();
  tp_.validate();
  auto& cache = RootCache::global();
  dec_delta_ = cache.get(model_, tp_.delta);
  dec_gamma_delta_ = cache.get(model_, tp_.gamma + tp_.delta);
  if (!(phi_gamma_delta() > phi_delta()))
    throw NumericalError("phi_{gamma+delta} must exceed phi_delta");

  mu_ = model_.mu();
  const double gd = tp_.gamma + tp_.delta;
  g_ = tp_.gamma / gd;
  scale_ = std::max(phi_delta(), 0.0);

  fd_ = build_family(*dec_delta_);
  fgd_ = build_family(*dec_gamma_delta_);

  const double phi = phi_gamma_delta();
  Zgd_.pos = Z_tilted(QTag::delta, phi);
  Zgd_.neg = ExpSum::exponential(1.0, phi);
  Zbar_.pos = fd_.Z.pos.antiderivative();
  Zbar_.neg = ExpSum::monomial(1.0, 1);

  const auto& Zd = fd_.Z;
  J_ = (tp_.delta / gd) * Zgd_ + g_ * Zd;
  H_ = g_ * (Zbar_ - constant(mu_ / tp_.delta));
  C_ = g_ * (Zd - Zgd_);
  K_ = (-a()) * Zd - Zbar_ + constant(mu_ / tp_.delta);

  Zd1_ = fd_.Z.derivative();
  Zd2_ = Zd1_.derivative();
  Zgd1_ = Zgd_.derivative();
  Zgd2_ = Zgd1_.derivative();
  J1_ = J_.derivative();
  H1_ = H_.derivative();
  C1_ = C_.derivative();
  K1_ = K_.derivative();
  J2_ = J1_.derivative();
  H2_ = H1_.derivative();
  C2_ = C1_.derivative();
}

ExpSum ScaleContext::Z_tilted(QTag tag, double theta) const {
  const auto& d = dec(tag);
  for (const auto& r : d.roots)
    if (std::abs(cplx(theta) - r) <= 1e-12 * (1.0 + std::abs(r)))
      return ExpSum::exponential(1.0, r);
  // psi(phi_{gamma+delta}) - delta = gamma by definition.
  double factor = laplace_exponent(model_, theta) - d.q;
  if (tag == QTag::delta && theta == phi_gamma_delta()) factor = tp_.gamma;
  ExpSum out;
  for (std::size_t j = 0; j < d.roots.size(); ++j)
    out += ExpSum::exponential(factor * d.weights[j] / (theta - d.roots[j]), d.roots[j]);
  return out;
}

double ScaleContext::Z(QTag tag, double x, double theta) const {
  if (x < 0.0) return std::exp(theta * x);
  if (theta == 0.0) return Z(tag, x);
  if (tag == QTag::delta && theta == phi_gamma_delta()) return Zgd_(x);
  return Z_tilted(tag, theta).eval(x);
}

ZDerivatives ScaleContext::Z_prime_family(double x) const {
  ZDerivatives out;
  out.z_delta_prime = Zd1_(x);
  out.z_gamma_delta_prime = Zgd1_(x);
  out.z_delta_second = Zd2_(x);
  out.z_gamma_delta_second = Zgd2_(x);
  return out;
}

double ScaleContext::Z_gamma_delta_ratio(double x, double b) const {
  const double s = scale_;
  return std::exp(s * (x - b)) * Zgd_.eval_scaled(x, s) / Zgd_.eval_scaled(b, s);
}

double ScaleContext::L(double x, double b) const {
  const double s = scale_;
  const double zd_over_zgd = fd_.Z.eval_scaled(b, s) / Zgd_.eval_scaled(b, s);
  return g_ * (fd_.Z(x) - Zgd_(x) * zd_over_zgd);
}

double ScaleContext::B(double x, double b) const {
  const double s = scale_;
  const double k_over_zgd = K_.eval_scaled(b, s) / Zgd_.eval_scaled(b, s);
  return g_ * (K_(x) - Zgd_(x) * k_over_zgd);
}

double ScaleContext::A_lower(double x, double d, double kappa) const {
  return (-a() * J_(x) - H_(x) + (d - kappa) * C_(x)) / g_;
}

double ScaleContext::gA_lower_prime(double x, double d, double kappa) const {
  return -a() * J1_(x) - H1_(x) + (d - kappa) * C1_(x);
}

double ScaleContext::gA_lower_second(double x, double d, double kappa) const {
  return -a() * J2_(x) - H2_(x) + (d - kappa) * C2_(x);
}

double ScaleContext::A_upper(double x, double d, double kappa) const {
  const double phi = phi_gamma_delta();
  const double k = d - kappa + mu_ / (tp_.gamma + tp_.delta);
  return x - k * std::expm1(-phi * x);
}

double ScaleContext::H_over_J(double b) const {
  return H_.eval_scaled(b, scale_) / J_.eval_scaled(b, scale_);
}

double ScaleContext::HJ_cross_over_J(double u, double v) const {
  if (!(v >= 0.0 && v <= u)) throw PreconditionViolated("HJ_cross_over_J needs 0 <= v <= u");
  return cross_scaled(H_.pos, J_.pos, u, v, scale_) / J_.pos.eval_scaled(u, scale_);
}

}  // namespace perdiv
