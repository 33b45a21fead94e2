#pragma once

#include <memory>

#include "perdiv/exp_sum.hpp"
#include "perdiv/levy_model.hpp"

namespace perdiv {

enum class QTag { delta, gamma_delta };

struct ZDerivatives {
  double z_delta_prime = 0.0;
  double z_gamma_delta_prime = 0.0;
  double z_delta_second = 0.0;        // right limit
  double z_gamma_delta_second = 0.0;  // right limit
};

// Scale functions at q = delta and q = gamma + delta, and the composites
// built from them. Immutable once constructed.
class ScaleContext {
 public:
  ScaleContext(const ModelSpec& model, const TimePreference& tp);

  const ModelSpec& model() const { return model_; }
  const TimePreference& time_pref() const { return tp_; }
  const RootDecomposition& dec(QTag tag) const {
    return tag == QTag::delta ? *dec_delta_ : *dec_gamma_delta_;
  }
  double q(QTag tag) const { return dec(tag).q; }

  double phi_delta() const { return dec_delta_->phi_q; }
  double phi_gamma_delta() const { return dec_gamma_delta_->phi_q; }
  double mu() const { return mu_; }
  // gamma / (gamma + delta)
  double g() const { return g_; }
  // gamma / (gamma + delta) * mu / delta
  double a() const { return g_ * mu_ / tp_.delta; }

  double W(QTag tag, double x) const {
    if (x == 0.0 && model_.unbounded_variation()) return 0.0;
    return fam(tag).W(x);
  }
  double W_prime(QTag tag, double x) const { return fam(tag).W1(x); }
  double W_second(QTag tag, double x) const { return fam(tag).W2(x); }
  double W_bar(QTag tag, double x) const { return fam(tag).Wbar(x); }
  double W_bar_bar(QTag tag, double x) const { return fam(tag).Wbarbar(x); }
  double Z(QTag tag, double x) const { return fam(tag).Z(x); }
  // Tilted scale function Z_q(x, theta), theta >= 0.
  double Z(QTag tag, double x, double theta) const;
  ExpSum Z_tilted(QTag tag, double theta) const;

  double Z_bar_delta(double x) const { return Zbar_(x); }
  double Z_gamma_delta(double x) const { return Zgd_(x); }
  ZDerivatives Z_prime_family(double x) const;

  double J(double x) const { return J_(x); }
  double H(double x) const { return H_(x); }
  double C(double x) const { return C_(x); }
  double K(double x) const { return K_(x); }
  double J_prime(double x) const { return J1_(x); }
  double H_prime(double x) const { return H1_(x); }
  double C_prime(double x) const { return C1_(x); }
  double C_second(double x) const { return C2_(x); }

  double L(double x, double b) const;
  double B(double x, double b) const;

  // A_{gamma,delta}(x; d) and A_{u,gamma,delta}(x; d).
  double A_lower(double x, double d, double kappa) const;
  double A_upper(double x, double d, double kappa) const;
  // Derivatives in x of g * A_lower.
  double gA_lower_prime(double x, double d, double kappa) const;
  double gA_lower_second(double x, double d, double kappa) const;

  // H(b) / J(b), safe for large b.
  double H_over_J(double b) const;
  // Z_{gamma,delta}(x) / Z_{gamma,delta}(b), safe for large arguments.
  double Z_gamma_delta_ratio(double x, double b) const;
  // H(u) J(v) - H(v) J(u), divided by J(u); requires 0 <= v <= u.
  double HJ_cross_over_J(double u, double v) const;

  const PiecewiseExpSum& J_fn() const { return J_; }
  const PiecewiseExpSum& H_fn() const { return H_; }
  const PiecewiseExpSum& C_fn() const { return C_; }
  const PiecewiseExpSum& K_fn() const { return K_; }
  const PiecewiseExpSum& Z_delta_fn() const { return fam(QTag::delta).Z; }
  const PiecewiseExpSum& Z_gamma_delta_fn() const { return Zgd_; }
  const PiecewiseExpSum& Z_bar_delta_fn() const { return Zbar_; }
  double scale_rate() const { return scale_; }

 private:
  struct Family {
    PiecewiseExpSum W, W1, W2, Wbar, Wbarbar, Z;
  };
  const Family& fam(QTag tag) const { return tag == QTag::delta ? fd_ : fgd_; }
  static Family build_family(const RootDecomposition& dec);

  ModelSpec model_;
  TimePreference tp_;
  std::shared_ptr<const RootDecomposition> dec_delta_;
  std::shared_ptr<const RootDecomposition> dec_gamma_delta_;
  double mu_ = 0.0;
  double g_ = 0.0;
  double scale_ = 0.0;

  Family fd_, fgd_;
  PiecewiseExpSum Zgd_, Zbar_, J_, H_, C_, K_;
  PiecewiseExpSum Zd1_, Zd2_, Zgd1_, Zgd2_, J1_, H1_, C1_, K1_, C2_, J2_, H2_;
};

}  // namespace perdiv
