#include "perdiv/levy_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

#include "perdiv/errors.hpp"

namespace perdiv {

namespace {

template <typename T>
T psi_impl(const ModelSpec& model, T theta) {
  T value = model.drift_c * theta + 0.5 * model.sigma * model.sigma * theta * theta;
  for (const auto& ph : model.jump_phases) {
    const T denom = ph.scale + theta;
    if (denom == T(0.0)) {
      std::ostringstream os;
      os << "psi evaluated at its pole theta = " << -ph.scale;
      throw PoleError(os.str());
    }
    value += ph.rate * (ph.scale / denom - 1.0);
  }
  return value;
}

template <typename T>
T psi_prime_impl(const ModelSpec& model, T theta) {
  T value = model.drift_c + model.sigma * model.sigma * theta;
  for (const auto& ph : model.jump_phases) {
    const T denom = ph.scale + theta;
    if (denom == T(0.0)) throw PoleError("psi' evaluated at a pole");
    value -= ph.rate * ph.scale / (denom * denom);
  }
  return value;
}

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

void poly_add_into(Poly& acc, const Poly& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
}

void trim(Poly& p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
}

// All roots of psi(theta) = q, polished by Newton on psi itself.
std::vector<cplx> raw_roots(const ModelSpec& model, double q) {
  Poly coeffs = cleared_polynomial(model, q);
  const auto degree = static_cast<Eigen::Index>(coeffs.size()) - 1;
  if (degree < 1) throw ModelError("Laplace exponent polynomial is degenerate");

  std::vector<cplx> roots;
  if (degree == 1) {
    roots.emplace_back(-coeffs[0] / coeffs[1], 0.0);
  } else {
    Eigen::VectorXd c(degree + 1);
    for (Eigen::Index i = 0; i <= degree; ++i) c[i] = coeffs[static_cast<std::size_t>(i)];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(c);
    const auto& r = solver.roots();
    for (Eigen::Index i = 0; i < r.size(); ++i) roots.push_back(r[i]);
  }

  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx f, fp;
      try {
        f = psi_impl(model, r) - q;
        fp = psi_prime_impl(model, r);
      } catch (const PoleError&) {
        break;
      }
      if (fp == cplx(0.0)) break;
      const cplx step = f / fp;
      const cplx next = r - step;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      const double before = std::abs(f);
      double after = before;
      try {
        after = std::abs(psi_impl(model, next) - q);
      } catch (const PoleError&) {
        break;
      }
      if (after > before) break;
      r = next;
      if (after == 0.0) break;
    }
  }

  // Snap numerically real roots to the real axis and enforce exact conjugate pairs.
  for (auto& r : roots) {
    if (std::abs(r.imag()) <= 1e-10 * (1.0 + std::abs(r.real()))) {
      double x = r.real();
      for (int it = 0; it < 2; ++it) {
        const double f = psi_impl(model, x) - q;
        const double fp = psi_prime_impl(model, x);
        if (fp == 0.0) break;
        const double next = x - f / fp;
        if (std::abs(psi_impl(model, next) - q) > std::abs(f)) break;
        x = next;
      }
      r = cplx(x, 0.0);
    }
  }
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() <= 0.0) continue;
    std::size_t best = roots.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i || used[j] || roots[j].imag() >= 0.0) continue;
      const double dist = std::abs(roots[j] - std::conj(roots[i]));
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best == roots.size()) throw NumericalError("complex root without conjugate partner");
    const cplx avg = 0.5 * (roots[i] + std::conj(roots[best]));
    roots[i] = avg;
    roots[best] = std::conj(avg);
    used[i] = used[best] = true;
  }

  std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return roots;
}

double largest_real_root(const std::vector<cplx>& roots) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : roots)
    if (r.imag() == 0.0) best = std::max(best, r.real());
  return best;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // FNV-1a over the 8 bytes of v
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void ModelSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ModelError(msg); };
  if (!std::isfinite(drift_c)) fail("drift_c must be finite");
  if (!std::isfinite(sigma) || sigma < 0.0) fail("sigma must be finite and >= 0");
  for (std::size_t i = 0; i < jump_phases.size(); ++i) {
    const auto& ph = jump_phases[i];
    if (!(ph.rate > 0.0) || !std::isfinite(ph.rate))
      fail("jump_rate_" + std::to_string(i + 1) + " must be > 0");
    if (!(ph.scale > 0.0) || !std::isfinite(ph.scale))
      fail("jump_scale_" + std::to_string(i + 1) + " must be > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (jump_phases[j].scale == ph.scale) fail("jump scales must be pairwise distinct");
  }
  const bool monotone = !(sigma > 0.0) && (jump_phases.empty() || !(drift_c > 0.0));
  if (monotone)
    fail("model has monotone paths: need sigma > 0, or jumps together with drift_c > 0");
}

double ModelSpec::total_jump_rate() const {
  double total = 0.0;
  for (const auto& ph : jump_phases) total += ph.rate;
  return total;
}

double ModelSpec::mu() const {
  double m = -drift_c;
  for (const auto& ph : jump_phases) m += ph.rate / ph.scale;
  return m;
}

double ModelSpec::small_jump_first_moment() const {
  double m = 0.0;
  for (const auto& ph : jump_phases) {
    const double b = ph.scale;
    m += ph.rate * (1.0 - std::exp(-b) * (1.0 + b)) / b;
  }
  return m;
}

std::uint64_t ModelSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = mix(h, std::bit_cast<std::uint64_t>(drift_c));
  h = mix(h, std::bit_cast<std::uint64_t>(sigma));
  for (const auto& ph : jump_phases) {
    h = mix(h, std::bit_cast<std::uint64_t>(ph.rate));
    h = mix(h, std::bit_cast<std::uint64_t>(ph.scale));
  }
  return h;
}

void TimePreference::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ModelError("gamma must be > 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ModelError("delta must be > 0");
}

double laplace_exponent(const ModelSpec& model, double theta) { return psi_impl(model, theta); }
cplx laplace_exponent(const ModelSpec& model, cplx theta) { return psi_impl(model, theta); }

PsiDerivatives psi_derivatives(const ModelSpec& model, double theta) {
  PsiDerivatives d;
  d.first = psi_prime_impl(model, theta);
  d.second = model.sigma * model.sigma;
  for (const auto& ph : model.jump_phases) {
    const double denom = ph.scale + theta;
    d.second += 2.0 * ph.rate * ph.scale / (denom * denom * denom);
  }
  return d;
}

cplx psi_prime(const ModelSpec& model, cplx theta) { return psi_prime_impl(model, theta); }

cplx RootDecomposition::resolvent(cplx theta) const {
  cplx sum = 0.0;
  for (std::size_t j = 0; j < roots.size(); ++j) sum += weights[j] / (theta - roots[j]);
  return sum;
}

std::vector<double> cleared_polynomial(const ModelSpec& model, double q) {
  Poly base{-q, model.drift_c, 0.5 * model.sigma * model.sigma};
  trim(base);
  Poly prod{1.0};
  for (const auto& ph : model.jump_phases) prod = poly_mul(prod, Poly{ph.scale, 1.0});
  Poly out = poly_mul(base, prod);
  // rate_i (scale_i/(scale_i+theta) - 1) * prod = -rate_i theta prod_{k != i}
  for (std::size_t i = 0; i < model.jump_phases.size(); ++i) {
    Poly others{1.0};
    for (std::size_t k = 0; k < model.jump_phases.size(); ++k)
      if (k != i) others = poly_mul(others, Poly{model.jump_phases[k].scale, 1.0});
    poly_add_into(out, poly_mul(Poly{0.0, -model.jump_phases[i].rate}, others));
  }
  trim(out);
  return out;
}

RootDecomposition solve_roots(const ModelSpec& model, double q, const RootTolerances& tol) {
  if (!(q > 0.0)) throw PreconditionViolated("solve_roots requires q > 0");
  model.validate();

  RootDecomposition dec;
  dec.q = q;
  dec.roots = raw_roots(model, q);

  double spread = 0.0;
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dec.roots.size(); ++i)
    for (std::size_t j = i + 1; j < dec.roots.size(); ++j) {
      const double dist = std::abs(dec.roots[i] - dec.roots[j]);
      spread = std::max(spread, dist);
      closest = std::min(closest, dist);
    }
  if (dec.roots.size() > 1 && closest < tol.distinctness * std::max(spread, 1.0)) {
    std::ostringstream os;
    os << "roots of psi(theta) = " << q << " are nearly multiple (separation " << closest << ")";
    throw NearMultipleRoots(os.str());
  }

  for (const auto& r : dec.roots) {
    // Residual relative to the size of the terms that cancel in psi(r) - q.
    double magnitude = std::abs(model.drift_c * r) +
                       0.5 * model.sigma * model.sigma * std::norm(r) + q;
    for (const auto& ph : model.jump_phases)
      magnitude += ph.rate * (1.0 + std::abs(ph.scale / (ph.scale + r)));
    const double residual = std::abs(laplace_exponent(model, r) - q);
    if (residual > tol.residual * (1.0 + q) * std::max(1.0, magnitude)) {
      std::ostringstream os;
      os << "root " << r << " has residual " << residual;
      throw NumericalError(os.str());
    }
    dec.weights.push_back(1.0 / psi_prime(model, r));
  }

  dec.phi_q = largest_real_root(dec.roots);
  if (!(dec.phi_q > 0.0)) throw NoPositiveRealRoot("no positive real root of psi(theta) = q");
  return dec;
}

double phi(const ModelSpec& model, double q) {
  if (!(q >= 0.0)) throw PreconditionViolated("phi requires q >= 0");
  model.validate();
  if (q > 0.0) return RootCache::global().get(model, q)->phi_q;
  // psi(0) = 0 exactly; the second zero is positive iff mu > 0.
  const auto roots = raw_roots(model, 0.0);
  return std::max(0.0, largest_real_root(roots));
}

std::shared_ptr<const RootDecomposition> RootCache::get(const ModelSpec& model, double q) {
  const Key key{model.hash(), std::bit_cast<std::uint64_t>(q)};
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto dec = std::make_shared<const RootDecomposition>(solve_roots(model, q));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, dec);
  return it->second;
}

std::size_t RootCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void RootCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

RootCache& RootCache::global() {
  static RootCache cache;
  return cache;
}

}  // namespace perdiv
