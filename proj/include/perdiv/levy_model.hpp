#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <utility>
#include <vector>

namespace perdiv {

using cplx = std::complex<double>;

// One exponential component of the upward jump law: jumps arrive at `rate`
// and have density scale * exp(-scale * s).
struct JumpPhase {
  double rate = 0.0;
  double scale = 0.0;

  bool operator==(const JumpPhase&) const = default;
};

// Surplus X(t) = x - drift_c t + sigma B(t) + (hyperexponential jumps).
// All formulas work with the Laplace exponent psi of Y = x - X:
//
//   psi(theta) = drift_c theta + sigma^2 theta^2 / 2
//                + sum_i rate_i (scale_i / (scale_i + theta) - 1).
struct ModelSpec {
  double drift_c = 0.0;
  double sigma = 0.0;
  std::vector<JumpPhase> jump_phases;

  // Throws ModelError when the invariants do not hold.
  void validate() const;

  bool unbounded_variation() const { return sigma > 0.0; }
  double total_jump_rate() const;
  // mu = -psi'(0+) = -drift_c + sum rate_i / scale_i.
  double mu() const;
  // int_0^1 s Pi(ds), the compensated small-jump mass.
  double small_jump_first_moment() const;

  std::uint64_t hash() const;
  bool operator==(const ModelSpec&) const = default;
};

struct TimePreference {
  double gamma = 0.0;  // intensity of dividend decision times
  double delta = 0.0;  // discount force

  void validate() const;
  bool operator==(const TimePreference&) const = default;
};

double laplace_exponent(const ModelSpec& model, double theta);
cplx laplace_exponent(const ModelSpec& model, cplx theta);

struct PsiDerivatives {
  double first = 0.0;
  double second = 0.0;
};

PsiDerivatives psi_derivatives(const ModelSpec& model, double theta);
cplx psi_prime(const ModelSpec& model, cplx theta);

// Roots of psi(theta) = q and the partial-fraction weights 1/psi'(r_j):
//
//   1 / (psi(theta) - q) = sum_j weights_j / (theta - roots_j).
struct RootDecomposition {
  double q = 0.0;
  std::vector<cplx> roots;
  std::vector<cplx> weights;
  double phi_q = 0.0;  // largest real root

  cplx resolvent(cplx theta) const;
};

struct RootTolerances {
  double distinctness = 1e-8;
  double residual = 1e-10;
};

// Coefficients (ascending powers) of (psi(theta) - q) * prod_i (scale_i + theta).
std::vector<double> cleared_polynomial(const ModelSpec& model, double q);

RootDecomposition solve_roots(const ModelSpec& model, double q, const RootTolerances& tol = {});

// Right inverse: the largest real s with psi(s) = q, for q >= 0.
double phi(const ModelSpec& model, double q);

// Process-wide cache of root decompositions keyed by (model hash, q).
// Concurrent readers share the lock; insertion takes it exclusively.
class RootCache {
 public:
  std::shared_ptr<const RootDecomposition> get(const ModelSpec& model, double q);
  std::size_t size() const;
  void clear();

  static RootCache& global();

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const RootDecomposition>> entries_;
};

}  // namespace perdiv
