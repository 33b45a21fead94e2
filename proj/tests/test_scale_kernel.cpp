#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "perdiv/errors.hpp"
#include "perdiv/scale_kernel.hpp"
#include "support/oracles.hpp"

using namespace perdiv;
using testsupport::baseline_model;
using testsupport::baseline_tp;
using testsupport::rel_err;

namespace {

std::vector<ScaleContext> contexts() {
  return {ScaleContext(baseline_model(), baseline_tp()),
          ScaleContext(testsupport::no_diffusion_model(), baseline_tp()),
          ScaleContext(testsupport::two_phase_model(), {0.1, 0.01})};
}

// Relative agreement with a floor on the scale.
bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("scale_kernel") {

TEST_CASE("W vanishes on the negative half-line and at 0 iff sigma > 0") {
  for (const auto& c : contexts()) {
    CHECK(c.W(QTag::delta, -1.0) == 0.0);
    CHECK(c.W_bar(QTag::delta, -1.0) == 0.0);
    CHECK(c.W_bar(QTag::delta, 0.0) == doctest::Approx(0.0));
  }
  const ScaleContext base(baseline_model(), baseline_tp());
  CHECK(base.W(QTag::delta, 0.0) == 0.0);
  CHECK(std::abs(base.W(QTag::delta, 1e-9)) < 1e-6);
  const ScaleContext bv(testsupport::no_diffusion_model(), baseline_tp());
  CHECK(bv.W(QTag::delta, 0.0) == doctest::Approx(1.0 / 0.03).epsilon(1e-10));
}

TEST_CASE("Laplace transform of W matches 1/(psi - q)") {
  for (const auto& c : contexts()) {
    for (auto tag : {QTag::delta, QTag::gamma_delta}) {
      const double q = c.q(tag);
      const double ph = c.dec(tag).phi_q;
      for (double off : {0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double theta = ph + off;
        const double quad = testsupport::integrate_decaying(
            [&](double x) { return std::exp(-theta * x) * c.W(tag, x); }, 0.0, off, ph);
        CHECK(rel_err(quad, 1.0 / (laplace_exponent(c.model(), theta) - q)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("W_bar and W_bar_bar are integrals of W") {
  for (const auto& c : contexts()) {
    for (double x : {0.3, 2.0}) {
      const double i1 = testsupport::integrate([&](double y) { return c.W(QTag::delta, y); }, 0.0, x);
      CHECK(rel_err(c.W_bar(QTag::delta, x), i1) <= 1e-8);
      const double i2 = testsupport::integrate([&](double y) { return c.W_bar(QTag::delta, y); }, 0.0, x);
      CHECK(rel_err(c.W_bar_bar(QTag::delta, x), i2) <= 1e-8);
    }
  }
}

TEST_CASE("Z relations") {
  for (const auto& c : contexts()) {
    const double phi = c.phi_gamma_delta();
    for (double x : {0.0, 0.7, 3.0}) {
      CHECK(close(c.Z(QTag::delta, x), 1.0 + c.q(QTag::delta) * c.W_bar(QTag::delta, x), 1e-12));
      CHECK(close(c.Z(QTag::delta, x, 0.0), c.Z(QTag::delta, x), 1e-15));
      CHECK(close(c.Z(QTag::delta, x, phi), c.Z_gamma_delta(x), 1e-15));
    }
    CHECK(c.Z(QTag::delta, 0.0, 1.3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.Z(QTag::delta, -0.5) == 1.0);
    CHECK(c.Z_gamma_delta(-0.5) == doctest::Approx(std::exp(-0.5 * phi)).epsilon(1e-15));
    CHECK(c.Z_bar_delta(-0.5) == doctest::Approx(-0.5));
  }
}

TEST_CASE("tilted Z agrees with its defining integral") {
  for (const auto& c : contexts()) {
    for (double theta : {0.4, 2.0, 7.5}) {
      for (double x : {0.2, 1.5}) {
        const double inner =
            testsupport::integrate([&](double y) { return std::exp(-theta * y) * c.W(QTag::delta, y); }, 0.0, x);
        const double ref =
            std::exp(theta * x) * (1.0 - (laplace_exponent(c.model(), theta) - c.q(QTag::delta)) * inner);
        CHECK(close(c.Z(QTag::delta, x, theta), ref, 1e-9));
      }
    }
  }
}

TEST_CASE("tilted Z at a root is a pure exponential") {
  const ScaleContext c(baseline_model(), baseline_tp());
  const double r = c.phi_delta();
  CHECK(c.Z(QTag::delta, 1.2, r) == doctest::Approx(std::exp(r * 1.2)).epsilon(1e-14));
}

TEST_CASE("Z_gamma_delta dual representation") {
  for (const auto& c : contexts()) {
    const double phi = c.phi_gamma_delta();
    const double gamma = c.time_pref().gamma;
    for (double x : {0.1, 1.0, 5.0}) {
      const double quad =
          gamma * testsupport::integrate_decaying(
                      [&](double u) { return std::exp(-phi * u) * c.W(QTag::delta, x + u); }, 0.0, phi - c.phi_delta(),
                      c.phi_delta());
      CHECK(rel_err(c.Z_gamma_delta(x), quad) <= 1e-8);
    }
  }
}

TEST_CASE("monotone ratios on (0, 10] up to a 1e-12 relative slack") {
  for (const auto& c : contexts()) {
    int violations_1 = 0, violations_2 = 0;
    double prev1 = std::numeric_limits<double>::infinity(), prev2 = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 500; ++i) {
      const double x = 10.0 * i / 500.0;
      const double r1 = c.Z_gamma_delta(x) / c.W(QTag::delta, x);
      const double r2 = c.Z_gamma_delta(x) / c.Z(QTag::delta, x);
      if (r1 > prev1 + 1e-12 * std::abs(prev1)) ++violations_1;
      if (!(r2 > prev2 - 1e-12 * std::abs(prev2))) ++violations_2;
      prev1 = r1;
      prev2 = r2;
    }
    CHECK(violations_1 == 0);
    CHECK(violations_2 == 0);
  }
}

TEST_CASE("coded derivatives agree with finite differences") {
  std::mt19937_64 rng(20241);
  std::uniform_real_distribution<double> pick(0.05, 5.0);
  for (const auto& c : contexts()) {
    const double d = 0.7, kappa = 0.06;
    using Fn = std::function<double(double)>;
    struct Pair {
      const char* name;
      Fn f, fp;
    };
    const std::vector<Pair> pairs = {
        {"W", [&](double x) { return c.W(QTag::delta, x); }, [&](double x) { return c.W_prime(QTag::delta, x); }},
        {"W'", [&](double x) { return c.W_prime(QTag::gamma_delta, x); },
         [&](double x) { return c.W_second(QTag::gamma_delta, x); }},
        {"Z_delta", [&](double x) { return c.Z(QTag::delta, x); },
         [&](double x) { return c.Z_prime_family(x).z_delta_prime; }},
        {"Z_delta'", [&](double x) { return c.Z_prime_family(x).z_delta_prime; },
         [&](double x) { return c.Z_prime_family(x).z_delta_second; }},
        {"Z_gd", [&](double x) { return c.Z_gamma_delta(x); },
         [&](double x) { return c.Z_prime_family(x).z_gamma_delta_prime; }},
        {"Z_gd'", [&](double x) { return c.Z_prime_family(x).z_gamma_delta_prime; },
         [&](double x) { return c.Z_prime_family(x).z_gamma_delta_second; }},
        {"J", [&](double x) { return c.J(x); }, [&](double x) { return c.J_prime(x); }},
        {"H", [&](double x) { return c.H(x); }, [&](double x) { return c.H_prime(x); }},
        {"C", [&](double x) { return c.C(x); }, [&](double x) { return c.C_prime(x); }},
        {"C'", [&](double x) { return c.C_prime(x); }, [&](double x) { return c.C_second(x); }},
        {"gA", [&](double x) { return c.g() * c.A_lower(x, d, kappa); },
         [&](double x) { return c.gA_lower_prime(x, d, kappa); }},
        {"gA'", [&](double x) { return c.gA_lower_prime(x, d, kappa); },
         [&](double x) { return c.gA_lower_second(x, d, kappa); }},
    };
    for (int i = 0; i < 10; ++i) {
      const double x = pick(rng);
      for (const auto& p : pairs) {
        INFO(p.name << " at x = " << x);
        const double fd = testsupport::central_diff(p.f, x, 1e-4 * std::max(1.0, x));
        CHECK(close(p.fp(x), fd, 1e-6));
      }
    }
  }
}

TEST_CASE("closed-form derivative identities") {
  for (const auto& c : contexts()) {
    const auto& tp = c.time_pref();
    const double phi = c.phi_gamma_delta();
    for (double x : {0.05, 0.8, 4.0}) {
      CHECK(close(c.J_prime(x), tp.delta / (tp.gamma + tp.delta) * phi * c.Z_gamma_delta(x), 1e-12));
      CHECK(close(c.Z_prime_family(x).z_delta_prime, tp.delta * c.W(QTag::delta, x), 1e-12));
      CHECK(close(c.Z_prime_family(x).z_gamma_delta_prime,
                  phi * c.Z_gamma_delta(x) - tp.gamma * c.W(QTag::delta, x), 1e-10));
    }
  }
}

TEST_CASE("composite values at zero") {
  const ScaleContext c(baseline_model(), baseline_tp());
  CHECK(c.J(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(c.C(0.0)) <= 1e-13);
  CHECK(c.H(0.0) == doctest::Approx(-(0.04 / 0.043) * baseline_model().mu() / 0.003).epsilon(1e-12));
  CHECK(c.A_upper(0.0, 0.7, 0.06) == 0.0);
  for (double d : {0.1, 1.0}) CHECK(std::abs(c.A_lower(0.0, d, 0.06)) < 1e-12);
  CHECK(c.Z_prime_family(0.0).z_delta_prime == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.Z_prime_family(0.0).z_gamma_delta_prime == doctest::Approx(c.phi_gamma_delta()).epsilon(1e-10));
}

TEST_CASE("A_lower slope at 0 in bounded variation") {
  const ScaleContext c(testsupport::no_diffusion_model(), baseline_tp());
  const double gd = c.time_pref().gamma + c.time_pref().delta;
  for (double d : {0.3, 0.8}) {
    const double kappa = 0.06;
    const double expect = -1.0 - c.phi_gamma_delta() * (d - kappa + c.mu() / gd) + (d - kappa) * gd * c.W(QTag::delta, 0.0);
    CHECK(c.gA_lower_prime(0.0, d, kappa) / c.g() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("A_upper closed form") {
  const ScaleContext c(baseline_model(), baseline_tp());
  const double d = 0.7, kappa = 0.06, x = 0.4;
  const double k = d - kappa + c.mu() / (c.time_pref().gamma + c.time_pref().delta);
  CHECK(c.A_upper(x, d, kappa) == doctest::Approx(x + k * (1.0 - std::exp(-c.phi_gamma_delta() * x))).epsilon(1e-14));
}

TEST_CASE("L and B") {
  for (const auto& c : contexts()) {
    const double b = 2.0;
    CHECK(std::abs(c.L(b, b)) < 1e-12);
    CHECK(std::abs(c.B(b, b)) < 1e-12);
    for (double x : {0.2, 1.0}) {
      const double rhs = -c.a() * c.J(x) - c.H(x) + c.Z_gamma_delta(x) * c.B(0.0, b);
      CHECK(std::abs(c.B(x, b) - rhs) <= 1e-10);
    }
    for (int i = 0; i <= 100; ++i) {
      const double x = b * i / 100.0;
      const double l = c.L(x, b);
      CHECK(l >= -1e-12);
      CHECK(l < 1.0);
    }
  }
}

TEST_CASE("stable ratios match naive forms where those are accurate") {
  const ScaleContext c(baseline_model(), baseline_tp());
  for (double b : {0.3, 1.0, 4.0}) {
    CHECK(c.H_over_J(b) == doctest::Approx(c.H(b) / c.J(b)).epsilon(1e-12));
    CHECK(c.Z_gamma_delta_ratio(0.5 * b, b) == doctest::Approx(c.Z_gamma_delta(0.5 * b) / c.Z_gamma_delta(b)).epsilon(1e-12));
    const double v = 0.4 * b;
    const double naive = (c.H(b) * c.J(v) - c.H(v) * c.J(b)) / c.J(b);
    CHECK(std::abs(c.HJ_cross_over_J(b, v) - naive) <= 1e-12 * (1.0 + std::abs(naive)));
  }
  // large arguments stay finite
  CHECK(std::isfinite(c.H_over_J(800.0)));
  CHECK(std::isfinite(c.HJ_cross_over_J(800.0, 799.0)));
  CHECK_THROWS_AS(c.HJ_cross_over_J(1.0, 2.0), PreconditionViolated);
}

TEST_CASE("context invariants") {
  for (const auto& c : contexts()) {
    CHECK(c.q(QTag::delta) == c.time_pref().delta);
    CHECK(c.q(QTag::gamma_delta) == c.time_pref().gamma + c.time_pref().delta);
    CHECK(c.phi_gamma_delta() > c.phi_delta());
  }
  CHECK_THROWS_AS(ScaleContext(baseline_model(), {0.0, 0.003}), ModelError);
}

}
