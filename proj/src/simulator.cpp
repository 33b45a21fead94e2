#include "perdiv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "perdiv/errors.hpp"
#include "perdiv/parallel.hpp"
#include "perdiv/philox.hpp"

namespace perdiv {

namespace {

constexpr std::uint64_t kBlock = 1024;

struct PathResult {
  double discounted = 0.0;
  bool ruined = false;
};

class PathSimulator {
 public:
  PathSimulator(const ModelSpec& m, const TimePreference& tp, const Strategy& s, const SimConfig& cfg)
      : m_(m),
        tp_(tp),
        s_(s),
        cfg_(cfg),
        lambda_(m.total_jump_rate()),
        drift_dt_(m.drift_c * cfg.dt),
        sd_dt_(m.sigma * std::sqrt(cfg.dt)),
        inv_var_dt_(m.sigma > 0.0 ? 2.0 / (m.sigma * m.sigma * cfg.dt) : 0.0) {}

  // sign = -1 negates every Gaussian increment; draws are consumed in the
  // same order for both signs.
  PathResult run(PathStream& rng, double x0, double sign, bool always_draw) const {
    PathResult res;
    if (!(x0 > 0.0)) {
      res.ruined = true;
      return res;
    }
    const double T = cfg_.horizon_T;
    const double sigma = m_.sigma;
    double t = 0.0;
    double x = x0;
    double next_jump = lambda_ > 0.0 ? rng.exponential(lambda_) : std::numeric_limits<double>::infinity();
    double next_decision = rng.exponential(tp_.gamma);
    for (;;) {
      const double t_event = std::min({next_jump, next_decision, T});
      // Diffusive motion up to the next event on a grid of width <= dt.
      while (t < t_event) {
        const bool full = t_event - t >= cfg_.dt;
        const double tau = full ? cfg_.dt : t_event - t;
        double x_new = x - (full ? drift_dt_ : m_.drift_c * tau);
        if (sigma > 0.0) x_new += sign * (full ? sd_dt_ : sigma * std::sqrt(tau)) * rng.normal();
        t += tau;
        if (x_new < 0.0) {
          res.ruined = true;
          return res;
        }
        if (sigma > 0.0 && cfg_.bridge_correction) {
          const double expo = -x * x_new * (full ? inv_var_dt_ : 2.0 / (sigma * sigma * tau));
          if (always_draw || expo > -40.0) {
            const double u = rng.uniform();
            if (u < std::exp(expo)) {
              res.ruined = true;
              return res;
            }
          }
        }
        x = x_new;
      }
      t = t_event;
      if (t_event >= T) return res;
      if (next_jump <= next_decision) {
        x += draw_jump(rng);
        next_jump += rng.exponential(lambda_);
      } else {
        if (x >= s_.b_u) {
          const double pay = x - s_.b_l;
          if (pay < s_.kappa) throw NumericalError("simulated payment below kappa");
          res.discounted += std::exp(-tp_.delta * t) * (pay - s_.kappa);
          x = s_.b_l;
          if (!(x > 0.0)) {
            res.ruined = true;
            return res;
          }
        }
        next_decision += rng.exponential(tp_.gamma);
      }
    }
  }

 private:
  double draw_jump(PathStream& rng) const {
    const auto& phases = m_.jump_phases;
    std::size_t i = 0;
    if (phases.size() > 1) {
      double u = rng.uniform() * lambda_;
      while (i + 1 < phases.size() && u >= phases[i].rate) {
        u -= phases[i].rate;
        ++i;
      }
    }
    return rng.exponential(phases[i].scale);
  }

  const ModelSpec& m_;
  const TimePreference& tp_;
  const Strategy& s_;
  const SimConfig& cfg_;
  double lambda_;
  double drift_dt_;
  double sd_dt_;
  double inv_var_dt_;
};

void check_config(const ModelSpec& model, const TimePreference& tp, const Strategy& s, double x0,
                  const SimConfig& cfg) {
  model.validate();
  tp.validate();
  if (!s.admissible()) throw ConfigError("strategy is not admissible");
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw ConfigError("x0 must be finite and >= 0");
  if (cfg.paths < 1) throw ConfigError("paths must be >= 1");
  if (!(cfg.horizon_T > 0.0) || !std::isfinite(cfg.horizon_T)) throw ConfigError("horizon must be > 0");
  const double dt_max = max_time_step(model, tp);
  if (!(cfg.dt > 0.0) || cfg.dt > dt_max * (1.0 + 1e-12))
    throw ConfigError("dt must lie in (0, " + std::to_string(dt_max) + "]");
}

struct Moments {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t ruined = 0;
};

template <typename PerUnit>
SimEstimate run_blocks(std::uint64_t units, std::uint64_t paths_per_unit, unsigned threads,
                       PerUnit&& per_unit) {
  const std::uint64_t blocks = (units + kBlock - 1) / kBlock;
  std::vector<Moments> partial(blocks);
  parallel_for(
      blocks,
      [&](std::size_t b) {
        Moments mo;
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(units, lo + kBlock);
        for (std::uint64_t u = lo; u < hi; ++u) {
          std::uint64_t ruined = 0;
          const double y = per_unit(u, ruined);
          mo.sum += y;
          mo.sumsq += y * y;
          mo.ruined += ruined;
        }
        partial[b] = mo;
      },
      threads);
  Moments total;
  for (const auto& mo : partial) {
    total.sum += mo.sum;
    total.sumsq += mo.sumsq;
    total.ruined += mo.ruined;
  }
  SimEstimate est;
  const double n = static_cast<double>(units);
  est.mean = total.sum / n;
  const double var = units > 1 ? std::max(0.0, (total.sumsq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
  est.std_error = std::sqrt(var / n);
  est.paths_ruined_fraction = static_cast<double>(total.ruined) / (n * static_cast<double>(paths_per_unit));
  return est;
}

void finish(SimEstimate& est, const ModelSpec& model, const TimePreference& tp, const Strategy& s,
            double x0, const SimConfig& cfg) {
  est.truncation_bound = truncation_bound(model, tp, s, x0, cfg.horizon_T);
  if (est.mean > 0.0 && est.truncation_bound > 1e-3 * est.mean)
    throw ConfigError("horizon too short: truncation bound exceeds 0.1% of the estimate");
}

}  // namespace

double max_time_step(const ModelSpec& model, const TimePreference& tp) {
  return 0.1 / std::max({tp.gamma, tp.delta, model.total_jump_rate()});
}

double truncation_bound(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                        double x0, double horizon_T) {
  return std::exp(-tp.delta * horizon_T) * (x0 + std::max(model.mu(), 0.0) * horizon_T + s.b_u);
}

double default_horizon(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                       double x0, double target) {
  double T = 100.0;
  while (truncation_bound(model, tp, s, x0, T) > target && T < 1e9) T *= 2.0;
  return T;
}

SimEstimate simulate_value(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                           double x0, const SimConfig& cfg) {
  check_config(model, tp, s, x0, cfg);
  const Philox4x64 gen(cfg.seed);
  const PathSimulator sim(model, tp, s, cfg);
  auto est = run_blocks(cfg.paths, 1, cfg.threads, [&](std::uint64_t path, std::uint64_t& ruined) {
    PathStream rng(gen, path);
    const auto r = sim.run(rng, x0, 1.0, false);
    ruined = r.ruined ? 1 : 0;
    return r.discounted;
  });
  finish(est, model, tp, s, x0, cfg);
  return est;
}

SimEstimate simulate_value_antithetic(const ModelSpec& model, const TimePreference& tp,
                                      const Strategy& s, double x0, const SimConfig& cfg) {
  check_config(model, tp, s, x0, cfg);
  const Philox4x64 gen(cfg.seed);
  const PathSimulator sim(model, tp, s, cfg);
  const std::uint64_t pairs = (cfg.paths + 1) / 2;
  auto est = run_blocks(pairs, 2, cfg.threads, [&](std::uint64_t pair, std::uint64_t& ruined) {
    PathStream plus(gen, pair);
    PathStream minus(gen, pair);
    const auto a = sim.run(plus, x0, 1.0, true);
    const auto b = sim.run(minus, x0, -1.0, true);
    ruined = (a.ruined ? 1 : 0) + (b.ruined ? 1 : 0);
    return 0.5 * (a.discounted + b.discounted);
  });
  finish(est, model, tp, s, x0, cfg);
  return est;
}

}  // namespace perdiv
