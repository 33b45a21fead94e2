#pragma once

#include <cstdint>

#include "perdiv/levy_model.hpp"
#include "perdiv/valuation.hpp"

namespace perdiv {

struct SimConfig {
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt = 0.05;          // Brownian refinement step
  double horizon_T = 5000.0;  // truncation time
  bool bridge_correction = true;
  unsigned threads = 0;  // 0: thread_count()
};

struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double paths_ruined_fraction = 0.0;
  double truncation_bound = 0.0;
};

// Largest admissible dt: 0.1 / max(gamma, delta, total jump rate).
double max_time_step(const ModelSpec& model, const TimePreference& tp);
// exp(-delta T) (x0 + max(mu, 0) T + b_u)
double truncation_bound(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                        double x0, double horizon_T);
// Smallest T on a doubling grid from 100 with truncation bound below `target`.
double default_horizon(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                       double x0, double target = 1e-7);

SimEstimate simulate_value(const ModelSpec& model, const TimePreference& tp, const Strategy& s,
                           double x0, const SimConfig& cfg);
// Paths 2k and 2k+1 share a substream with the Gaussian increments negated.
SimEstimate simulate_value_antithetic(const ModelSpec& model, const TimePreference& tp,
                                      const Strategy& s, double x0, const SimConfig& cfg);

}  // namespace perdiv
