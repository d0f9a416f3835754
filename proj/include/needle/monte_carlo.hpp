#pragma once

#include "needle/closed_loop.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace needle {

struct MonteCarloSummary {
  std::string scenario;
  SynthesisMode mode = SynthesisMode::second_order;
  int trials = 0;
  int converged = 0;
  double success_rate = 0.0;
  double mean_time = 0.0;  ///< over converged trials; NaN when none converged
  double median_time = 0.0;
  double p90_time = 0.0;
  double max_time = 0.0;
  double min_clearance = 0.0;
  std::uint64_t seed = 0;
};

struct MonteCarloResult {
  MonteCarloSummary summary;
  std::vector<TrialResult> trials;  ///< sorted by trial index
};

/// n initial states drawn up front from the scenario's sampling region with a
/// mt19937_64 seeded by `seed`; positions falling inside the exclusion radius
/// around the target are redrawn.
std::vector<Vec> sample_initial_states(const Scenario& s, int n, std::uint64_t seed);

/// Linear-interpolated quantile of `values` (q in [0, 1]); NaN when empty.
double quantile(std::vector<double> values, double q);

MonteCarloSummary summarize(const std::string& name, SynthesisMode mode, std::uint64_t seed,
                            const std::vector<TrialResult>& trials);

/// Runs every trial of the scenario; `threads` <= 0 picks the hardware
/// concurrency. Results are independent of the thread count.
MonteCarloResult run_monte_carlo(const Scenario& s, SynthesisMode mode, int n_trials, std::uint64_t seed,
                                 int threads = 0);

/// The initial states of a run: the fixed initial state when the scenario has
/// one and a single trial is requested, sampled states otherwise.
std::vector<Vec> initial_states_for(const Scenario& s, int n_trials, std::uint64_t seed);

}  // namespace needle
