#pragma once

#include "needle/monte_carlo.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace needle {

/// One row per trial: index, mode, converged flag, convergence time, minimum
/// clearance, final time, initial state, failure reason.
void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials);
/// Columns t, x0..x{N-1}, u0..u{M-1}, J, error_distance.
void write_trajectory_csv(std::ostream& out, const TrialResult& trial);
/// Columns t, tau, lambda, predicted_dJ, realized_dJ, mig, mih, J0, u...
void write_actions_csv(std::ostream& out, const TrialResult& trial);
/// key = value lines.
void write_summary(std::ostream& out, const MonteCarloSummary& summary);

/// Writes trials.csv, summary.txt, trajectories/trial_NNNN.csv and
/// actions/trial_NNNN.csv under out_dir (created if needed). Throws
/// std::runtime_error when a file cannot be written.
void emit_results(const MonteCarloResult& result, const std::filesystem::path& out_dir);

/// Full-precision scientific rendering used by every writer.
std::string format_number(double v);

}  // namespace needle
