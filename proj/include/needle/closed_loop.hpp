#pragma once

#include "needle/scenario.hpp"

#include <string>
#include <vector>

namespace needle {

/// One feedback instant of a closed-loop run.
struct ActionRecord {
  double t = 0.0;
  NeedleAction action;
};

struct TrialResult {
  int trial = 0;
  Vec x0;
  SynthesisMode mode = SynthesisMode::second_order;
  bool converged = false;
  double time_to_converge = 0.0;  ///< meaningful only when converged
  std::string failure_reason;     ///< empty on success
  double min_clearance = 0.0;     ///< +infinity without obstacles
  double final_time = 0.0;

  /// Realized trajectory, every record_stride-th integration node plus the last.
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> u;                   ///< control applied on the step ending at t
  std::vector<double> J;                ///< accumulated running cost along the realized path
  std::vector<double> error_distance;  ///< position distance to the target

  /// Horizon cost J0 at every feedback instant.
  std::vector<double> cost_t;
  std::vector<double> cost_J;

  std::vector<ActionRecord> actions;
};

/// Distance between the position rows of x and of the target at t.
double position_error(const SystemModel& model, const Objective& obj, const Vec& x, double t);

/// True when x satisfies every tolerance of the criterion at time t.
bool meets_success(const SuccessCriterion& c, const SystemModel& model, const Objective& obj, const Vec& x,
                   double t);

/// Receding-horizon loop: at every feedback instant plan one needle action
/// from the measured state, then integrate the true dynamics until the next
/// instant. Convergence failures and diverging integrations are reported in
/// the result, never thrown.
TrialResult run_closed_loop(const Scenario& s, const Vec& x0, SynthesisMode mode);

}  // namespace needle
