#pragma once

#include "needle/adjoint.hpp"
#include "needle/mode_insertion.hpp"
#include "needle/switched.hpp"

#include <optional>
#include <string>
#include <vector>

namespace needle {

enum class SynthesisMode { first_order, second_order };

std::string to_string(SynthesisMode mode);
/// Accepts "first", "second", "first_order", "second_order".
SynthesisMode parse_mode(const std::string& text);

struct SynthesisConfig {
  Mat R;                         ///< control metric, M x M symmetric PD
  double horizon = 1.0;          ///< T
  double dt = 1e-3;              ///< integration step for all passes
  double gamma = -1.0;           ///< alpha_d = gamma J0 for the first-order law
  double lambda_nominal = 1e-3;  ///< duration used in the second-order law and tau selection
  double epsilon_eig = 0.0;      ///< eigenvalue floor; <= 0 selects 1e-6 trace(R) / M
  double epsilon_relative = 0.0; ///< raises the floor to this fraction of max |eigenvalue| of H
  double beta = 0.5;             ///< line-search shrink factor
  int k_max = 12;                ///< line-search iterations
  double c_decrease = 0.1;       ///< sufficient-decrease fraction
  double lambda_init = 0.0;      ///< first trial duration; <= 0 selects T / 8
  int tau_stride = 1;            ///< evaluate every tau_stride-th horizon node
  double saddle_tolerance = 1e-8;
  bool tau_in_window = false;    ///< closed loop: choose tau inside the current feedback window only

  double epsilon() const;
  /// Floor used for a Hessian with eigenvalues `mu`.
  double epsilon_for(const Vec& mu) const;
  double initial_lambda() const;
  /// Throws std::invalid_argument when a field is out of range.
  void validate(int control_dim) const;
};

/// A single needle action and its bookkeeping.
struct NeedleAction {
  Vec u;
  double tau = 0.0;
  double lambda = 0.0;
  double predicted_dJ = 0.0;  ///< Taylor model at the accepted lambda
  double realized_dJ = 0.0;   ///< J(lambda) - J(0) by re-simulation
  SynthesisMode mode = SynthesisMode::second_order;
  double mig = 0.0;  ///< at (u, tau)
  double mih = 0.0;  ///< at (u, tau); zero in first-order mode
  double J0 = 0.0;   ///< cost of the default trajectory over the horizon
  int line_search_iterations = 0;

  bool accepted() const { return lambda > 0.0; }
};

/// Eigenvalue floor: V max(D, eps) V' for symmetric H (symmetrized first).
Mat regularize_hessian(const Mat& H, double epsilon);

/// Channel-wise clamp to the model's control bounds.
Vec saturate(const Vec& u, const SystemModel& model);

/// u* = (Lambda + R')^{-1} (Lambda v + h' rho alpha_d), Lambda = h' rho rho' h,
/// alpha_d = gamma J0. Not saturated.
Vec first_order_action(const SystemModel& model, const Vec& rho, const Vec& x, const Vec& v,
                       const SynthesisConfig& cfg, double J0);

/// The linear system of the second-order law at lambda = cfg.lambda_nominal:
///   H = lambda^2/2 Gamma + R,   rhs = lambda^2/2 Delta - lambda h' rho.
struct NewtonSystem {
  Mat H;
  Vec rhs;
};
NewtonSystem second_order_system(const Mat& h, const Vec& rho, const MihDerivatives& d, const SynthesisConfig& cfg);

/// Solution of regularize_hessian(H, eps) u = rhs with eps = cfg.epsilon_for(eig(H)),
/// without saddle handling or box scaling.
Vec regularized_newton_step(const NewtonSystem& sys, const SynthesisConfig& cfg);

/// Minimizer of lambda MIG + lambda^2/2 MIH + 1/2 |u|_R^2 at lambda =
/// cfg.lambda_nominal through the regularized Hessian. At a saddle (model
/// gradient below tolerance with a negative eigenvalue) the most negative
/// curvature direction is returned, scaled until one channel meets its bound.
/// Not saturated.
Vec second_order_action(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega,
                        const Vec& x, const Vec& v, double t, const SynthesisConfig& cfg);
Vec second_order_action(const SystemModel& model, const Mat& h, const Vec& rho, const MihDerivatives& d,
                        const SynthesisConfig& cfg);

/// Index of the smallest entry; ties go to the earliest. Throws on empty input.
std::size_t select_tau(const std::vector<double>& curve);
double select_tau(const std::vector<double>& times, const std::vector<double>& curve);

struct LineSearchResult {
  double lambda = 0.0;
  double dJ = 0.0;
  int iterations = 0;
};

/// Backtracking on the duration: starting from min(initial_lambda, lambda_max),
/// accept the first lambda with J(lambda) - J(0) < 0 and
/// J(lambda) - J(0) <= c lambda min(MIG, 0); shrink by beta otherwise.
/// Returns lambda = 0 if u == v(tau) or after k_max failures.
LineSearchResult line_search_duration(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                                      const ControlSchedule& v, const Vec& u, double tau, double mig_value,
                                      const SynthesisConfig& cfg, double lambda_max);

/// Everything computed along one horizon before the duration is chosen.
struct HorizonPlan {
  Trajectory default_traj;
  AdjointPair adjoints;
  double J0 = 0.0;
  std::vector<double> times;   ///< candidate application times
  std::vector<Vec> controls;   ///< saturated u*(t) per candidate
  std::vector<double> curve;   ///< selection curve per candidate
  std::size_t best = 0;
};

/// Simulates the default over [t_now, t_now + T], solves the adjoints and
/// evaluates the saturated action of `mode` at every candidate time. The
/// first-order curve is MIG(u*(t)); the second-order curve is the Taylor
/// model lambda MIG + lambda^2/2 MIH at lambda = cfg.lambda_nominal.
HorizonPlan plan_horizon(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                         const SynthesisConfig& cfg, SynthesisMode mode, const ControlSchedule& v);

/// One iteration of the needle-variation controller. Actions whose tau falls
/// at or after `window_end` are returned with lambda = 0 (apply the default
/// this period); otherwise lambda is capped at window_end - tau. With
/// cfg.tau_in_window the application time is chosen among the candidates
/// before `window_end` instead.
NeedleAction feedback_step(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                           const SynthesisConfig& cfg, SynthesisMode mode, double window_end,
                           const ControlSchedule& v);
NeedleAction feedback_step(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                           const SynthesisConfig& cfg, SynthesisMode mode);

}  // namespace needle
