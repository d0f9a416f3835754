#include "needle/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>

namespace needle {

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

Mat diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

Vec rigid_base(int n) {
  Vec x = Vec::Zero(n);
  x[3] = 1.0;
  return x;
}

ObstacleSpec obstacle(double x, double y, double radius, double vx = 0.0, double vy = 0.0) {
  ObstacleSpec o;
  o.center = vec({x, y});
  if (vx != 0.0 || vy != 0.0) o.velocity = vec({vx, vy});
  o.radius = radius;
  o.weight = 1e6;
  o.sharpness = 0.2;
  return o;
}

/// Differential drive in mm: Q = diag(10, 10, 1000), P1 = 0, T = 0.5 s, 4 Hz,
/// gamma = -15, lambda = 0.1, R = diag(100, 100) first order and
/// diag(0.1, 0.1) second order, wheel limits 150/36.
Scenario diff_drive_base() {
  Scenario s;
  s.model.type = "diff_drive";
  s.objective.Q = vec({10.0, 10.0, 1000.0});
  s.objective.P1 = vec({0.0, 0.0, 0.0});
  s.objective.target = vec({0.0, 0.0, 0.0});
  s.synthesis.horizon = 0.5;
  s.synthesis.dt = 5e-3;
  s.synthesis.gamma = -15.0;
  s.synthesis.lambda_nominal = 0.1;
  s.synthesis.lambda_init = 0.25;
  s.synthesis.epsilon_relative = 0.1;
  s.R_first = diag({100.0, 100.0});
  s.R_second = diag({0.1, 0.1});
  s.feedback_rate = 4.0;
  s.duration = 60.0;
  s.record_stride = 10;
  return s;
}

Scenario diff_drive_mc() {
  Scenario s = diff_drive_base();
  s.name = "diff_drive_mc";
  const double tol = DiffDriveParams{}.wheel_separation / 5.0;
  s.sampling = SamplingRegion{vec({-1500.0, -1500.0}), vec({1500.0, 1500.0}), std::nullopt, tol, vec({0.0, 0.0, 0.0})};
  s.success = SuccessCriterion{tol, std::numbers::pi / 12.0, std::nullopt, 60.0, true};
  s.trials = 50;
  s.seed = 2024;
  return s;
}

Scenario diff_drive_lateral() {
  Scenario s = diff_drive_base();
  s.name = "diff_drive_lateral";
  s.objective.target = vec({1000.0, 1000.0, 0.0});
  s.initial_state = vec({0.0, 0.0, 0.0});
  const double tol = DiffDriveParams{}.wheel_separation / 5.0;
  s.success = SuccessCriterion{tol, std::numbers::pi / 12.0, std::nullopt, 60.0, true};
  return s;
}

/// Target (400, 1000) mm with three static obstacles kept at least 200 mm
/// from the vertical line x = 400 through the target.
Scenario diff_drive_obstacles() {
  Scenario s = diff_drive_base();
  s.name = "diff_drive_obstacles";
  s.objective.target = vec({400.0, 1000.0, 0.0});
  s.objective.obstacles = {obstacle(750.0, 450.0, 100.0), obstacle(100.0, 550.0, 100.0),
                           obstacle(750.0, -50.0, 100.0)};
  s.initial_state = vec({900.0, -300.0, 0.0});
  s.sampling = SamplingRegion{vec({-200.0, -400.0}), vec({1000.0, 800.0}), std::nullopt,
                              DiffDriveParams{}.wheel_separation / 5.0, vec({0.0, 0.0, 0.0})};
  const double tol = DiffDriveParams{}.wheel_separation / 5.0;
  s.success = SuccessCriterion{tol, std::numbers::pi / 12.0, std::nullopt, 60.0, true};
  s.trials = 20;
  s.seed = 7;
  return s;
}

Scenario diff_drive_two_obstacles() {
  Scenario s = diff_drive_base();
  s.name = "diff_drive_two_obstacles";
  s.objective.target = vec({1000.0, 1000.0, 0.0});
  s.objective.obstacles = {obstacle(300.0, 420.0, 80.0), obstacle(760.0, 600.0, 80.0)};
  s.initial_state = vec({0.0, 0.0, 0.0});
  const double tol = DiffDriveParams{}.wheel_separation / 5.0;
  s.success = SuccessCriterion{tol, std::numbers::pi / 12.0, std::nullopt, 60.0, true};
  return s;
}

/// Three obstacles sweeping across the approach to the origin; 20 Hz, T = 0.3 s.
Scenario diff_drive_moving_obstacle() {
  Scenario s = diff_drive_base();
  s.name = "diff_drive_moving_obstacle";
  s.synthesis.horizon = 0.3;
  s.synthesis.lambda_init = 0.05;
  s.feedback_rate = 20.0;
  s.objective.obstacles = {obstacle(-700.0, -100.0, 60.0, 0.0, 100.0), obstacle(-400.0, 160.0, 60.0, 0.0, -80.0),
                           obstacle(-150.0, -170.0, 60.0, 0.0, 60.0)};
  s.initial_state = vec({-1000.0, 0.0, 0.0});
  const double tol = DiffDriveParams{}.wheel_separation / 5.0;
  s.success = SuccessCriterion{tol, std::numbers::pi / 12.0, std::nullopt, 60.0, true};
  return s;
}

/// Kinematic body in cm: Q = 0, P1 = diag(100, 200, 100, 0...), T = 1 s,
/// 20 Hz, gamma = -5e4, lambda = 1e-3.
Scenario kin_body_mc() {
  Scenario s;
  s.name = "kin_body_mc";
  s.model.type = "kin_body";
  s.objective.Q = Vec::Zero(7);
  s.objective.P1 = vec({100.0, 200.0, 100.0, 0.0, 0.0, 0.0, 0.0});
  s.objective.target = rigid_base(7);
  s.synthesis.horizon = 1.0;
  s.synthesis.dt = 5e-3;
  s.synthesis.gamma = -5e4;
  s.synthesis.lambda_nominal = 1e-3;
  s.synthesis.lambda_init = 0.05;
  s.synthesis.epsilon_relative = 0.1;
  s.R_first = diag({10.0, 10.0, 1000.0, 1000.0});
  s.R_second = 1e-6 * diag({1.0, 1.0, 100.0, 100.0});
  s.feedback_rate = 20.0;
  s.duration = 20.0;
  s.sampling = SamplingRegion{vec({-50.0, -50.0, -50.0}), vec({50.0, 50.0, 50.0}), std::nullopt, 6.0, rigid_base(7)};
  s.success = SuccessCriterion{6.0, std::nullopt, std::nullopt, 20.0, true};
  s.trials = 20;
  s.seed = 11;
  return s;
}

Scenario fish_base() {
  Scenario s;
  s.model.type = "fish";
  s.objective.target = rigid_base(13);
  s.synthesis.dt = 5e-3;
  s.synthesis.lambda_init = 0.05;
  s.feedback_rate = 20.0;
  return s;
}

/// Dynamic body in cm, g: T = 1.5 s, gamma = -5, lambda = 1e-4,
/// Q = diag(1e3, 1e3, 1e3, 0, 0, 0, 0, 1, 1, 1, 2e3, 1e3, 1e3) / 200.
Scenario fish_mc() {
  Scenario s = fish_base();
  s.name = "fish_mc";
  s.objective.Q = vec({1e3, 1e3, 1e3, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2e3, 1e3, 1e3}) / 200.0;
  s.objective.P1 = Vec::Zero(13);
  s.synthesis.horizon = 1.5;
  s.synthesis.gamma = -5.0;
  s.synthesis.lambda_nominal = 1e-4;
  s.R_first = diag({1e3, 1e3, 1e6, 1e6});
  s.R_second = 0.5 * diag({1e-6, 1e-6, 1e-3, 1e-3});
  s.duration = 60.0;
  s.sampling =
      SamplingRegion{vec({-100.0, -100.0, -100.0}), vec({100.0, 100.0, 100.0}), std::nullopt, 15.0, rigid_base(13)};
  s.success = SuccessCriterion{5.0, std::nullopt, 5.0, 60.0, true};
  s.trials = 30;
  s.seed = 5;
  return s;
}

/// Tracking of the moving reference with +10 cm/s flow along y.
Scenario fish_tracking_drift() {
  Scenario s = fish_base();
  s.name = "fish_tracking_drift";
  s.model.fish.flow = Eigen::Vector3d(0.0, 10.0, 0.0);
  s.objective.Q = vec({10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.1});
  s.objective.P1 = vec({10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  s.objective.target_kind = "tracking";
  s.objective.target = Vec();
  s.synthesis.horizon = 2.0;
  s.synthesis.gamma = -5e4;
  s.synthesis.lambda_nominal = 0.01;
  s.R_first = diag({1e3, 1e3, 1e6, 1e6});
  s.R_second = diag({10.0, 10.0, 1e4, 1e4});
  s.duration = 10.0;
  Vec x0 = rigid_base(13);
  x0.head<3>() = target_tracking_trajectory(0.0).head<3>();
  s.initial_state = x0;
  return s;
}

Scenario fish_drift_mc() {
  Scenario s = fish_base();
  s.name = "fish_drift_mc";
  s.model.fish.flow = Eigen::Vector3d(0.0, 10.0, 0.0);
  s.objective.Q = 1e-3 * vec({10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
  s.objective.P1 = vec({100.0, 100.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0});
  s.synthesis.horizon = 1.0;
  s.synthesis.gamma = -25000.0;
  s.synthesis.lambda_nominal = 1e-4;
  s.R_first = diag({0.1, 0.1, 1e4, 1e4});
  s.R_second = 0.5 * diag({1e-5, 1e-5, 1.0, 1.0});
  s.duration = 60.0;
  s.sampling = SamplingRegion{Vec(), Vec(), 30.0, 5.0, rigid_base(13)};
  s.success = SuccessCriterion{5.0, std::nullopt, std::nullopt, 60.0, true};
  s.trials = 30;
  s.seed = 13;
  return s;
}

const std::map<std::string, std::function<Scenario()>>& registry() {
  static const std::map<std::string, std::function<Scenario()>> r = {
      {"diff_drive_mc", diff_drive_mc},
      {"diff_drive_lateral", diff_drive_lateral},
      {"diff_drive_obstacles", diff_drive_obstacles},
      {"diff_drive_two_obstacles", diff_drive_two_obstacles},
      {"diff_drive_moving_obstacle", diff_drive_moving_obstacle},
      {"kin_body_mc", kin_body_mc},
      {"fish_mc", fish_mc},
      {"fish_tracking_drift", fish_tracking_drift},
      {"fish_drift_mc", fish_drift_mc},
  };
  return r;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

bool is_preset(const std::string& name) { return registry().count(name) > 0; }

Scenario preset(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown preset '" + name + "'");
  Scenario s = it->second();
  s.validate();
  return s;
}

}  // namespace needle
