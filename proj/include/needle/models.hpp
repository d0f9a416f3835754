#pragma once

#include "needle/system_model.hpp"

namespace needle {

/// Wheel radius and separation, in whatever length unit the scenario uses.
struct DiffDriveParams {
  double wheel_radius = 36.0;
  double wheel_separation = 258.0;
};

/// Planar differential drive, state (x, y, theta), controls (u_R, u_L) as
/// wheel angular velocities:
///   f = r [cos th, cos th; sin th, sin th; 1/L, -1/L] u.
class DiffDrive final : public SystemModel {
 public:
  DiffDrive(DiffDriveParams p, ControlBounds bounds);

  std::string name() const override { return "diff_drive"; }
  int state_dim() const override { return 3; }
  int control_dim() const override { return 2; }
  Vec drift(const Vec& x) const override;
  Mat control_matrix(const Vec& x) const override;
  Mat drift_jacobian(const Vec& x) const override;
  Mat control_jacobian(const Vec& x, int k) const override;
  Mat weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const override;
  std::vector<int> position_rows() const override { return {0, 1}; }

  const DiffDriveParams& params() const { return p_; }

 private:
  DiffDriveParams p_;
};

/// Underactuated kinematic rigid body, state (b, q) with b in the world frame
/// and q a unit quaternion. Controls (F1, F3, T1, T2) are the surge and heave
/// body velocities and the roll and pitch body rates; sway and yaw are
/// removed.
class KinematicBody final : public SystemModel {
 public:
  explicit KinematicBody(ControlBounds bounds);

  std::string name() const override { return "kin_body"; }
  int state_dim() const override { return 7; }
  int control_dim() const override { return 4; }
  Vec drift(const Vec& x) const override;
  Mat control_matrix(const Vec& x) const override;
  Mat drift_jacobian(const Vec& x) const override;
  Mat control_jacobian(const Vec& x, int k) const override;
  Mat weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const override;
  void project(Vec& x) const override;
  std::vector<int> position_rows() const override { return {0, 1, 2}; }
  std::optional<int> quaternion_row() const override { return 3; }
};

/// Diagonal effective mass (g) and inertia (g cm^2) of the swimming body,
/// plus a world-frame flow velocity (cm/s) added to the position rates.
struct FishParams {
  Eigen::Vector3d mass{6.04, 17.31, 8.39};
  Eigen::Vector3d inertia{1.57, 27.78, 54.11};
  Eigen::Vector3d flow{0.0, 0.0, 0.0};
};

/// Underactuated dynamic rigid body (b, q, v, w), N = 13:
///   M dv/dt = M v x w + F,   J dw/dt = J w x w + T.
/// Controls are (F1, F3) in mN and (T1, T2) in uN m; they are converted to
/// the g-cm-s system of the state (1 mN = 100 g cm/s^2, 1 uN m = 10 g cm^2/s^2).
class Fish final : public SystemModel {
 public:
  static constexpr double kForceScale = 100.0;
  static constexpr double kTorqueScale = 10.0;

  Fish(FishParams p, ControlBounds bounds);

  std::string name() const override { return "fish"; }
  int state_dim() const override { return 13; }
  int control_dim() const override { return 4; }
  Vec drift(const Vec& x) const override;
  Mat control_matrix(const Vec& x) const override;
  Mat drift_jacobian(const Vec& x) const override;
  Mat control_jacobian(const Vec& x, int k) const override;
  Mat weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const override;
  Mat dynamics_jacobian(const Vec& x, const Vec& u) const override;
  void project(Vec& x) const override;
  std::vector<int> position_rows() const override { return {0, 1, 2}; }
  std::optional<int> quaternion_row() const override { return 3; }

  const FishParams& params() const { return p_; }

 private:
  FishParams p_;
  Mat h_;
};

ModelPtr make_diff_drive(const DiffDriveParams& p, const ControlBounds& bounds);
/// Default limits are +-150/36 per wheel (wheel angular velocity).
ModelPtr make_diff_drive(const DiffDriveParams& p = {});
/// Default limits are +-10 (cm/s, rad/s) on every channel.
ModelPtr make_kinematic_body();
ModelPtr make_kinematic_body(const ControlBounds& bounds);
/// Default limits: F1 in [-1, 1] mN, F3 in [0, 1] mN, T1, T2 in [-0.1, 0.1] uN m.
ModelPtr make_fish(const FishParams& p = {});
ModelPtr make_fish(const FishParams& p, const ControlBounds& bounds);

ControlBounds default_diff_drive_bounds();
ControlBounds default_kinematic_body_bounds();
ControlBounds default_fish_bounds();

namespace quat {

/// R(q) w for a (not necessarily unit) quaternion q = (q0, q1, q2, q3).
Eigen::Vector3d rotate(const Eigen::Vector4d& q, const Eigen::Vector3d& w);
/// d(R(q) w)/dq, 3 x 4.
Eigen::Matrix<double, 3, 4> rotate_jacobian(const Eigen::Vector4d& q, const Eigen::Vector3d& w);
/// The 4 x 3 matrix E(q) with dq/dt = E(q) w / 2.
Eigen::Matrix<double, 4, 3> rate_matrix(const Eigen::Vector4d& q);
Eigen::Matrix3d rotation(const Eigen::Vector4d& q);

}  // namespace quat

}  // namespace needle
