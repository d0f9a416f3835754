#pragma once

#include "needle/ode.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace needle {

/// Channel-wise control limits; one-sided channels use lo = 0.
struct ControlBounds {
  Vec lo;
  Vec hi;

  static ControlBounds symmetric(const Vec& limit) { return {-limit, limit}; }
  Vec clamp(const Vec& u) const { return u.cwiseMax(lo).cwiseMin(hi); }
};

/// Control-affine dynamics f(x, u) = g(x) + h(x) u.
///
/// Implementations provide the drift, the control matrix and their first
/// spatial derivatives. Second derivatives are only ever needed contracted
/// with a costate, so the interface exposes the contraction
/// sum_i w_i D_x^2 f^i(x, u) directly; the base class falls back to central
/// differences of the Jacobian.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  /// g(x), including any state-independent world-frame drift velocity.
  virtual Vec drift(const Vec& x) const = 0;
  /// h(x), N x M.
  virtual Mat control_matrix(const Vec& x) const = 0;
  /// D_x g(x), N x N.
  virtual Mat drift_jacobian(const Vec& x) const = 0;
  /// D_x h_k(x), N x N, for control column k.
  virtual Mat control_jacobian(const Vec& x, int k) const = 0;

  /// sum_i w_i D_x^2 f^i(x, u), N x N symmetric.
  virtual Mat weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const;

  /// D_x f(x, u) = D_x g + sum_k D_x h_k u_k.
  virtual Mat dynamics_jacobian(const Vec& x, const Vec& u) const;

  /// Renormalizes representation-constrained coordinates (unit quaternions).
  virtual void project(Vec& /*x*/) const {}

  /// State rows holding world-frame position, used for obstacle distances.
  virtual std::vector<int> position_rows() const = 0;

  /// First row of a unit-quaternion block, if the state carries one.
  virtual std::optional<int> quaternion_row() const { return std::nullopt; }

  const ControlBounds& bounds() const { return bounds_; }

  /// g(x) + h(x) u; no clamping. Throws std::invalid_argument on dimension
  /// mismatch.
  Vec dynamics(const Vec& x, const Vec& u) const;

  /// D_x^2 f^i(x, u) for a single state row i.
  Mat dynamics_hessian(const Vec& x, const Vec& u, int i) const;

  StepProjection projection() const;

 protected:
  /// Throws std::invalid_argument unless lo <= hi on every channel.
  explicit SystemModel(ControlBounds bounds);
  void check_dims(const Vec& x, const Vec& u) const;

 private:
  ControlBounds bounds_;
};

using ModelPtr = std::shared_ptr<const SystemModel>;

/// Time-dependent control signal t -> u(t).
using ControlSchedule = std::function<Vec(double)>;

ControlSchedule constant_control(Vec u);

/// Integrates the model under `control` on [t0, t1] with step dt, applying the
/// model's projection after every step.
Trajectory simulate(const SystemModel& model, const Vec& x0, double t0, double t1, double dt,
                    const ControlSchedule& control);

}  // namespace needle
