#include "needle/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace needle {

SystemModel::SystemModel(ControlBounds bounds) : bounds_(std::move(bounds)) {
  if (bounds_.lo.size() != bounds_.hi.size()) {
    throw std::invalid_argument("control bounds: lo and hi differ in length");
  }
  for (Eigen::Index i = 0; i < bounds_.lo.size(); ++i) {
    if (!(bounds_.lo[i] <= bounds_.hi[i])) {
      throw std::invalid_argument("control bounds: lo > hi on channel " + std::to_string(i));
    }
  }
}

void SystemModel::check_dims(const Vec& x, const Vec& u) const {
  if (x.size() != state_dim() || u.size() != control_dim()) {
    throw std::invalid_argument(name() + ": expected state dim " + std::to_string(state_dim()) +
                                " and control dim " + std::to_string(control_dim()) + ", got " +
                                std::to_string(x.size()) + " and " + std::to_string(u.size()));
  }
}

Vec SystemModel::dynamics(const Vec& x, const Vec& u) const {
  check_dims(x, u);
  return drift(x) + control_matrix(x) * u;
}

Mat SystemModel::dynamics_jacobian(const Vec& x, const Vec& u) const {
  check_dims(x, u);
  Mat a = drift_jacobian(x);
  for (int k = 0; k < control_dim(); ++k) {
    if (u[k] != 0.0) a += u[k] * control_jacobian(x, k);
  }
  return a;
}

Mat SystemModel::weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const {
  const int n = state_dim();
  Mat out(n, n);
  Vec xp = x;
  for (int j = 0; j < n; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    const Vec plus = dynamics_jacobian(xp, u).transpose() * w;
    xp[j] = x[j] - step;
    const Vec minus = dynamics_jacobian(xp, u).transpose() * w;
    xp[j] = x[j];
    out.col(j) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (out + out.transpose());
}

Mat SystemModel::dynamics_hessian(const Vec& x, const Vec& u, int i) const {
  check_dims(x, u);
  if (i < 0 || i >= state_dim()) throw std::out_of_range("dynamics_hessian: row out of range");
  return weighted_hessian(x, u, Vec::Unit(state_dim(), i));
}

StepProjection SystemModel::projection() const {
  if (!quaternion_row()) return {};
  return [this](Vec& x) { project(x); };
}

ControlSchedule constant_control(Vec u) {
  return [u = std::move(u)](double) { return u; };
}

Trajectory simulate(const SystemModel& model, const Vec& x0, double t0, double t1, double dt,
                    const ControlSchedule& control) {
  const VectorField field = [&](double t, const Vec& x) { return model.dynamics(x, control(t)); };
  return integrate(field, x0, t0, t1, dt, model.projection());
}

}  // namespace needle
