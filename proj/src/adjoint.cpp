#include "needle/adjoint.hpp"

namespace needle {

Trajectory solve_rho(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                     const ControlSchedule& v) {
  const double tf = default_traj.t_end();
  const Vec rho_f = obj.terminal(default_traj.back(), tf).gradient;
  const VectorField field = [&](double t, const Vec& rho) -> Vec {
    const Vec x = default_traj.sample(t);
    const Mat a = model.dynamics_jacobian(x, v(t));
    return -obj.running_gradient(x, t) - a.transpose() * rho;
  };
  return integrate_backward_on(field, rho_f, default_traj.times(), default_traj.dt());
}

MatrixTrajectory solve_omega(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                             const Trajectory& rho, const ControlSchedule& v) {
  const int n = model.state_dim();
  const double tf = default_traj.t_end();
  const Mat omega_f = obj.terminal(default_traj.back(), tf).hessian;
  const VectorField field = [&](double t, const Vec& flat) -> Vec {
    const Vec x = default_traj.sample(t);
    const Vec u = v(t);
    const Vec r = rho.sample(t);
    const Mat a = model.dynamics_jacobian(x, u);
    const Eigen::Map<const Mat> omega(flat.data(), n, n);
    Mat d = -a.transpose() * omega - omega * a - obj.running(x, t).hessian - model.weighted_hessian(x, u, r);
    return Eigen::Map<const Vec>(d.data(), n * n);
  };
  const StepProjection symmetrize = [n](Vec& flat) { symmetrize_flat(flat, n); };
  Vec flat_f = Eigen::Map<const Vec>(omega_f.data(), n * n);
  return MatrixTrajectory(integrate_backward_on(field, flat_f, default_traj.times(), default_traj.dt(), symmetrize),
                          n);
}

AdjointPair solve_adjoints(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                           const ControlSchedule& v, bool second_order) {
  AdjointPair pair;
  pair.rho = solve_rho(model, obj, default_traj, v);
  if (second_order) pair.omega = solve_omega(model, obj, default_traj, pair.rho, v);
  return pair;
}

}  // namespace needle
