#include "needle/switched.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace needle {

bool Insertion::active_on(double a, double b) const {
  if (!(lambda > 0.0)) return false;
  const double mid = 0.5 * (a + b);
  return mid > tau && mid < tau + lambda;
}

std::vector<double> insertion_nodes(double t0, double t_f, double dt, const Insertion& ins) {
  if (!(t_f > t0)) throw std::invalid_argument("insertion_nodes: t_f must exceed t0");
  if (!(dt > 0.0)) throw std::invalid_argument("insertion_nodes: dt must be positive");
  const double tol = 1e-6 * dt;
  const double tau = std::clamp(ins.tau, t0, t_f);
  const double tau_end = std::clamp(ins.tau + std::max(ins.lambda, 0.0), t0, t_f);

  std::vector<double> marks{t0, t_f};
  if (tau > t0 + tol && tau < t_f - tol) marks.push_back(tau);
  if (tau_end > tau + tol && tau_end < t_f - tol) marks.push_back(tau_end);
  const auto near_mark = [&](double t) {
    return std::any_of(marks.begin(), marks.end(), [&](double m) { return std::abs(t - m) < tol; });
  };

  std::vector<double> nodes = marks;
  const auto steps = static_cast<long>(std::floor((t_f - t0) / dt + 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    if (t >= t_f - tol) break;
    if (t > tau + tol && t < tau_end - tol) continue;
    if (!near_mark(t)) nodes.push_back(t);
  }
  for (long j = 1;; ++j) {
    const double t = tau + static_cast<double>(j) * dt;
    if (t >= tau_end - tol) break;
    nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

SwitchedRun simulate_switched(const SystemModel& model, const Objective* obj, const Vec& x0,
                              const std::vector<double>& nodes, const Insertion& ins, const ControlSchedule& v) {
  if (nodes.size() < 2) throw std::invalid_argument("simulate_switched: need at least two nodes");
  const int n = model.state_dim();
  const std::size_t steps = nodes.size() - 1;
  Mat states(n, static_cast<Eigen::Index>(steps + 1));
  Mat derivs(n, static_cast<Eigen::Index>(steps + 1));

  bool inserted = false;
  const auto f = [&](double t, const Vec& x) -> Vec {
    return model.dynamics(x, inserted ? ins.u : v(t));
  };
  const auto l = [&](double t, const Vec& x) -> double { return obj ? obj->running_value(x, t) : 0.0; };

  Vec x = x0;
  model.project(x);
  double cost = 0.0;
  states.col(0) = x;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = nodes[k];
    const double h = nodes[k + 1] - t;
    inserted = ins.active_on(t, nodes[k + 1]);
    const Vec k1 = f(t, x);
    const double c1 = l(t, x);
    const Vec x2 = x + (0.5 * h) * k1;
    const Vec k2 = f(t + 0.5 * h, x2);
    const double c2 = l(t + 0.5 * h, x2);
    const Vec x3 = x + (0.5 * h) * k2;
    const Vec k3 = f(t + 0.5 * h, x3);
    const double c3 = l(t + 0.5 * h, x3);
    const Vec x4 = x + h * k3;
    const Vec k4 = f(t + h, x4);
    const double c4 = l(t + h, x4);
    derivs.col(static_cast<Eigen::Index>(k)) = k1;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    cost += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    model.project(x);
    if (!x.allFinite() || !std::isfinite(cost)) throw IntegrationDiverged(nodes[k + 1]);
    states.col(static_cast<Eigen::Index>(k + 1)) = x;
  }
  derivs.col(static_cast<Eigen::Index>(steps)) = f(nodes.back(), x);

  SwitchedRun run;
  run.traj = Trajectory(nodes, std::move(states), std::move(derivs), nodes[1] - nodes[0]);
  run.running_cost = cost;
  return run;
}

double insertion_cost_change(const SystemModel& model, const Objective& obj, const Vec& x_tau, double t_f,
                             const Insertion& ins, const ControlSchedule& v, double grid_t0, double dt) {
  if (!(ins.lambda > 0.0)) return 0.0;
  if (!(t_f > ins.tau)) return 0.0;
  std::vector<double> grid = insertion_nodes(grid_t0, t_f, dt, ins);
  std::vector<double> nodes;
  nodes.reserve(grid.size());
  nodes.push_back(ins.tau);
  for (double t : grid) {
    if (t > ins.tau + 1e-6 * dt) nodes.push_back(t);
  }
  if (nodes.size() < 2) return 0.0;

  const SwitchedRun sw = simulate_switched(model, &obj, x_tau, nodes, ins, v);
  const SwitchedRun base = simulate_switched(model, &obj, x_tau, nodes, Insertion{ins.u, ins.tau, 0.0}, v);
  const double j_sw = sw.running_cost + obj.terminal(sw.traj.back(), t_f).value;
  const double j_base = base.running_cost + obj.terminal(base.traj.back(), t_f).value;
  return j_sw - j_base;
}

}  // namespace needle
