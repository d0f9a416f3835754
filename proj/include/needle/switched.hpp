#pragma once

#include "needle/objective.hpp"
#include "needle/system_model.hpp"

#include <vector>

namespace needle {

/// A fixed control u inserted on [tau, tau + lambda] into the default signal v.
struct Insertion {
  Vec u;
  double tau = 0.0;
  double lambda = 0.0;

  bool active_on(double a, double b) const;
};

/// Integration nodes on [t0, t_f] for an insertion: the uniform grid
/// t0 + k dt, with tau and tau + lambda added as nodes and the insertion
/// interval itself stepped with dt from tau. Nodes closer than 1e-6 dt to a
/// switching time are dropped.
std::vector<double> insertion_nodes(double t0, double t_f, double dt, const Insertion& ins);

struct SwitchedRun {
  Trajectory traj;
  double running_cost = 0.0;  ///< integral of l along traj, zero without an objective
};

/// RK4 on `nodes` with f2 = f(x, ins.u) on steps inside [tau, tau + lambda]
/// and f1 = f(x, v(t)) elsewhere. With an objective the running cost is
/// integrated alongside the state (same RK4 stages).
SwitchedRun simulate_switched(const SystemModel& model, const Objective* obj, const Vec& x0,
                              const std::vector<double>& nodes, const Insertion& ins, const ControlSchedule& v);

/// J(lambda) - J(0) for the insertion, measured from x(tau) = x_tau to t_f.
/// Both costs are integrated on the identical node set so that the
/// difference carries no quadrature bias; `grid_t0` and `dt` fix the grid the
/// nodes are aligned to.
double insertion_cost_change(const SystemModel& model, const Objective& obj, const Vec& x_tau, double t_f,
                             const Insertion& ins, const ControlSchedule& v, double grid_t0, double dt);

}  // namespace needle
