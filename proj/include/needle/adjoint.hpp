#pragma once

#include "needle/objective.hpp"
#include "needle/system_model.hpp"

#include <optional>

namespace needle {

/// First-order costate rho(t) and, in second-order mode, Omega(t), both on
/// the grid of the default trajectory they were solved along.
struct AdjointPair {
  Trajectory rho;
  std::optional<MatrixTrajectory> omega;
};

/// Backward RK4 of
///   d rho/dt = -D_x l' - D_x f1' rho,   rho(t_f) = D_x m(x(t_f))',
/// with f1 = f(x, v(t)) and x(t) read from `default_traj` by Hermite
/// interpolation. Throws IntegrationDiverged on non-finite costates.
Trajectory solve_rho(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                     const ControlSchedule& v);

/// Backward RK4 of
///   d Omega/dt = -D_x f1' Omega - Omega D_x f1 - D_x^2 l - sum_i rho_i D_x^2 f1^i,
///   Omega(t_f) = D_x^2 m,
/// symmetrized after every step.
MatrixTrajectory solve_omega(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                             const Trajectory& rho, const ControlSchedule& v);

AdjointPair solve_adjoints(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                           const ControlSchedule& v, bool second_order);

}  // namespace needle
