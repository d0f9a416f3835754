#pragma once

// Invariants and properties of every module, written as plain functions so
// that both the unit-test binary and the acceptance runner can execute them.

#include "oracles.hpp"

#include "needle/adjoint.hpp"
#include "needle/closed_loop.hpp"
#include "needle/descent_map.hpp"
#include "needle/lie_bracket.hpp"
#include "needle/mode_insertion.hpp"
#include "needle/monte_carlo.hpp"
#include "needle/ode.hpp"
#include "needle/results_io.hpp"
#include "needle/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace props {

using needle::Mat;
using needle::Vec;

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---- ode ---------------------------------------------------------------

/// Endpoint error of x' = x on [0, 1] shrinks by ~16 per dt halving.
inline Check rk4_order() {
  auto f = [](double, const Vec& x) { return x; };
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    const auto tr = needle::integrate(f, Vec::Ones(1), 0.0, 1.0, dt);
    err.push_back(std::abs(tr.back()[0] - std::exp(1.0)));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  const bool ok = r1 >= 14 && r1 <= 18 && r2 >= 14 && r2 <= 18;
  return {"rk4_order", ok, "ratios " + fmt(r1) + ", " + fmt(r2)};
}

/// Forward then backward integration of a linear field returns to x0.
inline Check backward_forward_roundtrip() {
  Mat A(3, 3);
  A << -0.3, 1.0, 0.2, -1.0, -0.1, 0.5, 0.0, -0.4, 0.2;
  auto f = [&](double, const Vec& x) { return Vec(A * x); };
  const Vec x0{{1.0, -2.0, 0.5}};
  const auto fwd = needle::integrate(f, x0, 0.0, 1.0, 1e-3);
  const auto bwd = needle::integrate_backward(f, fwd.back(), 1.0, 0.0, 1e-3);
  const double rel = (bwd.front() - x0).norm() / x0.norm();
  return {"backward_forward_roundtrip", rel < 1e-8, "relative error " + fmt(rel)};
}

/// Hermite sampling between nodes is O(dt^4).
inline Check hermite_order() {
  auto f = [](double t, const Vec&) { return Vec{{std::cos(t), -std::sin(t) + 0.5 * std::cos(0.5 * t)}}; };
  auto exact = [](double t) { return Vec{{std::sin(t), std::cos(t) + std::sin(0.5 * t)}}; };
  std::vector<double> err;
  for (double dt : {0.1, 0.05}) {
    const auto tr = needle::integrate(f, exact(0.0), 0.0, 2.0, dt);
    double e = 0.0;
    for (double t = 0.5 * dt; t < 2.0; t += dt) e = std::max(e, (tr.sample(t) - exact(t)).norm());
    err.push_back(e);
  }
  const double r = err[0] / err[1];
  return {"hermite_order", r >= 12 && r <= 20, "ratio " + fmt(r)};
}

// ---- models ------------------------------------------------------------

/// q' q = 0 along the rigid-body flows, and the unprojected norm drifts < 1e-7 in 1 s.
inline Check quaternion_flow() {
  std::mt19937_64 rng(3);
  double max_dot = 0.0, max_drift = 0.0;
  for (const auto& model : {needle::make_kinematic_body(), needle::make_fish()}) {
    for (int trial = 0; trial < 10; ++trial) {
      Vec x = oracle::random_state(*model, rng);
      if (model->name() == "fish") x.segment<3>(10) = oracle::uniform_vec(rng, -Vec::Ones(3), Vec::Ones(3));
      const Vec u = oracle::random_control(*model, rng);
      const Vec xd = model->dynamics(x, u);
      max_dot = std::max(max_dot, std::abs(x.segment<4>(3).dot(xd.segment<4>(3))));
      auto f = [&](double, const Vec& s) { return model->dynamics(s, u); };
      const auto tr = needle::integrate(f, x, 0.0, 1.0, 1e-3);
      max_drift = std::max(max_drift, std::abs(tr.back().segment<4>(3).norm() - 1.0));
    }
  }
  return {"quaternion_flow", max_dot < 1e-12 && max_drift < 1e-7,
          "max |q'dq| " + fmt(max_dot) + ", norm drift " + fmt(max_drift)};
}

/// f(x, a u1 + (1 - a) u2) = a f(x, u1) + (1 - a) f(x, u2).
inline Check control_affinity() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (const auto& name : {"diff_drive", "kin_body", "fish"}) {
    const auto s = oracle::scenario_for(name);
    const auto model = needle::make_model(s.model);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = oracle::random_state(*model, rng);
      const Vec u1 = oracle::random_control(*model, rng), u2 = oracle::random_control(*model, rng);
      const double a = oracle::uniform(rng, -1.0, 2.0);
      const Vec lhs = model->dynamics(x, a * u1 + (1 - a) * u2);
      const Vec rhs = a * model->dynamics(x, u1) + (1 - a) * model->dynamics(x, u2);
      worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
    }
  }
  return {"control_affinity", worst < 1e-12, "worst relative gap " + fmt(worst)};
}

/// Unforced swimming body from random (v, w) over 1 s at dt = 1e-3: worst
/// relative change of 1/2 (v'Mv + w'Jw), of |Mv| and of w'Jw.
struct FishInvariants {
  double energy = 0.0;
  double momentum = 0.0;
  double rotational = 0.0;
};

inline FishInvariants fish_invariant_drift() {
  const auto model = needle::make_fish();
  const needle::FishParams p;
  std::mt19937_64 rng(7);
  FishInvariants worst;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = oracle::random_state(*model, rng);
    x.segment<3>(10) = oracle::uniform_vec(rng, -Vec::Ones(3), Vec::Ones(3));
    auto f = [&](double, const Vec& s) { return model->dynamics(s, Vec::Zero(4)); };
    const Vec y = needle::integrate(f, x, 0.0, 1.0, 1e-3, model->projection()).back();
    auto parts = [&](const Vec& z) {
      const Eigen::Vector3d v = z.segment<3>(7), w = z.segment<3>(10);
      const Eigen::Vector3d mv = p.mass.cwiseProduct(v);
      const double rot = w.dot(p.inertia.cwiseProduct(w));
      return std::array<double, 3>{0.5 * (v.dot(mv) + rot), mv.norm(), rot};
    };
    const auto a = parts(x), b = parts(y);
    worst.energy = std::max(worst.energy, rel(b[0], a[0]));
    worst.momentum = std::max(worst.momentum, rel(b[1], a[1]));
    worst.rotational = std::max(worst.rotational, rel(b[2], a[2]));
  }
  return worst;
}

/// 1/2 (v'Mv + w'Jw) conserved to 1e-4 by the unforced swimming body.
inline Check fish_energy() {
  const auto d = fish_invariant_drift();
  return {"fish_energy", d.energy < 1e-4, "relative drift " + fmt(d.energy)};
}

/// |Mv| and w'Jw, the quantities the unforced equations do conserve.
inline Check fish_momentum() {
  const auto d = fish_invariant_drift();
  return {"fish_momentum", d.momentum < 1e-8 && d.rotational < 1e-8,
          "relative drift |Mv| " + fmt(d.momentum) + ", w'Jw " + fmt(d.rotational)};
}

// ---- objective ---------------------------------------------------------

inline needle::Objective obstacle_objective() {
  const auto s = needle::preset("diff_drive_obstacles");
  const auto model = needle::make_model(s.model);
  return needle::make_objective(s.objective, *model);
}

/// Analytic running-cost gradient and Hessian against central differences.
inline Check objective_derivatives() {
  std::mt19937_64 rng(9);
  const auto model = needle::make_diff_drive();
  double worst = 0.0;
  const auto plain = needle::make_objective(needle::preset("diff_drive_mc").objective, *model);
  const auto obst = obstacle_objective();
  for (const needle::Objective* obj : {&plain, &obst}) {
    for (int trial = 0; trial < 100; ++trial) {
      Vec x{{oracle::uniform(rng, -200, 1000), oracle::uniform(rng, -400, 1200), oracle::uniform(rng, -3, 3)}};
      if (obj->clearance(x, 0.0) < 1.0) continue;
      const auto c = obj->running(x, 0.0);
      auto val = [&](const Vec& z) { return Vec::Constant(1, obj->running_value(z, 0.0)); };
      auto grad = [&](const Vec& z) { return obj->running_gradient(z, 0.0); };
      const Vec g_fd = oracle::jacobian_fd(val, x).row(0).transpose();
      const Mat H_fd = oracle::jacobian_fd(grad, x);
      worst = std::max(worst, (c.gradient - g_fd).cwiseAbs().maxCoeff() / std::max(1.0, g_fd.cwiseAbs().maxCoeff()));
      worst = std::max(worst, (c.hessian - H_fd).cwiseAbs().maxCoeff() / std::max(1.0, H_fd.cwiseAbs().maxCoeff()));
    }
  }
  return {"objective_derivatives", worst < 1e-5, "worst relative error " + fmt(worst)};
}

/// J >= 0, and J = 0 exactly for a trajectory resting on the target.
inline Check cost_nonnegative() {
  std::mt19937_64 rng(11);
  const auto s = needle::preset("diff_drive_mc");
  const auto model = needle::make_model(s.model);
  const auto obj = needle::make_objective(s.objective, *model);
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = oracle::random_state(*model, rng);
    const auto tr = needle::simulate(*model, x, 0.0, 0.5, 1e-2, needle::constant_control(oracle::random_control(*model, rng)));
    ok = ok && obj.total_cost(tr) >= 0.0;
  }
  const auto rest = needle::simulate(*model, Vec::Zero(3), 0.0, 0.5, 1e-2, needle::constant_control(Vec::Zero(2)));
  const double at_target = obj.total_cost(rest);
  return {"cost_nonnegative", ok && at_target == 0.0, "J at target " + fmt(at_target)};
}

/// The penalty is C^2 across the safety radius: the jump of the second radial
/// difference over [r - h, r + h] shrinks with h and ends below 1e-4.
inline Check penalty_smooth() {
  needle::ObstaclePenalty p;
  p.center = Vec::Zero(2);
  p.radius = 1.0;
  p.weight = 1.0;
  p.sharpness = 1.0;
  auto second = [&](double d, double h) {
    auto f = [&](double r) { return p.value(Vec{{r, 0.0}}, 0.0); };
    return (f(d + h) - 2 * f(d) + f(d - h)) / (h * h);
  };
  std::vector<double> jumps;
  for (double h : {1e-3, 1e-4, 1e-5}) jumps.push_back(std::abs(second(1.0 + h, h) - second(1.0 - h, h)));
  const bool ok = jumps[1] < jumps[0] && jumps[2] < jumps[1] && jumps[2] < 1e-4;
  return {"penalty_smooth", ok, "jumps " + fmt(jumps[0]) + ", " + fmt(jumps[1]) + ", " + fmt(jumps[2])};
}

// ---- adjoint -----------------------------------------------------------

/// Nonzero objective off target gives a nonzero costate somewhere on the horizon.
inline Check costate_nonzero() {
  std::mt19937_64 rng(13);
  double smallest = 1e300;
  for (const auto& name : {"diff_drive", "kin_body", "fish"}) {
    const auto s = oracle::scenario_for(name);
    const auto model = needle::make_model(s.model);
    const auto obj = needle::make_objective(s.objective, *model);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = oracle::random_state(*model, rng);
      const auto v = needle::constant_control(Vec::Zero(model->control_dim()));
      const auto tr = needle::simulate(*model, x, 0.0, s.synthesis.horizon, 1e-2, v);
      const auto rho = needle::solve_rho(*model, obj, tr, v);
      double m = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) m = std::max(m, rho.state(i).norm());
      smallest = std::min(smallest, m);
    }
  }
  return {"costate_nonzero", smallest > 1e-12, "smallest max|rho| " + fmt(smallest)};
}

/// Omega stays symmetric on the whole horizon.
inline Check omega_symmetric() {
  std::mt19937_64 rng(15);
  double worst = 0.0;
  for (const auto& name : {"diff_drive", "kin_body", "fish"}) {
    const auto s = oracle::scenario_for(name);
    const auto model = needle::make_model(s.model);
    const auto obj = needle::make_objective(s.objective, *model);
    const Vec x = oracle::random_state(*model, rng);
    const auto v = needle::constant_control(Vec::Zero(model->control_dim()));
    const auto tr = needle::simulate(*model, x, 0.0, s.synthesis.horizon, 1e-2, v);
    const auto adj = needle::solve_adjoints(*model, obj, tr, v, true);
    for (std::size_t i = 0; i < adj.omega->size(); ++i) {
      const Mat W = adj.omega->at(i);
      worst = std::max(worst, (W - W.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, W.cwiseAbs().maxCoeff()));
    }
  }
  return {"omega_symmetric", worst < 1e-9, "worst asymmetry " + fmt(worst)};
}

/// Where no saturated control has a nonzero MIG, rho is orthogonal to every
/// control column, while a bracket direction still carries descent.
inline Check singular_state_diagnostics() {
  const auto s = needle::preset("diff_drive_mc");
  const auto model = needle::make_model(s.model);
  const auto obj = needle::make_objective(s.objective, *model);
  const auto cfg = s.config_for(needle::SynthesisMode::second_order);
  const auto r = needle::proposition_diagnostics(*model, obj, Vec{{0.0, 500.0, 0.0}}, cfg);
  const bool singular = r.max_abs_mig_horizon < 1e-9;
  const bool ortho = r.rho_h.cwiseAbs().maxCoeff() < 1e-8;
  const bool bracket = std::abs(r.rho_hh.at(0)) > 0.0 && r.min_mih < 0.0;
  return {"singular_state_diagnostics", singular && ortho && bracket,
          "max|MIG| " + fmt(r.max_abs_mig_horizon) + ", rho'[h1,h2] " + fmt(r.rho_hh.at(0)) + ", min MIH " +
              fmt(r.min_mih)};
}

// ---- needle ------------------------------------------------------------

/// Floored Hessian is >= eps I and shares H's eigenvectors.
inline Check regularization() {
  std::mt19937_64 rng(17);
  double worst_comm = 0.0, worst_floor = 1e300;
  const double eps = 0.1;
  for (int trial = 0; trial < 50; ++trial) {
    Mat A(4, 4);
    for (int i = 0; i < 16; ++i) A.data()[i] = oracle::uniform(rng, -2, 2);
    const Mat H = 0.5 * (A + A.transpose());
    const Mat Hb = needle::regularize_hessian(H, eps);
    Eigen::SelfAdjointEigenSolver<Mat> es(Hb);
    worst_floor = std::min(worst_floor, es.eigenvalues().minCoeff());
    worst_comm = std::max(worst_comm, (H * Hb - Hb * H).cwiseAbs().maxCoeff());
  }
  return {"regularization", worst_floor >= eps * (1 - 1e-12) && worst_comm < 1e-10,
          "min eigenvalue " + fmt(worst_floor) + ", commutator " + fmt(worst_comm)};
}

/// Clamping the first-order action keeps a negative MIG negative.
inline Check saturation_keeps_descent() {
  std::mt19937_64 rng(19);
  int checked = 0, violations = 0;
  for (const auto& name : {"diff_drive", "kin_body", "fish"}) {
    const auto s = oracle::scenario_for(name);
    const auto model = needle::make_model(s.model);
    const auto obj = needle::make_objective(s.objective, *model);
    const auto cfg = s.config_for(needle::SynthesisMode::first_order);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = oracle::random_state(*model, rng);
      const Vec v = Vec::Zero(model->control_dim());
      const auto tr = needle::simulate(*model, x, 0.0, cfg.horizon, 1e-2, needle::constant_control(v));
      const auto rho = needle::solve_rho(*model, obj, tr, needle::constant_control(v));
      const double J0 = obj.total_cost(tr);
      const Vec u = needle::first_order_action(*model, rho.front(), x, v, cfg, J0);
      const double m_raw = needle::mig(*model, rho.front(), x, u, v);
      if (!(m_raw < 0.0)) continue;
      ++checked;
      const double m_sat = needle::mig(*model, rho.front(), x, needle::saturate(u, *model), v);
      // One-sided channels may clamp the whole descent away; the sign never flips.
      const bool ok = name == std::string("fish") ? m_sat <= 0.0 : m_sat < 0.0;
      if (!ok) ++violations;
    }
  }
  return {"saturation_keeps_descent", checked > 0 && violations == 0,
          std::to_string(checked) + " instances, " + std::to_string(violations) + " violations"};
}

/// Second-order predicted dJ < 0 at every off-target cell of an obstacle-free
/// grid, and the first-order singular set is strictly larger.
inline Check descent_grid() {
  const auto s = needle::preset("diff_drive_mc");
  const auto model = needle::make_model(s.model);
  const auto obj = needle::make_objective(s.objective, *model);
  needle::GridSpec g;
  g.a_min = -500, g.a_max = 500, g.b_min = -500, g.b_max = 500, g.step = 100;
  g.base_state = Vec::Zero(3);
  const auto map = needle::descent_map(*model, obj, g, s.config_for(needle::SynthesisMode::second_order),
                                       s.config_for(needle::SynthesisMode::first_order), 1e-3);
  int off = 0, second_bad = 0, first_singular = 0;
  for (const auto& c : map.cells) {
    if (!c.feasible || c.at_target) continue;
    ++off;
    if (c.predicted_dJ >= -1e-12) ++second_bad;
    if (std::abs(c.mig_first) < 1e-9) ++first_singular;
  }
  return {"descent_grid", off > 0 && second_bad == 0 && first_singular > second_bad,
          std::to_string(off) + " cells, second-order nonnegative " + std::to_string(second_bad) +
              ", first-order singular " + std::to_string(first_singular)};
}

// ---- analysis ----------------------------------------------------------

/// Bracket antisymmetry, [h, h] = 0 and [a f, g] = a [f, g] on every model.
inline Check bracket_algebra() {
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (const auto& name : {"diff_drive", "kin_body", "fish"}) {
    const auto s = oracle::scenario_for(name);
    const auto model = needle::make_model(s.model);
    const Vec x = oracle::random_state(*model, rng);
    for (int i = 0; i < model->control_dim(); ++i) {
      const auto hi = needle::control_field(*model, i);
      worst = std::max(worst, needle::lie_bracket(hi, hi, x).norm());
      for (int j = 0; j < model->control_dim(); ++j) {
        const auto hj = needle::control_field(*model, j);
        const Vec b = needle::lie_bracket(hi, hj, x);
        worst = std::max(worst, (b + needle::lie_bracket(hj, hi, x)).norm());
        needle::SmoothField scaled{[&](const Vec& z) { return Vec(2.5 * hi.value(z)); },
                                   [&](const Vec& z) { return Mat(2.5 * hi.jacobian_at(z)); }};
        worst = std::max(worst, (needle::lie_bracket(scaled, hj, x) - 2.5 * b).norm());
      }
    }
  }
  return {"bracket_algebra", worst < 1e-10, "worst residual " + fmt(worst)};
}

// ---- harness -----------------------------------------------------------

inline std::string trials_text(const needle::MonteCarloResult& r) {
  std::ostringstream os;
  needle::write_trials_csv(os, r.trials);
  for (const auto& t : r.trials) needle::write_trajectory_csv(os, t);
  return os.str();
}

/// The same scenario and seed reproduce every byte of the trial output.
inline Check determinism() {
  auto s = needle::preset("diff_drive_mc");
  s.duration = 8.0;
  const auto a = needle::run_monte_carlo(s, needle::SynthesisMode::second_order, 3, 99, 1);
  const auto b = needle::run_monte_carlo(s, needle::SynthesisMode::second_order, 3, 99, 2);
  const std::string ta = trials_text(a), tb = trials_text(b);
  return {"determinism", ta == tb, std::to_string(ta.size()) + " bytes compared"};
}

/// Every accepted action lowers the re-planned horizon cost, and converged
/// trials report a time within the deadline.
inline Check closed_loop_contracts() {
  auto s = needle::preset("diff_drive_lateral");
  const auto r = needle::run_closed_loop(s, *s.initial_state, needle::SynthesisMode::second_order);
  int accepted = 0, increases = 0;
  for (const auto& a : r.actions) {
    if (!a.action.accepted()) continue;
    ++accepted;
    if (!(a.action.realized_dJ < 0.0)) ++increases;
  }
  const bool timing = !r.converged || r.time_to_converge <= s.success->deadline;
  return {"closed_loop_contracts", accepted > 0 && increases == 0 && timing,
          std::to_string(accepted) + " accepted actions, " + std::to_string(increases) + " without decrease"};
}

/// Converged obstacle trials never enter an obstacle.
inline Check obstacle_clearance() {
  auto s = needle::preset("diff_drive_two_obstacles");
  const auto r = needle::run_closed_loop(s, *s.initial_state, needle::SynthesisMode::second_order);
  return {"obstacle_clearance", r.converged && r.min_clearance > 0.0, "min clearance " + fmt(r.min_clearance)};
}

inline std::vector<Check> all_checks() {
  return {rk4_order(),          backward_forward_roundtrip(), hermite_order(),       quaternion_flow(),
          control_affinity(),   fish_energy(),                fish_momentum(),                objective_derivatives(), cost_nonnegative(),
          penalty_smooth(),     costate_nonzero(),            omega_symmetric(),     singular_state_diagnostics(),
          regularization(),     saturation_keeps_descent(),   descent_grid(),        bracket_algebra(),
          determinism(),        closed_loop_contracts(),      obstacle_clearance()};
}

}  // namespace props
