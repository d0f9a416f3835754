#include "needle/closed_loop.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace needle {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

double position_error(const SystemModel& model, const Objective& obj, const Vec& x, double t) {
  const Vec target = obj.target(t);
  double sq = 0.0;
  for (int r : model.position_rows()) sq += (x[r] - target[r]) * (x[r] - target[r]);
  return std::sqrt(sq);
}

bool meets_success(const SuccessCriterion& c, const SystemModel& model, const Objective& obj, const Vec& x,
                   double t) {
  if (position_error(model, obj, x, t) > c.position_tolerance) return false;
  if (c.angle_tolerance) {
    if (model.state_dim() != 3) throw std::invalid_argument("angle_tolerance applies to planar models only");
    if (std::abs(wrap_angle(x[2] - obj.target(t)[2])) >= *c.angle_tolerance) return false;
  }
  if (c.speed_tolerance) {
    if (model.state_dim() != 13) throw std::invalid_argument("speed_tolerance applies to the dynamic body only");
    if (x.segment<3>(7).norm() >= *c.speed_tolerance) return false;
  }
  return true;
}

TrialResult run_closed_loop(const Scenario& s, const Vec& x0, SynthesisMode mode) {
  const ModelPtr model = make_model(s.model);
  const Objective obj = make_objective(s.objective, *model);
  const SynthesisConfig cfg = s.config_for(mode);
  const int m = model->control_dim();
  const Vec v0 = Vec::Zero(m);
  const ControlSchedule v = constant_control(v0);
  const double period = s.feedback_period();
  const double eps = 1e-9 * period;

  TrialResult res;
  res.x0 = x0;
  res.mode = mode;
  res.min_clearance = obj.clearance(x0, 0.0);

  std::size_t node_count = 0;
  double J_acc = 0.0;
  double l_prev = obj.running_value(x0, 0.0);
  const auto record = [&](double t, const Vec& x, const Vec& u, bool force) {
    if (force || node_count % static_cast<std::size_t>(s.record_stride) == 0) {
      res.t.push_back(t);
      res.x.push_back(x);
      res.u.push_back(u);
      res.J.push_back(J_acc);
      res.error_distance.push_back(position_error(*model, obj, x, t));
    }
    ++node_count;
  };
  record(0.0, x0, v0, true);

  const auto check_success = [&](double t, const Vec& x) {
    if (res.converged || !s.success || t > s.success->deadline + eps) return;
    if (meets_success(*s.success, *model, obj, x, t)) {
      res.converged = true;
      res.time_to_converge = t;
    }
  };
  check_success(0.0, x0);

  Vec x = x0;
  double t = 0.0;
  try {
    while (t < s.duration - eps && !(res.converged && s.success->stop_on_success)) {
      const double window_end = std::min(t + period, s.duration);
      const NeedleAction act = feedback_step(*model, obj, x, t, cfg, mode, window_end, v);
      res.actions.push_back({t, act});
      res.cost_t.push_back(t);
      res.cost_J.push_back(act.J0);

      Insertion ins{act.accepted() ? act.u : v0, act.tau, act.accepted() ? act.lambda : 0.0};
      const auto nodes = insertion_nodes(t, window_end, cfg.dt, ins);
      const SwitchedRun run = simulate_switched(*model, nullptr, x, nodes, ins, v);
      const Trajectory& seg = run.traj;
      for (std::size_t i = 1; i < seg.size(); ++i) {
        const double ti = seg.time(i);
        const Vec xi = seg.state(i);
        const double li = obj.running_value(xi, ti);
        J_acc += 0.5 * (l_prev + li) * (ti - seg.time(i - 1));
        l_prev = li;
        res.min_clearance = std::min(res.min_clearance, obj.clearance(xi, ti));
        const bool inserted = ins.active_on(seg.time(i - 1), ti);
        check_success(ti, xi);
        const bool last = i + 1 == seg.size() && window_end >= s.duration - eps;
        record(ti, xi, inserted ? ins.u : v0, last || (res.converged && res.time_to_converge == ti));
      }
      x = seg.back();
      t = window_end;
    }
  } catch (const IntegrationDiverged& e) {
    res.converged = false;
    res.failure_reason = e.what();
  }
  res.final_time = t;
  if (res.t.back() != t) {
    res.t.push_back(t);
    res.x.push_back(x);
    res.u.push_back(v0);
    res.J.push_back(J_acc);
    res.error_distance.push_back(position_error(*model, obj, x, t));
  }
  if (!res.converged && res.failure_reason.empty() && s.success) {
    res.failure_reason = "not within tolerance by the deadline";
  }
  return res;
}

}  // namespace needle
