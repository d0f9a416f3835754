#include "needle/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace needle {

std::string to_string(SynthesisMode mode) {
  return mode == SynthesisMode::first_order ? "first" : "second";
}

SynthesisMode parse_mode(const std::string& text) {
  if (text == "first" || text == "first_order") return SynthesisMode::first_order;
  if (text == "second" || text == "second_order") return SynthesisMode::second_order;
  throw std::invalid_argument("unknown synthesis mode '" + text + "' (expected first or second)");
}

double SynthesisConfig::epsilon() const {
  if (epsilon_eig > 0.0) return epsilon_eig;
  return 1e-6 * R.trace() / static_cast<double>(R.rows());
}

double SynthesisConfig::epsilon_for(const Vec& mu) const {
  const double rel = mu.size() > 0 ? epsilon_relative * mu.cwiseAbs().maxCoeff() : 0.0;
  return std::max(epsilon(), rel);
}

double SynthesisConfig::initial_lambda() const { return lambda_init > 0.0 ? lambda_init : horizon / 8.0; }

void SynthesisConfig::validate(int control_dim) const {
  if (R.rows() != control_dim || R.cols() != control_dim) {
    throw std::invalid_argument("synthesis: R must be " + std::to_string(control_dim) + "x" +
                                std::to_string(control_dim));
  }
  if (!(R - R.transpose()).isZero(1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff()))) {
    throw std::invalid_argument("synthesis: R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(R, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("synthesis: R must be positive definite");
  if (!(horizon > 0.0)) throw std::invalid_argument("synthesis: horizon must be positive");
  if (!(dt > 0.0) || dt > horizon) throw std::invalid_argument("synthesis: need 0 < dt <= horizon");
  if (!(gamma < 0.0)) throw std::invalid_argument("synthesis: gamma must be negative");
  if (!(lambda_nominal > 0.0)) throw std::invalid_argument("synthesis: lambda_nominal must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("synthesis: beta must lie in (0, 1)");
  if (!(c_decrease > 0.0 && c_decrease < 1.0)) throw std::invalid_argument("synthesis: c must lie in (0, 1)");
  if (k_max < 1) throw std::invalid_argument("synthesis: k_max must be >= 1");
  if (!(epsilon_relative >= 0.0 && epsilon_relative <= 1.0)) {
    throw std::invalid_argument("synthesis: epsilon_relative must lie in [0, 1]");
  }
  if (tau_stride < 1) throw std::invalid_argument("synthesis: tau_stride must be >= 1");
}

Mat regularize_hessian(const Mat& H, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("regularize_hessian: epsilon must be positive");
  const Mat sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const Vec d = es.eigenvalues().cwiseMax(epsilon);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Vec saturate(const Vec& u, const SystemModel& model) { return model.bounds().clamp(u); }

Vec first_order_action(const SystemModel& model, const Vec& rho, const Vec& x, const Vec& v,
                       const SynthesisConfig& cfg, double J0) {
  const Vec hr = model.control_matrix(x).transpose() * rho;
  const Mat lambda = hr * hr.transpose();
  const double alpha_d = cfg.gamma * J0;
  return (lambda + cfg.R.transpose()).ldlt().solve(lambda * v + hr * alpha_d);
}

namespace {

/// Largest s >= 0 with s * dir inside the bounds.
double feasible_scale(const Vec& dir, const ControlBounds& b) {
  double s = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < dir.size(); ++k) {
    if (dir[k] > 0.0) s = std::min(s, std::max(b.hi[k], 0.0) / dir[k]);
    if (dir[k] < 0.0) s = std::min(s, std::min(b.lo[k], 0.0) / dir[k]);
  }
  return std::isfinite(s) ? s : 0.0;
}

/// Largest s in (0, inf) with s * u inside the bounds on every channel whose
/// bound on the side of u_k is nonzero; channels pointing at a zero bound are
/// left to the clamp.
double box_scale(const Vec& u, const ControlBounds& b) {
  double s = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    if (u[k] > 0.0 && b.hi[k] > 0.0) s = std::min(s, b.hi[k] / u[k]);
    if (u[k] < 0.0 && b.lo[k] < 0.0) s = std::min(s, b.lo[k] / u[k]);
  }
  return s;
}

}  // namespace

NewtonSystem second_order_system(const Mat& h, const Vec& rho, const MihDerivatives& d, const SynthesisConfig& cfg) {
  const double lam = cfg.lambda_nominal;
  const double half_l2 = 0.5 * lam * lam;
  return {half_l2 * d.gamma + cfg.R, half_l2 * d.delta - lam * (h.transpose() * rho)};
}

Vec regularized_newton_step(const NewtonSystem& sys, const SynthesisConfig& cfg) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sys.H + sys.H.transpose()));
  const double eps = cfg.epsilon_for(es.eigenvalues());
  const Vec d_inv = es.eigenvalues().cwiseMax(eps).cwiseInverse();
  return es.eigenvectors() * d_inv.asDiagonal() * (es.eigenvectors().transpose() * sys.rhs);
}

Vec second_order_action(const SystemModel& model, const Mat& h, const Vec& rho, const MihDerivatives& d,
                        const SynthesisConfig& cfg) {
  const NewtonSystem sys = second_order_system(h, rho, d, cfg);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sys.H + sys.H.transpose()));
  const Vec& mu = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  const double eps = cfg.epsilon_for(mu);

  const auto& b = model.bounds();
  const double u_scale = b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()).norm();
  const double h_norm = mu.cwiseAbs().maxCoeff();
  if (mu[0] < -cfg.epsilon() && sys.rhs.norm() <= cfg.saddle_tolerance * h_norm * u_scale) {
    const Vec e = V.col(0);
    const double s_plus = feasible_scale(e, b);
    const double s_minus = feasible_scale(-e, b);
    const bool plus = s_plus > s_minus || (s_plus == s_minus && sys.rhs.dot(e) >= 0.0);
    return plus ? Vec(s_plus * e) : Vec(-s_minus * e);
  }
  const Vec d_inv = mu.cwiseMax(eps).cwiseInverse();
  Vec u = V * d_inv.asDiagonal() * (V.transpose() * sys.rhs);
  if (mu[0] < eps) {
    // Steps along floored directions keep their direction and are pulled into the box.
    const double s = box_scale(u, b);
    if (s < 1.0) u *= s;
  }
  return u;
}

Vec second_order_action(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega,
                        const Vec& x, const Vec& v, double t, const SynthesisConfig& cfg) {
  const MihDerivatives d = mih_control_derivatives(model, obj, rho, omega, x, v, t);
  return second_order_action(model, model.control_matrix(x), rho, d, cfg);
}

std::size_t select_tau(const std::vector<double>& curve) {
  if (curve.empty()) throw std::invalid_argument("select_tau: empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i] < curve[best]) best = i;
  }
  return best;
}

double select_tau(const std::vector<double>& times, const std::vector<double>& curve) {
  if (times.size() != curve.size()) throw std::invalid_argument("select_tau: size mismatch");
  return times[select_tau(curve)];
}

LineSearchResult line_search_duration(const SystemModel& model, const Objective& obj, const Trajectory& default_traj,
                                      const ControlSchedule& v, const Vec& u, double tau, double mig_value,
                                      const SynthesisConfig& cfg, double lambda_max) {
  LineSearchResult res;
  const double tf = default_traj.t_end();
  lambda_max = std::min(lambda_max, tf - tau);
  if (!(lambda_max > 0.0)) return res;
  if ((u - v(tau)).isZero(0.0)) return res;

  const Vec x_tau = default_traj.sample(tau);
  double lambda = std::min(cfg.initial_lambda(), lambda_max);
  const double slope = std::min(mig_value, 0.0);
  for (int k = 0; k < cfg.k_max; ++k) {
    res.iterations = k + 1;
    const double dJ =
        insertion_cost_change(model, obj, x_tau, tf, Insertion{u, tau, lambda}, v, default_traj.t0(), cfg.dt);
    if (dJ < 0.0 && dJ <= cfg.c_decrease * lambda * slope) {
      res.lambda = lambda;
      res.dJ = dJ;
      return res;
    }
    lambda *= cfg.beta;
  }
  return res;
}

HorizonPlan plan_horizon(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                         const SynthesisConfig& cfg, SynthesisMode mode, const ControlSchedule& v) {
  const bool second = mode == SynthesisMode::second_order;
  HorizonPlan plan;
  plan.default_traj = simulate(model, x_now, t_now, t_now + cfg.horizon, cfg.dt, v);
  plan.J0 = obj.total_cost(plan.default_traj);
  plan.adjoints = solve_adjoints(model, obj, plan.default_traj, v, second);

  const auto& traj = plan.default_traj;
  const double lam = cfg.lambda_nominal;
  const std::size_t last = traj.size() - 1;
  for (std::size_t i = 0; i < last; i += static_cast<std::size_t>(cfg.tau_stride)) {
    const double t = traj.time(i);
    const Vec x = traj.state(i);
    const Vec rho = plan.adjoints.rho.state(i);
    const Vec vt = v(t);
    Vec u;
    double value = 0.0;
    if (second) {
      const Mat omega = plan.adjoints.omega->at(i);
      const MihQuadratic q = mih_quadratic(model, obj, rho, omega, x, vt, t);
      const Mat h = model.control_matrix(x);
      u = saturate(second_order_action(model, h, rho, mih_control_derivatives(q, vt), cfg), model);
      const Vec w = u - vt;
      value = lam * rho.dot(h * w) + 0.5 * lam * lam * q.value(w);
    } else {
      u = saturate(first_order_action(model, rho, x, vt, cfg, plan.J0), model);
      value = mig(model, rho, x, u, vt);
    }
    plan.times.push_back(t);
    plan.controls.push_back(std::move(u));
    plan.curve.push_back(value);
  }
  plan.best = select_tau(plan.curve);
  return plan;
}

NeedleAction feedback_step(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                           const SynthesisConfig& cfg, SynthesisMode mode, double window_end,
                           const ControlSchedule& v) {
  const HorizonPlan plan = plan_horizon(model, obj, x_now, t_now, cfg, mode, v);
  const double tol = 1e-9 * std::max(1.0, std::abs(t_now));
  std::size_t i = plan.best;
  if (cfg.tau_in_window) {
    std::size_t n = 0;
    while (n < plan.times.size() && plan.times[n] < window_end - tol) ++n;
    if (n > 0) i = select_tau(std::vector<double>(plan.curve.begin(), plan.curve.begin() + static_cast<long>(n)));
  }

  NeedleAction a;
  a.mode = mode;
  a.u = plan.controls[i];
  a.tau = plan.times[i];
  a.J0 = plan.J0;
  const Vec x = plan.default_traj.sample(a.tau);
  const Vec rho = plan.adjoints.rho.sample(a.tau);
  const Vec vt = v(a.tau);
  a.mig = mig(model, rho, x, a.u, vt);
  if (mode == SynthesisMode::second_order) {
    a.mih = mih(model, obj, rho, plan.adjoints.omega->sample(a.tau), x, a.u, vt, a.tau);
  }

  if (a.tau >= window_end - tol) return a;

  const LineSearchResult ls =
      line_search_duration(model, obj, plan.default_traj, v, a.u, a.tau, a.mig, cfg, window_end - a.tau);
  a.lambda = ls.lambda;
  a.realized_dJ = ls.dJ;
  a.line_search_iterations = ls.iterations;
  a.predicted_dJ = a.lambda * a.mig + 0.5 * a.lambda * a.lambda * a.mih;
  return a;
}

NeedleAction feedback_step(const SystemModel& model, const Objective& obj, const Vec& x_now, double t_now,
                           const SynthesisConfig& cfg, SynthesisMode mode) {
  const ControlSchedule v = constant_control(Vec::Zero(model.control_dim()));
  return feedback_step(model, obj, x_now, t_now, cfg, mode, t_now + cfg.horizon, v);
}

}  // namespace needle
