// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to run
// a subset.

#include "properties.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

using needle::Mat;
using needle::SynthesisMode;
using needle::Vec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return props::fmt(v); }

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---- 1: MIG / MIH against finite differences of J(lambda) ---------------

Outcome criterion_1() {
  std::mt19937_64 rng(101);
  const double lambdas[3] = {1e-3, 5e-4, 2.5e-4};
  const char* names[3] = {"diff_drive", "kin_body", "fish"};
  double worst_mig = 0.0, worst_mih = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
  int pairs = 0;
  for (int k = 0; k < 100; ++k) {
    const auto s = oracle::scenario_for(names[k % 3]);
    const auto model = needle::make_model(s.model);
    const auto obj = needle::make_objective(s.objective, *model);
    const double T = s.synthesis.horizon, dt = 1e-3;
    const Vec x = oracle::random_state(*model, rng);
    const Vec u = oracle::random_control(*model, rng);
    const Vec v = Vec::Zero(model->control_dim());
    const auto vs = needle::constant_control(v);
    const auto traj = needle::simulate(*model, x, 0.0, T, dt, vs);
    const auto adj = needle::solve_adjoints(*model, obj, traj, vs, true);
    const double m1 = needle::mig(*model, adj.rho.front(), x, u, v);
    const double m2 = needle::mih(*model, obj, adj.rho.front(), adj.omega->at(0), x, u, v, 0.0);

    double d[3], resid[3];
    for (int i = 0; i < 3; ++i) {
      d[i] = oracle::cost_change(*model, obj, x, 0.0, T, u, v, lambdas[i], dt);
      resid[i] = std::abs(d[i] - lambdas[i] * m1 - 0.5 * lambdas[i] * lambdas[i] * m2);
    }
    const auto fit = oracle::fit_cubic(lambdas, d);
    worst_mig = std::max(worst_mig, std::abs(m1 - fit.first) / std::abs(fit.first));
    worst_mih = std::max(worst_mih, std::abs(m2 - fit.second) / std::abs(fit.second));
    worst_ratio = std::min({worst_ratio, resid[0] / resid[1], resid[1] / resid[2]});
    ++pairs;
  }
  const bool pass = worst_mig < 0.01 && worst_mih < 0.05 && worst_ratio >= 4.0;
  return {pass, std::to_string(pairs) + " pairs, worst MIG rel err " + fmt(worst_mig) + " (< 0.01), worst MIH rel err " +
                    fmt(worst_mih) + " (< 0.05), smallest residual ratio " + fmt(worst_ratio) + " (>= 4)"};
}

// ---- 2: Delta / Gamma and the regularized solve -------------------------

Outcome criterion_2() {
  std::mt19937_64 rng(202);
  const char* names[3] = {"diff_drive", "kin_body", "fish"};
  double worst_fd = 0.0, worst_solve = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto s = oracle::scenario_for(names[k % 3]);
    const auto model = needle::make_model(s.model);
    const auto obj = needle::make_objective(s.objective, *model);
    const auto cfg = s.config_for(SynthesisMode::second_order);
    const Vec x0 = oracle::random_state(*model, rng);
    const Vec v = k % 2 ? oracle::random_control(*model, rng) : Vec(Vec::Zero(model->control_dim()));
    const auto vs = needle::constant_control(v);
    const auto traj = needle::simulate(*model, x0, 0.0, cfg.horizon, cfg.dt, vs);
    const auto adj = needle::solve_adjoints(*model, obj, traj, vs, true);
    const std::size_t i = static_cast<std::size_t>(oracle::uniform(rng, 0.0, 0.9) * static_cast<double>(traj.size()));
    const Vec x = traj.state(i), rho = adj.rho.state(i);
    const Mat omega = adj.omega->at(i);
    const double t = traj.time(i);

    const auto d = needle::mih_control_derivatives(*model, obj, rho, omega, x, v, t);
    Vec grad;
    Mat hess;
    const double h = 0.5 * model->bounds().hi.cwiseAbs().maxCoeff();
    oracle::quadratic_derivatives(
        [&](const Vec& u) { return needle::mih(*model, obj, rho, omega, x, u, v, t); },
        Vec::Zero(model->control_dim()), h, grad, hess);
    worst_fd = std::max({worst_fd, (d.gamma - hess).cwiseAbs().maxCoeff(), (d.delta + grad).cwiseAbs().maxCoeff()});

    const auto sys = needle::second_order_system(model->control_matrix(x), rho, d, cfg);
    const Vec u = needle::regularized_newton_step(sys, cfg);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sys.H + sys.H.transpose()));
    const Mat Hb = needle::regularize_hessian(sys.H, cfg.epsilon_for(es.eigenvalues()));
    const double scale = std::max(sys.rhs.norm(), std::numeric_limits<double>::min());
    worst_solve = std::max(worst_solve, (Hb * u - sys.rhs).norm() / scale);
  }
  const bool pass = worst_fd < 1e-6 && worst_solve < 1e-8;
  return {pass, "100 instances, worst |FD - analytic| " + fmt(worst_fd) + " (< 1e-6), worst optimality residual " +
                    fmt(worst_solve) + " (< 1e-8)"};
}

// ---- 3: Lie brackets -----------------------------------------------------

Outcome criterion_3() {
  const auto dd = needle::make_diff_drive(needle::DiffDriveParams{3.6, 25.8});
  auto h0 = [&](const Vec& x) { return Vec(dd->control_matrix(x).col(0)); };
  auto h1 = [&](const Vec& x) { return Vec(dd->control_matrix(x).col(1)); };
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (double th : {0.0, 0.7, -2.1}) {
    const Vec x{{1.0, -2.0, th}};
    const Vec exact = needle::lie_bracket(needle::control_field(*dd, 0), needle::control_field(*dd, 1), x);
    std::vector<double> err;
    for (double eps : {0.04, 0.02, 0.01, 0.005}) err.push_back((oracle::flow_commutator(h0, h1, x, eps) - exact).norm());
    for (std::size_t i = 0; i + 1 < err.size(); ++i) worst_ratio = std::min(worst_ratio, err[i] / err[i + 1]);
  }
  const bool commutator_ok = worst_ratio >= 1.8;

  int dd_ok = 0;
  const auto dd_mm = needle::make_diff_drive();
  for (int k = 0; k < 16; ++k) {
    const auto r = needle::bracket_span_rank(*dd_mm, Vec{{0.0, 0.0, -std::numbers::pi + k * std::numbers::pi / 8}});
    if (r.rank == 3) ++dd_ok;
  }
  std::mt19937_64 rng(303);
  int kb_ok = 0;
  const auto kb = needle::make_kinematic_body();
  for (int k = 0; k < 20; ++k) {
    Vec x = Vec::Zero(7);
    x.head<3>() = oracle::uniform_vec(rng, Vec::Constant(3, -50), Vec::Constant(3, 50));
    x.segment<4>(3) = oracle::random_unit_quaternion(rng);
    const auto r = needle::bracket_span_rank(*kb, x);
    if (r.rank == 6 && r.dimension == 6) ++kb_ok;
  }
  const bool pass = commutator_ok && dd_ok == 16 && kb_ok == 20;
  return {pass, "smallest commutator error ratio per eps halving " + fmt(worst_ratio) +
                    " (>= 1.8), diff drive rank 3 at " + std::to_string(dd_ok) + "/16 headings, kinematic body rank 6 at " +
                    std::to_string(kb_ok) + "/20 orientations"};
}

// ---- 4: descent map ------------------------------------------------------

Outcome criterion_4() {
  const auto s = needle::preset("diff_drive_obstacles");
  const auto model = needle::make_model(s.model);
  const auto obj = needle::make_objective(s.objective, *model);
  needle::GridSpec g;
  g.a_min = -200, g.a_max = 1000, g.b_min = -400, g.b_max = 1400, g.step = 25;
  g.base_state = Vec::Zero(3);
  const auto map = needle::descent_map(*model, obj, g, s.config_for(SynthesisMode::second_order),
                                       s.config_for(SynthesisMode::first_order), 1e-3, worker_count());
  const double line_x = s.objective.target[0];
  int off = 0, negative = 0, line = 0, line_singular = 0, line_descent = 0;
  double line_mig = 0.0;
  for (const auto& c : map.cells) {
    if (!c.feasible || c.at_target) continue;
    ++off;
    if (c.predicted_dJ < 0.0) ++negative;
    if (c.a == line_x) {
      ++line;
      line_mig = std::max(line_mig, std::abs(c.mig_first));
      if (std::abs(c.mig_first) < 1e-9) ++line_singular;
      if (c.predicted_dJ < 0.0) ++line_descent;
    }
  }
  const bool pass = off > 0 && negative == off && line > 0 && line_singular == line && line_descent == line;
  return {pass, std::to_string(negative) + "/" + std::to_string(off) + " feasible off-target cells with dJ < 0; line x = " +
                    fmt(line_x) + ": " + std::to_string(line_singular) + "/" + std::to_string(line) +
                    " first-order singular (max |MIG| " + fmt(line_mig) + "), " + std::to_string(line_descent) + "/" +
                    std::to_string(line) + " second-order descent"};
}

// ---- 5-7: Monte Carlo ----------------------------------------------------

struct ModePair {
  needle::MonteCarloSummary first;
  needle::MonteCarloSummary second;
};

ModePair run_pair(const needle::Scenario& s, int n) {
  const int threads = static_cast<int>(worker_count());
  return {needle::run_monte_carlo(s, SynthesisMode::first_order, n, s.seed, threads).summary,
          needle::run_monte_carlo(s, SynthesisMode::second_order, n, s.seed, threads).summary};
}

std::string rate(const needle::MonteCarloSummary& m) {
  return std::to_string(m.converged) + "/" + std::to_string(m.trials);
}

Outcome criterion_5() {
  const auto s = needle::preset("diff_drive_mc");
  const auto r = run_pair(s, 50);
  const auto lat = needle::preset("diff_drive_lateral");
  const auto first_lat = needle::run_closed_loop(lat, *lat.initial_state, SynthesisMode::first_order);
  const auto second_lat = needle::run_closed_loop(lat, *lat.initial_state, SynthesisMode::second_order);
  const bool pass = r.second.converged == 50 && r.first.converged < r.second.converged && !first_lat.converged;
  return {pass, "second-order " + rate(r.second) + ", first-order " + rate(r.first) + "; lateral target: first-order " +
                    (first_lat.converged ? "converged" : "failed") + ", second-order " +
                    (second_lat.converged ? "converged at " + fmt(second_lat.time_to_converge) + " s" : "failed")};
}

Outcome criterion_6() {
  const auto s = needle::preset("kin_body_mc");
  const int threads = static_cast<int>(worker_count());
  const auto first = needle::run_monte_carlo(s, SynthesisMode::first_order, 20, s.seed, threads);
  const auto second = needle::run_monte_carlo(s, SynthesisMode::second_order, 20, s.seed, threads).summary;
  double max_y0_converged = 0.0;
  for (const auto& t : first.trials) {
    if (t.converged) max_y0_converged = std::max(max_y0_converged, std::abs(t.x0[1]));
  }
  const bool pass = second.converged == 20 && second.max_time <= 20.0 && first.summary.converged == 0;
  std::string detail = "second-order " + rate(second) + " (max time " + fmt(second.max_time) + " s), first-order " +
                       rate(first.summary);
  if (first.summary.converged > 0) detail += " (its successes start with |y0| <= " + fmt(max_y0_converged) + " cm)";
  return {pass, detail};
}

Outcome criterion_7() {
  const auto s = needle::preset("fish_mc");
  const auto r = run_pair(s, 30);
  const auto drift = needle::preset("fish_drift_mc");
  const auto d = run_pair(drift, 30);
  const bool rates = r.second.success_rate >= 0.9 && r.first.success_rate < r.second.success_rate;
  const bool times = d.second.converged > 0 && d.first.converged > 0 && d.second.mean_time < d.first.mean_time;
  return {rates && times, "fish_mc second-order " + rate(r.second) + " (>= 90%), first-order " + rate(r.first) +
                              "; drift second-order " + rate(d.second) + " mean " + fmt(d.second.mean_time) +
                              " s, first-order " + rate(d.first) + " mean " + fmt(d.first.mean_time) + " s"};
}

// ---- 8: obstacles --------------------------------------------------------

Outcome criterion_8() {
  bool pass = true;
  std::string detail;
  for (const auto& name : {"diff_drive_two_obstacles", "diff_drive_obstacles", "diff_drive_moving_obstacle"}) {
    const auto s = needle::preset(name);
    const auto r = needle::run_closed_loop(s, *s.initial_state, SynthesisMode::second_order);
    const bool ok = r.converged && r.min_clearance > 0.0;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + ": " + (r.converged ? "converged at " + fmt(r.time_to_converge) + " s" : "failed") +
              ", min clearance " + fmt(r.min_clearance);
  }
  return {pass, detail};
}

// ---- 9: tracking ---------------------------------------------------------

double window_mean(const needle::TrialResult& r, double a, double b) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    if (r.t[i] >= a && r.t[i] <= b) sum += r.error_distance[i], ++n;
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion_9() {
  const auto s = needle::preset("fish_tracking_drift");
  const auto first = needle::run_closed_loop(s, *s.initial_state, SynthesisMode::first_order);
  const auto second = needle::run_closed_loop(s, *s.initial_state, SynthesisMode::second_order);
  const double half = 0.5 * s.duration;
  const double f0 = window_mean(first, 0.0, half), f1 = window_mean(first, half, s.duration);
  const double s0 = window_mean(second, 0.0, half), s1 = window_mean(second, half, s.duration);
  const bool pass = s1 < f1 && f1 > f0 && s1 <= s0;
  return {pass, "mean error first 5 s / final 5 s: first-order " + fmt(f0) + " / " + fmt(f1) + " cm, second-order " +
                    fmt(s0) + " / " + fmt(s1) + " cm"};
}

// ---- 10: determinism and properties --------------------------------------

Outcome criterion_10() {
  int failed = 0;
  std::string detail;
  for (const auto& c : props::all_checks()) {
    std::printf("    %s %s: %s\n", c.ok ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
    if (!c.ok) {
      ++failed;
      detail += " " + c.name;
    }
  }
  return {failed == 0, failed == 0 ? "all property checks passed, reruns bit-identical"
                                   : std::to_string(failed) + " property checks failed:" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                          criterion_5, criterion_6, criterion_7, criterion_8,
                                                          criterion_9, criterion_10};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (!selected.empty() && !selected.count(k)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s (%s) [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
