#include "needle/descent_map.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace needle {

namespace {

std::vector<double> axis(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid: need step > 0 and max >= min");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

}  // namespace

std::vector<double> GridSpec::axis_a() const { return axis(a_min, a_max, step); }
std::vector<double> GridSpec::axis_b() const { return axis(b_min, b_max, step); }

void DescentMap::write_csv(std::ostream& os) const {
  os << "a,b,predicted_dJ_second_order,mig_first_order\n";
  os << std::scientific << std::setprecision(17);
  for (const auto& c : cells) {
    if (!c.feasible) continue;
    os << c.a << ',' << c.b << ',' << c.predicted_dJ << ',' << c.mig_first << '\n';
  }
}

void DescentMap::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

DescentMap descent_map(const SystemModel& model, const Objective& obj, const GridSpec& grid,
                       const SynthesisConfig& second, const SynthesisConfig& first, double lambda,
                       unsigned threads) {
  if (grid.base_state.size() != model.state_dim()) throw std::invalid_argument("descent_map: base state dimension");
  DescentMap map;
  map.grid = grid;
  map.lambda = lambda;
  const auto as = grid.axis_a();
  const auto bs = grid.axis_b();
  map.cells.resize(as.size() * bs.size());
  const ControlSchedule v = constant_control(Vec::Zero(model.control_dim()));

  const auto eval = [&](std::size_t idx) {
    DescentCell& cell = map.cells[idx];
    cell.a = as[idx % as.size()];
    cell.b = bs[idx / as.size()];
    Vec x = grid.base_state;
    x[grid.coord_a] = cell.a;
    x[grid.coord_b] = cell.b;
    cell.feasible = obj.clearance(x, grid.t0) > 0.0;
    const Vec e = x - obj.target(grid.t0);
    cell.at_target = e.norm() <= 1e-9 * std::max(1.0, x.norm());
    if (!cell.feasible) return;

    const HorizonPlan p2 = plan_horizon(model, obj, x, grid.t0, second, SynthesisMode::second_order, v);
    const std::size_t i = p2.best;
    const Vec xi = p2.default_traj.state(i);
    const Vec rho = p2.adjoints.rho.state(i);
    const Vec vt = v(p2.times[i]);
    const double g1 = mig(model, rho, xi, p2.controls[i], vt);
    const double g2 = mih(model, obj, rho, p2.adjoints.omega->at(i), xi, p2.controls[i], vt, p2.times[i]);
    cell.tau = p2.times[i];
    cell.predicted_dJ = lambda * g1 + 0.5 * lambda * lambda * g2;

    const HorizonPlan p1 = plan_horizon(model, obj, x, grid.t0, first, SynthesisMode::first_order, v);
    cell.mig_first = p1.curve[p1.best];
  };

  threads = std::max(1u, threads);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t idx = next++; idx < map.cells.size(); idx = next++) eval(idx);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return map;
}

namespace {

/// max over the box of |c' u|.
double box_max_abs_linear(const Vec& c, const ControlBounds& b) {
  double hi = 0.0;
  double lo = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    hi += std::max(c[k] * b.lo[k], c[k] * b.hi[k]);
    lo += std::min(c[k] * b.lo[k], c[k] * b.hi[k]);
  }
  return std::max(std::abs(hi), std::abs(lo));
}

}  // namespace

PropositionReport proposition_diagnostics(const SystemModel& model, const Objective& obj, const Vec& x,
                                          const SynthesisConfig& cfg, double t0) {
  const ControlSchedule v = constant_control(Vec::Zero(model.control_dim()));
  const HorizonPlan plan = plan_horizon(model, obj, x, t0, cfg, SynthesisMode::second_order, v);
  const auto& b = model.bounds();
  const int m = model.control_dim();

  PropositionReport r;
  for (std::size_t i = 0; i + 1 < plan.default_traj.size(); ++i) {
    const Vec c = model.control_matrix(plan.default_traj.state(i)).transpose() * plan.adjoints.rho.state(i);
    r.max_abs_mig_horizon = std::max(r.max_abs_mig_horizon, box_max_abs_linear(c, b));
  }

  const std::size_t i = plan.best;
  r.tau = plan.times[i];
  const Vec xi = plan.default_traj.state(i);
  const Vec rho = plan.adjoints.rho.state(i);
  const Mat omega = plan.adjoints.omega->at(i);
  const Vec vt = v(r.tau);
  r.rho_h = model.control_matrix(xi).transpose() * rho;
  r.max_abs_mig = box_max_abs_linear(r.rho_h, b);
  const BracketSet set = bracket_set(model, xi);
  for (const auto& p : set.control) r.rho_hh.push_back(rho.dot(p.value));
  for (const auto& d : set.drift) r.rho_gh.push_back(rho.dot(d));

  r.min_mih_control = plan.controls[i];
  r.min_mih = mih(model, obj, rho, omega, xi, r.min_mih_control, vt, r.tau);
  const MihQuadratic q = mih_quadratic(model, obj, rho, omega, xi, vt, r.tau);
  constexpr int kPerAxis = 5;
  long total = 1;
  for (int k = 0; k < m; ++k) total *= kPerAxis;
  Vec u(m);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    for (int k = 0; k < m; ++k) {
      const double s = static_cast<double>(rest % kPerAxis) / (kPerAxis - 1);
      rest /= kPerAxis;
      u[k] = b.lo[k] + s * (b.hi[k] - b.lo[k]);
    }
    const double val = q.value(u - vt);
    if (val < r.min_mih) {
      r.min_mih = val;
      r.min_mih_control = u;
    }
  }
  return r;
}

std::string PropositionReport::to_string() const {
  std::ostringstream os;
  os << std::scientific << std::setprecision(6);
  os << "tau " << tau << "\nmax_abs_mig " << max_abs_mig << "\nmax_abs_mig_horizon " << max_abs_mig_horizon
     << "\nrho_h";
  for (Eigen::Index k = 0; k < rho_h.size(); ++k) os << ' ' << rho_h[k];
  os << "\nrho_hh";
  for (double v : rho_hh) os << ' ' << v;
  os << "\nrho_gh";
  for (double v : rho_gh) os << ' ' << v;
  os << "\nmin_mih " << min_mih << "\nmin_mih_control";
  for (Eigen::Index k = 0; k < min_mih_control.size(); ++k) os << ' ' << min_mih_control[k];
  os << '\n';
  return os.str();
}

}  // namespace needle
