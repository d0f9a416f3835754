#include "needle/derivative_check.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace needle {

namespace {

double fd_step(double xj) { return 1e-5 * std::max(1.0, std::abs(xj)); }

template <typename Fn>
Mat fd_jacobian(const Fn& fn, const Vec& x) {
  const int n = static_cast<int>(x.size());
  Mat out;
  Vec xp = x;
  for (int j = 0; j < n; ++j) {
    const double h = fd_step(x[j]);
    xp[j] = x[j] + h;
    const Vec plus = fn(xp);
    xp[j] = x[j] - h;
    const Vec minus = fn(xp);
    xp[j] = x[j];
    if (out.size() == 0) out.resize(plus.size(), n);
    out.col(j) = (plus - minus) / (2.0 * h);
  }
  return out;
}

void record(DerivativeError& err, const Mat& analytic, const Mat& fd) {
  for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
    for (Eigen::Index r = 0; r < analytic.rows(); ++r) {
      const double e = std::abs(analytic(r, c) - fd(r, c)) / std::max(1.0, std::abs(fd(r, c)));
      if (e > err.max_rel_error || err.worst_entry.empty()) {
        err.max_rel_error = std::max(e, err.max_rel_error);
        err.worst_entry = "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
      }
    }
  }
}

}  // namespace

Vec random_state(const SystemModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec x(model.state_dim());
  for (auto& xi : x) xi = unit(rng);
  if (model.name() == "diff_drive") x[2] *= std::numbers::pi;
  if (auto qr = model.quaternion_row()) {
    auto q = x.segment(*qr, 4);
    while (q.norm() < 1e-3) {
      for (auto& qi : q) qi = unit(rng);
    }
    q.normalize();
  }
  return x;
}

Vec random_control(const SystemModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& b = model.bounds();
  Vec u(model.control_dim());
  for (int k = 0; k < model.control_dim(); ++k) u[k] = b.lo[k] + unit(rng) * (b.hi[k] - b.lo[k]);
  return u;
}

bool DerivativeReport::passed() const {
  for (const auto& e : errors) {
    if (!(e.max_rel_error <= tolerance)) return false;
  }
  return true;
}

std::string DerivativeReport::failures() const {
  std::string out;
  for (const auto& e : errors) {
    if (e.max_rel_error <= tolerance) continue;
    if (!out.empty()) out += "; ";
    out += e.derivative + e.worst_entry;
  }
  return out;
}

std::string DerivativeReport::to_string() const {
  std::ostringstream os;
  os << model << ": " << trials << " trials, tolerance " << tolerance << "\n";
  for (const auto& e : errors) {
    os << "  " << e.derivative << " max_rel_error " << e.max_rel_error << " at " << e.worst_entry
       << (e.max_rel_error <= tolerance ? "" : "  FAIL") << "\n";
  }
  os << (passed() ? "PASS" : "FAIL: " + failures()) << "\n";
  return os.str();
}

DerivativeReport check_derivatives(const SystemModel& model, int trials, std::uint64_t seed,
                                   double tolerance) {
  if (trials < 1) throw std::invalid_argument("check_derivatives: trials must be >= 1");
  const int m = model.control_dim();
  DerivativeReport report;
  report.model = model.name();
  report.trials = trials;
  report.tolerance = tolerance;

  DerivativeError drift{"drift_jacobian", 0.0, {}};
  std::vector<DerivativeError> columns;
  for (int k = 0; k < m; ++k) columns.push_back({"control_jacobian[" + std::to_string(k) + "]", 0.0, {}});
  DerivativeError full{"dynamics_jacobian", 0.0, {}};
  DerivativeError hess{"weighted_hessian", 0.0, {}};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const Vec x = random_state(model, rng);
    const Vec u = random_control(model, rng);
    Vec w(model.state_dim());
    for (auto& wi : w) wi = unit(rng);

    record(drift, model.drift_jacobian(x),
           fd_jacobian([&](const Vec& y) { return model.drift(y); }, x));
    for (int k = 0; k < m; ++k) {
      record(columns[k], model.control_jacobian(x, k),
             fd_jacobian([&](const Vec& y) -> Vec { return model.control_matrix(y).col(k); }, x));
    }
    record(full, model.dynamics_jacobian(x, u),
           fd_jacobian([&](const Vec& y) { return model.dynamics(y, u); }, x));
    const Mat fd_h = fd_jacobian(
        [&](const Vec& y) -> Vec { return model.dynamics_jacobian(y, u).transpose() * w; }, x);
    record(hess, model.weighted_hessian(x, u, w), 0.5 * (fd_h + fd_h.transpose()));
  }

  report.errors.push_back(drift);
  for (auto& c : columns) report.errors.push_back(c);
  report.errors.push_back(full);
  report.errors.push_back(hess);
  return report;
}

}  // namespace needle
