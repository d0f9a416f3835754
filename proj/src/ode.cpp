#include "needle/ode.hpp"

#include <algorithm>
#include <cmath>

namespace needle {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

// Number of full steps and the length of the trailing partial step.
std::pair<std::size_t, double> step_layout(double span, double dt) {
  const double ratio = span / dt;
  auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  double rest = span - static_cast<double>(full) * dt;
  if (rest < 1e-9 * dt) rest = 0.0;
  return {full, rest};
}

}  // namespace

Trajectory::Trajectory(std::vector<double> times, Mat states, Mat derivatives, double nominal_dt)
    : times_(std::move(times)),
      states_(std::move(states)),
      derivatives_(std::move(derivatives)),
      dt_(nominal_dt) {
  if (times_.empty()) throw std::invalid_argument("Trajectory: no samples");
  if (static_cast<std::size_t>(states_.cols()) != times_.size() ||
      derivatives_.cols() != states_.cols() || derivatives_.rows() != states_.rows()) {
    throw std::invalid_argument("Trajectory: sample count or dimension mismatch");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("Trajectory: times must be strictly increasing");
    }
  }
}

Trajectory Trajectory::from_samples(double t0, double dt, const std::vector<Vec>& states) {
  if (states.empty()) throw std::invalid_argument("Trajectory: no samples");
  if (!(dt > 0.0)) throw std::invalid_argument("Trajectory: dt must be positive");
  const auto n = states.size();
  const auto dim = states.front().size();
  Mat x(dim, static_cast<Eigen::Index>(n));
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (states[i].size() != dim) throw std::invalid_argument("Trajectory: ragged samples");
    x.col(static_cast<Eigen::Index>(i)) = states[i];
    t[i] = t0 + static_cast<double>(i) * dt;
  }
  Mat dx = Mat::Zero(dim, static_cast<Eigen::Index>(n));
  if (n >= 3) {
    const auto last = static_cast<Eigen::Index>(n - 1);
    dx.col(0) = (-3.0 * x.col(0) + 4.0 * x.col(1) - x.col(2)) / (2.0 * dt);
    for (Eigen::Index i = 1; i < last; ++i) dx.col(i) = (x.col(i + 1) - x.col(i - 1)) / (2.0 * dt);
    dx.col(last) = (3.0 * x.col(last) - 4.0 * x.col(last - 1) + x.col(last - 2)) / (2.0 * dt);
  } else if (n == 2) {
    dx.col(0) = dx.col(1) = (x.col(1) - x.col(0)) / dt;
  }
  return Trajectory(std::move(t), std::move(x), std::move(dx), dt);
}

std::size_t Trajectory::interval_of(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 2);
}

Vec Trajectory::sample(double t) const {
  const double slack = 1e-10 * std::max({1.0, std::abs(times_.front()), std::abs(times_.back())});
  if (t < times_.front() - slack || t > times_.back() + slack) {
    throw std::out_of_range("Trajectory::sample: t = " + std::to_string(t) + " outside [" +
                            std::to_string(times_.front()) + ", " + std::to_string(times_.back()) +
                            "]");
  }
  if (times_.size() == 1) return states_.col(0);
  t = std::clamp(t, times_.front(), times_.back());
  const std::size_t i = interval_of(t);
  const auto a = static_cast<Eigen::Index>(i);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  if (s == 0.0) return states_.col(a);
  if (s == 1.0) return states_.col(a + 1);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * states_.col(a) + (h10 * h) * derivatives_.col(a) + h01 * states_.col(a + 1) +
         (h11 * h) * derivatives_.col(a + 1);
}

void Trajectory::append(const Trajectory& tail) {
  if (tail.empty()) return;
  if (empty()) {
    *this = tail;
    return;
  }
  if (tail.dim() != dim()) throw std::invalid_argument("Trajectory::append: dimension mismatch");
  const double gap = std::abs(tail.t0() - t_end());
  if (gap > 1e-9 * std::max(1.0, std::abs(t_end()))) {
    throw std::invalid_argument("Trajectory::append: tail does not start at t_end");
  }
  const auto old_n = states_.cols();
  const auto extra = static_cast<Eigen::Index>(tail.size()) - 1;
  derivatives_.col(old_n - 1) = tail.derivatives_.col(0);
  states_.conservativeResize(Eigen::NoChange, old_n + extra);
  derivatives_.conservativeResize(Eigen::NoChange, old_n + extra);
  states_.rightCols(extra) = tail.states_.rightCols(extra);
  derivatives_.rightCols(extra) = tail.derivatives_.rightCols(extra);
  times_.insert(times_.end(), tail.times_.begin() + 1, tail.times_.end());
}

void symmetrize_flat(Vec& flat, int n) {
  Eigen::Map<Mat> m(flat.data(), n, n);
  m = (0.5 * (m + m.transpose())).eval();
}

MatrixTrajectory::MatrixTrajectory(Trajectory flat, int n) : flat_(std::move(flat)), n_(n) {
  if (flat_.dim() != n * n) throw std::invalid_argument("MatrixTrajectory: dim must be n*n");
}

Mat MatrixTrajectory::at(std::size_t i) const {
  Mat m = Eigen::Map<const Mat>(flat_.state(i).data(), n_, n_);
  return 0.5 * (m + m.transpose());
}

Mat MatrixTrajectory::sample(double t) const {
  Vec v = flat_.sample(t);
  Eigen::Map<Mat> m(v.data(), n_, n_);
  return 0.5 * (m + m.transpose());
}

std::vector<double> uniform_nodes(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");
  const auto [full, rest] = step_layout(t1 - t0, dt);
  std::vector<double> nodes;
  nodes.reserve(full + 2);
  for (std::size_t k = 0; k <= full; ++k) nodes.push_back(t0 + static_cast<double>(k) * dt);
  if (rest > 0.0 || full == 0) {
    nodes.push_back(t1);
  } else {
    nodes.back() = t1;
  }
  return nodes;
}

Trajectory integrate_on(const VectorField& field, const Vec& x0, const std::vector<double>& nodes,
                        double nominal_dt, const StepProjection& project) {
  if (nodes.size() < 2) throw std::invalid_argument("integrate_on: need at least two nodes");
  const std::size_t steps = nodes.size() - 1;
  const auto dim = x0.size();
  Mat states(dim, static_cast<Eigen::Index>(steps + 1));
  Mat derivs(dim, static_cast<Eigen::Index>(steps + 1));

  Vec x = x0;
  if (project) project(x);
  states.col(0) = x;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = nodes[k];
    const double t_next = nodes[k + 1];
    const double h = t_next - t;
    const Vec k1 = field(t, x);
    const Vec k2 = field(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vec k3 = field(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vec k4 = field(t_next, x + h * k3);
    derivs.col(static_cast<Eigen::Index>(k)) = k1;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (project) project(x);
    if (!all_finite(x)) throw IntegrationDiverged(t_next);
    states.col(static_cast<Eigen::Index>(k + 1)) = x;
  }
  const Vec last = field(nodes.back(), x);
  if (!all_finite(last)) throw IntegrationDiverged(nodes.back());
  derivs.col(static_cast<Eigen::Index>(steps)) = last;
  return Trajectory(nodes, std::move(states), std::move(derivs), nominal_dt);
}

Trajectory integrate(const VectorField& field, const Vec& x0, double t0, double t1, double dt,
                     const StepProjection& project) {
  return integrate_on(field, x0, uniform_nodes(t0, t1, dt), dt, project);
}

Trajectory integrate_backward_on(const VectorField& field, const Vec& y_end, const std::vector<double>& nodes,
                                 double nominal_dt, const StepProjection& project) {
  if (nodes.size() < 2) throw std::invalid_argument("integrate_backward_on: need at least two nodes");
  const double t_end = nodes.back();
  const std::size_t n = nodes.size();
  std::vector<double> s_nodes(n);
  for (std::size_t i = 0; i < n; ++i) s_nodes[i] = t_end - nodes[n - 1 - i];
  s_nodes[0] = 0.0;
  const VectorField reversed = [&](double s, const Vec& y) -> Vec { return -field(t_end - s, y); };
  Trajectory in_s;
  try {
    in_s = integrate_on(reversed, y_end, s_nodes, nominal_dt, project);
  } catch (const IntegrationDiverged& e) {
    throw IntegrationDiverged(t_end - e.time());
  }
  Mat states(in_s.dim(), static_cast<Eigen::Index>(n));
  Mat derivs(in_s.dim(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    states.col(static_cast<Eigen::Index>(i)) = in_s.state(j);
    derivs.col(static_cast<Eigen::Index>(i)) = -in_s.derivative(j);
  }
  return Trajectory(nodes, std::move(states), std::move(derivs), nominal_dt);
}

Trajectory integrate_backward(const VectorField& field, const Vec& y_end, double t_end,
                              double t_start, double dt, const StepProjection& project) {
  if (!(t_end > t_start)) throw std::invalid_argument("integrate_backward: t_end must exceed t_start");
  const std::vector<double> s_nodes = uniform_nodes(0.0, t_end - t_start, dt);
  const std::size_t n = s_nodes.size();
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = t_end - s_nodes[n - 1 - i];
  nodes.front() = t_start;
  nodes.back() = t_end;
  return integrate_backward_on(field, y_end, nodes, dt, project);
}

}  // namespace needle
