#include "needle/objective.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace needle {

namespace {

void require_psd(const Mat& m, int n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(std::string("objective: ") + name + " must be " + std::to_string(n) +
                                "x" + std::to_string(n));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!(m - m.transpose()).isZero(1e-12 * scale)) {
    throw std::invalid_argument(std::string("objective: ") + name + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument(std::string("objective: ") + name + " is not positive semidefinite");
  }
}

}  // namespace

TargetFn fixed_target(Vec x_d) {
  return [x_d = std::move(x_d)](double) { return x_d; };
}

Vec target_tracking_trajectory(double t, int state_dim) {
  if (state_dim < 3) throw std::invalid_argument("tracking target needs at least 3 state rows");
  Vec x = Vec::Zero(state_dim);
  const double radius = 20.0 + 10.0 * std::cos(t / 5.0);
  x[0] = std::cos(3.0 * t / 10.0) * radius;
  x[1] = std::sin(3.0 * t / 10.0) * radius;
  x[2] = 10.0 * std::sin(2.0 * t / 5.0);
  return x;
}

TargetFn tracking_target(int state_dim) {
  return [state_dim](double t) { return target_tracking_trajectory(t, state_dim); };
}

Vec ObstaclePenalty::center_at(double t) const {
  if (velocity.size() == 0) return center;
  return center + t * velocity;
}

double ObstaclePenalty::clearance(const Vec& p, double t) const { return (p - center_at(t)).norm() - radius; }

double ObstaclePenalty::value(const Vec& p, double t) const {
  const double d = std::sqrt((p - center_at(t)).squaredNorm() + kDistanceFloor * kDistanceFloor);
  return weight * std::exp(-sharpness * (d - radius));
}

void ObstaclePenalty::accumulate(const Vec& p, double t, double& val, Vec& grad, Mat& hess) const {
  const Vec diff = p - center_at(t);
  const double d = std::sqrt(diff.squaredNorm() + kDistanceFloor * kDistanceFloor);
  const double phi = weight * std::exp(-sharpness * (d - radius));
  const Vec n = diff / d;
  const int dim = static_cast<int>(p.size());
  val += phi;
  grad += -sharpness * phi * n;
  hess += sharpness * sharpness * phi * n * n.transpose() -
          (sharpness * phi / d) * (Mat::Identity(dim, dim) - n * n.transpose());
}

Objective::Objective(Mat Q, Mat P1, TargetFn target, std::vector<int> position_rows,
                     std::vector<ObstaclePenalty> obstacles)
    : Q_(std::move(Q)),
      P1_(std::move(P1)),
      target_(std::move(target)),
      position_rows_(std::move(position_rows)),
      obstacles_(std::move(obstacles)) {
  const int n = static_cast<int>(Q_.rows());
  require_psd(Q_, n, "Q");
  require_psd(P1_, n, "P1");
  if (!target_) throw std::invalid_argument("objective: missing target");
  for (int r : position_rows_) {
    if (r < 0 || r >= n) throw std::invalid_argument("objective: position row out of range");
  }
  for (const auto& ob : obstacles_) {
    if (ob.center.size() != static_cast<Eigen::Index>(position_rows_.size())) {
      throw std::invalid_argument("objective: obstacle center has " + std::to_string(ob.center.size()) +
                                  " coordinates, expected " + std::to_string(position_rows_.size()));
    }
    if (ob.velocity.size() != 0 && ob.velocity.size() != ob.center.size()) {
      throw std::invalid_argument("objective: obstacle velocity dimension mismatch");
    }
    if (!(ob.weight > 0.0) || !(ob.sharpness > 0.0) || ob.radius < 0.0) {
      throw std::invalid_argument("objective: obstacle needs weight > 0, sharpness > 0, radius >= 0");
    }
  }
}

Vec Objective::position_of(const Vec& x) const {
  Vec p(position_rows_.size());
  for (std::size_t i = 0; i < position_rows_.size(); ++i) p[static_cast<Eigen::Index>(i)] = x[position_rows_[i]];
  return p;
}

double Objective::running_value(const Vec& x, double t) const {
  const Vec e = x - target_(t);
  double v = 0.5 * e.dot(Q_ * e);
  if (!obstacles_.empty()) {
    const Vec p = position_of(x);
    for (const auto& ob : obstacles_) v += ob.value(p, t);
  }
  return v;
}

Vec Objective::running_gradient(const Vec& x, double t) const {
  return running(x, t).gradient;
}

CostTerms Objective::running(const Vec& x, double t) const {
  const Vec e = x - target_(t);
  CostTerms c;
  c.gradient = Q_ * e;
  c.value = 0.5 * e.dot(c.gradient);
  c.hessian = Q_;
  if (obstacles_.empty()) return c;

  const Vec p = position_of(x);
  const int k = static_cast<int>(p.size());
  double val = 0.0;
  Vec grad = Vec::Zero(k);
  Mat hess = Mat::Zero(k, k);
  for (const auto& ob : obstacles_) ob.accumulate(p, t, val, grad, hess);
  c.value += val;
  for (int i = 0; i < k; ++i) {
    c.gradient[position_rows_[i]] += grad[i];
    for (int j = 0; j < k; ++j) c.hessian(position_rows_[i], position_rows_[j]) += hess(i, j);
  }
  return c;
}

CostTerms Objective::terminal(const Vec& x, double t) const {
  const Vec e = x - target_(t);
  CostTerms c;
  c.gradient = P1_ * e;
  c.value = 0.5 * e.dot(c.gradient);
  c.hessian = P1_;
  return c;
}

double Objective::total_cost(const Trajectory& traj) const {
  if (traj.empty()) throw std::invalid_argument("total_cost: empty trajectory");
  double integral = 0.0;
  double prev = running_value(traj.state(0), traj.time(0));
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double cur = running_value(traj.state(i), traj.time(i));
    integral += 0.5 * (traj.time(i) - traj.time(i - 1)) * (prev + cur);
    prev = cur;
  }
  return integral + terminal(traj.back(), traj.t_end()).value;
}

double Objective::clearance(const Vec& x, double t) const {
  double best = std::numeric_limits<double>::infinity();
  if (obstacles_.empty()) return best;
  const Vec p = position_of(x);
  for (const auto& ob : obstacles_) best = std::min(best, ob.clearance(p, t));
  return best;
}

}  // namespace needle
