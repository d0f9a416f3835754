#pragma once

#include "needle/ode.hpp"

#include <functional>
#include <vector>

namespace needle {

/// Desired state as a function of time.
using TargetFn = std::function<Vec(double)>;

TargetFn fixed_target(Vec x_d);

/// Reference curve for the swimming-body tracking task, written into the
/// position rows (0..2) of a `state_dim` vector; all other rows are zero.
///   [cos(3t/10)(20 + 10 cos(t/5)), sin(3t/10)(20 + 10 cos(t/5)), 10 sin(2t/5)]
Vec target_tracking_trajectory(double t, int state_dim = 13);
TargetFn tracking_target(int state_dim = 13);

/// Smooth repulsive penalty w exp(-k (d - r_safe)) on the distance d from the
/// position coordinates to a (possibly moving) center. d is lower-bounded as
/// sqrt(|p - c|^2 + delta^2) so the penalty is C-infinity everywhere.
struct ObstaclePenalty {
  static constexpr double kDistanceFloor = 1e-6;

  Vec center;
  Vec velocity;  ///< empty or zero for static obstacles
  double radius = 0.0;
  double weight = 1.0;
  double sharpness = 1.0;

  Vec center_at(double t) const;
  /// Euclidean distance minus radius; negative inside the obstacle.
  double clearance(const Vec& p, double t) const;
  double value(const Vec& p, double t) const;
  /// Adds the penalty's value, position gradient and position Hessian.
  void accumulate(const Vec& p, double t, double& value, Vec& grad, Mat& hess) const;
};

struct CostTerms {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

/// Tracking objective J = int l(x, t) dt + m(x(t_f), t_f) with
///   l = 1/2 e' Q e + sum of obstacle penalties,   m = 1/2 e' P1 e,
/// e = x - x_d(t). There is no control term.
class Objective {
 public:
  /// Throws std::invalid_argument if Q or P1 are not symmetric PSD of matching
  /// size, or an obstacle's dimension differs from `position_rows`.
  Objective(Mat Q, Mat P1, TargetFn target, std::vector<int> position_rows,
            std::vector<ObstaclePenalty> obstacles = {});

  int state_dim() const { return static_cast<int>(Q_.rows()); }
  const Mat& Q() const { return Q_; }
  const Mat& P1() const { return P1_; }
  const std::vector<ObstaclePenalty>& obstacles() const { return obstacles_; }
  const std::vector<int>& position_rows() const { return position_rows_; }
  Vec target(double t) const { return target_(t); }

  double running_value(const Vec& x, double t) const;
  Vec running_gradient(const Vec& x, double t) const;
  CostTerms running(const Vec& x, double t) const;
  CostTerms terminal(const Vec& x, double t) const;

  /// Trapezoidal quadrature of l on the trajectory nodes plus m at the end.
  double total_cost(const Trajectory& traj) const;

  /// Smallest obstacle clearance at (x, t); +infinity without obstacles.
  double clearance(const Vec& x, double t) const;

 private:
  Vec position_of(const Vec& x) const;

  Mat Q_;
  Mat P1_;
  TargetFn target_;
  std::vector<int> position_rows_;
  std::vector<ObstaclePenalty> obstacles_;
};

}  // namespace needle
