#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace needle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Right-hand side of an ODE: (t, x) -> dx/dt.
using VectorField = std::function<Vec(double, const Vec&)>;

/// Optional in-place projection applied after every accepted step
/// (quaternion renormalization, matrix symmetrization).
using StepProjection = std::function<void(Vec&)>;

class IntegrationDiverged : public std::runtime_error {
 public:
  explicit IntegrationDiverged(double t)
      : std::runtime_error("integration diverged: non-finite state at t = " + std::to_string(t)),
        time_(t) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// Densely stored time-indexed state curve.
///
/// Nodes are stored in increasing time order, one column per node. Every
/// node carries the state and its time derivative, and `sample` uses the pair
/// for piecewise-cubic Hermite interpolation, which is exact at the nodes and
/// O(h^4) in between. Grids produced by `integrate` are uniform with nominal
/// step dt except for a shortened final step; concatenated (switched)
/// trajectories may have irregular nodes at the switching times.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, Mat states, Mat derivatives, double nominal_dt);

  /// Uniform samples without derivative information; derivatives are
  /// estimated with second-order finite differences (exact for quadratics).
  static Trajectory from_samples(double t0, double dt, const std::vector<Vec>& states);

  int dim() const { return static_cast<int>(states_.rows()); }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double t0() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  double dt() const { return dt_; }

  const std::vector<double>& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  Eigen::Ref<const Vec> state(std::size_t i) const { return states_.col(static_cast<Eigen::Index>(i)); }
  Eigen::Ref<const Vec> derivative(std::size_t i) const {
    return derivatives_.col(static_cast<Eigen::Index>(i));
  }
  const Mat& states() const { return states_; }
  Eigen::Ref<const Vec> front() const { return state(0); }
  Eigen::Ref<const Vec> back() const { return state(size() - 1); }

  /// Throws std::out_of_range when t lies outside [t0, t_end].
  Vec sample(double t) const;

  /// Appends `tail`, whose first node must coincide with this curve's last
  /// node; the duplicated node takes the tail's derivative.
  void append(const Trajectory& tail);

 private:
  std::size_t interval_of(double t) const;

  std::vector<double> times_;
  Mat states_;
  Mat derivatives_;
  double dt_ = 0.0;
};

/// Curve of N x N matrices stored flattened (column-major). Samples are
/// symmetrized on the way in and on the way out.
class MatrixTrajectory {
 public:
  MatrixTrajectory() = default;
  MatrixTrajectory(Trajectory flat, int n);

  int n() const { return n_; }
  const Trajectory& flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }
  double time(std::size_t i) const { return flat_.time(i); }
  Mat at(std::size_t i) const;
  Mat sample(double t) const;

 private:
  Trajectory flat_;
  int n_ = 0;
};

/// Classical fourth-order Runge-Kutta with fixed step `dt` on [t0, t1]; the
/// final step is shortened to land exactly on t1.
Trajectory integrate(const VectorField& field, const Vec& x0, double t0, double t1, double dt,
                     const StepProjection& project = {});

/// RK4 with one step per consecutive pair of `nodes` (strictly increasing).
Trajectory integrate_on(const VectorField& field, const Vec& x0, const std::vector<double>& nodes,
                        double nominal_dt, const StepProjection& project = {});

/// t0, t0 + dt, ..., with a shortened final step landing exactly on t1.
std::vector<double> uniform_nodes(double t0, double t1, double dt);

/// Integrates dy/dt = field(t, y) backwards from y(t_end) = y_end down to
/// t_start. Implemented as a forward integration in s = t_end - t; the result
/// is returned in forward time order.
Trajectory integrate_backward(const VectorField& field, const Vec& y_end, double t_end,
                              double t_start, double dt, const StepProjection& project = {});

/// Backward counterpart of integrate_on: starts from y(nodes.back()) = y_end
/// and steps down through `nodes`; the result is in forward time order.
Trajectory integrate_backward_on(const VectorField& field, const Vec& y_end, const std::vector<double>& nodes,
                                 double nominal_dt, const StepProjection& project = {});

/// Symmetrizes a flattened square matrix in place.
void symmetrize_flat(Vec& flat, int n);

}  // namespace needle
