#include "needle/models.hpp"

#include <cmath>
#include <stdexcept>

namespace needle {

DiffDrive::DiffDrive(DiffDriveParams p, ControlBounds bounds) : SystemModel(std::move(bounds)), p_(p) {
  if (!(p_.wheel_radius > 0.0) || !(p_.wheel_separation > 0.0)) {
    throw std::invalid_argument("diff_drive: wheel radius and separation must be positive");
  }
}

Vec DiffDrive::drift(const Vec& /*x*/) const { return Vec::Zero(3); }

Mat DiffDrive::control_matrix(const Vec& x) const {
  const double r = p_.wheel_radius;
  const double c = std::cos(x[2]);
  const double s = std::sin(x[2]);
  Mat h(3, 2);
  h << r * c, r * c,
       r * s, r * s,
       r / p_.wheel_separation, -r / p_.wheel_separation;
  return h;
}

Mat DiffDrive::drift_jacobian(const Vec& /*x*/) const { return Mat::Zero(3, 3); }

Mat DiffDrive::control_jacobian(const Vec& x, int k) const {
  if (k < 0 || k > 1) throw std::out_of_range("diff_drive: control column out of range");
  const double r = p_.wheel_radius;
  Mat d = Mat::Zero(3, 3);
  d(0, 2) = -r * std::sin(x[2]);
  d(1, 2) = r * std::cos(x[2]);
  return d;
}

Mat DiffDrive::weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const {
  check_dims(x, u);
  const double speed = p_.wheel_radius * (u[0] + u[1]);
  Mat hess = Mat::Zero(3, 3);
  hess(2, 2) = speed * (-w[0] * std::cos(x[2]) - w[1] * std::sin(x[2]));
  return hess;
}

ControlBounds default_diff_drive_bounds() {
  // The printed limit is 150/36 per wheel; with r = 36 mm this is a wheel
  // angular velocity bound of about 4.17 rad/s (150 mm/s rim speed).
  return ControlBounds::symmetric(Vec::Constant(2, 150.0 / 36.0));
}

ModelPtr make_diff_drive(const DiffDriveParams& p, const ControlBounds& bounds) {
  return std::make_shared<DiffDrive>(p, bounds);
}

ModelPtr make_diff_drive(const DiffDriveParams& p) { return make_diff_drive(p, default_diff_drive_bounds()); }

}  // namespace needle
