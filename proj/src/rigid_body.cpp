#include "needle/models.hpp"

#include <stdexcept>

namespace needle {

namespace {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

}  // namespace

namespace quat {

Vec3 rotate(const Vec4& q, const Vec3& w) {
  const double q0 = q[0];
  const Vec3 qv = q.tail<3>();
  return (q0 * q0 - qv.squaredNorm()) * w + 2.0 * qv * qv.dot(w) + 2.0 * q0 * qv.cross(w);
}

Eigen::Matrix<double, 3, 4> rotate_jacobian(const Vec4& q, const Vec3& w) {
  const double q0 = q[0];
  const Vec3 qv = q.tail<3>();
  Eigen::Matrix<double, 3, 4> j;
  j.col(0) = 2.0 * q0 * w + 2.0 * qv.cross(w);
  j.rightCols<3>() = -2.0 * w * qv.transpose() + 2.0 * qv.dot(w) * Eigen::Matrix3d::Identity() +
                     2.0 * qv * w.transpose() - 2.0 * q0 * skew(w);
  return j;
}

Eigen::Matrix<double, 4, 3> rate_matrix(const Vec4& q) {
  Eigen::Matrix<double, 4, 3> e;
  e << -q[1], -q[2], -q[3],
        q[0], -q[3],  q[2],
        q[3],  q[0], -q[1],
       -q[2],  q[1],  q[0];
  return e;
}

Eigen::Matrix3d rotation(const Vec4& q) {
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i) r.col(i) = rotate(q, Vec3::Unit(i));
  return r;
}

}  // namespace quat

namespace {

Vec4 quat_of(const Vec& x) { return x.segment<4>(3); }

/// d(E(q) w)/dq, 4 x 4; E is linear in q.
Eigen::Matrix4d rate_jacobian(const Vec3& w) {
  Eigen::Matrix4d j;
  for (int a = 0; a < 4; ++a) j.col(a) = quat::rate_matrix(Vec4::Unit(a)) * w;
  return j;
}

/// Hessian in q of w' R(q) v; R is quadratic in q so this is constant in q.
Eigen::Matrix4d rotate_hessian(const Vec3& w, const Vec3& v) {
  Eigen::Matrix4d h;
  const double wv = w.dot(v);
  h(0, 0) = 2.0 * wv;
  h.block<1, 3>(0, 1) = 2.0 * v.cross(w).transpose();
  h.block<3, 1>(1, 0) = 2.0 * v.cross(w);
  h.block<3, 3>(1, 1) = -2.0 * wv * Mat3::Identity() + 2.0 * (w * v.transpose() + v * w.transpose());
  return h;
}

void normalize_quat(Vec& x) {
  auto q = x.segment<4>(3);
  const double n = q.norm();
  if (n > 0.0) q /= n;
}

}  // namespace

KinematicBody::KinematicBody(ControlBounds bounds) : SystemModel(std::move(bounds)) {}

Vec KinematicBody::drift(const Vec& /*x*/) const { return Vec::Zero(7); }

Mat KinematicBody::control_matrix(const Vec& x) const {
  const Vec4 q = quat_of(x);
  const auto e = quat::rate_matrix(q);
  Mat h = Mat::Zero(7, 4);
  h.block<3, 1>(0, 0) = quat::rotate(q, Vec3::UnitX());
  h.block<3, 1>(0, 1) = quat::rotate(q, Vec3::UnitZ());
  h.block<4, 1>(3, 2) = 0.5 * e.col(0);
  h.block<4, 1>(3, 3) = 0.5 * e.col(1);
  return h;
}

Mat KinematicBody::drift_jacobian(const Vec& /*x*/) const { return Mat::Zero(7, 7); }

Mat KinematicBody::control_jacobian(const Vec& x, int k) const {
  Mat d = Mat::Zero(7, 7);
  switch (k) {
    case 0: d.block<3, 4>(0, 3) = quat::rotate_jacobian(quat_of(x), Vec3::UnitX()); break;
    case 1: d.block<3, 4>(0, 3) = quat::rotate_jacobian(quat_of(x), Vec3::UnitZ()); break;
    case 2: d.block<4, 4>(3, 3) = 0.5 * rate_jacobian(Vec3::UnitX()); break;
    case 3: d.block<4, 4>(3, 3) = 0.5 * rate_jacobian(Vec3::UnitY()); break;
    default: throw std::out_of_range("kin_body: control column out of range");
  }
  return d;
}

Mat KinematicBody::weighted_hessian(const Vec& x, const Vec& u, const Vec& w) const {
  check_dims(x, u);
  Mat hess = Mat::Zero(7, 7);
  const Vec3 body_vel(u[0], 0.0, u[1]);
  hess.block<4, 4>(3, 3) = rotate_hessian(w.head<3>(), body_vel);
  return hess;
}

void KinematicBody::project(Vec& x) const { normalize_quat(x); }

ControlBounds default_kinematic_body_bounds() { return ControlBounds::symmetric(Vec::Constant(4, 10.0)); }

ModelPtr make_kinematic_body(const ControlBounds& bounds) { return std::make_shared<KinematicBody>(bounds); }

ModelPtr make_kinematic_body() { return make_kinematic_body(default_kinematic_body_bounds()); }

Fish::Fish(FishParams p, ControlBounds bounds) : SystemModel(std::move(bounds)), p_(p) {
  if ((p_.mass.array() <= 0.0).any() || (p_.inertia.array() <= 0.0).any()) {
    throw std::invalid_argument("fish: mass and inertia entries must be positive");
  }
  h_ = Mat::Zero(13, 4);
  h_(7, 0) = kForceScale / p_.mass[0];
  h_(9, 1) = kForceScale / p_.mass[2];
  h_(10, 2) = kTorqueScale / p_.inertia[0];
  h_(11, 3) = kTorqueScale / p_.inertia[1];
}

Vec Fish::drift(const Vec& x) const {
  const Vec4 q = quat_of(x);
  const Vec3 v = x.segment<3>(7);
  const Vec3 w = x.segment<3>(10);
  const Vec3 mv = p_.mass.cwiseProduct(v);
  const Vec3 jw = p_.inertia.cwiseProduct(w);
  Vec g(13);
  g.segment<3>(0) = quat::rotate(q, v) + p_.flow;
  g.segment<4>(3) = 0.5 * quat::rate_matrix(q) * w;
  g.segment<3>(7) = mv.cross(w).cwiseQuotient(p_.mass);
  g.segment<3>(10) = jw.cross(w).cwiseQuotient(p_.inertia);
  return g;
}

Mat Fish::control_matrix(const Vec& /*x*/) const { return h_; }

Mat Fish::drift_jacobian(const Vec& x) const {
  const Vec4 q = quat_of(x);
  const Vec3 v = x.segment<3>(7);
  const Vec3 w = x.segment<3>(10);
  const Mat3 m = p_.mass.asDiagonal();
  const Mat3 j = p_.inertia.asDiagonal();
  const Mat3 m_inv = p_.mass.cwiseInverse().asDiagonal();
  const Mat3 j_inv = p_.inertia.cwiseInverse().asDiagonal();

  Mat a = Mat::Zero(13, 13);
  a.block<3, 4>(0, 3) = quat::rotate_jacobian(q, v);
  a.block<3, 3>(0, 7) = quat::rotation(q);
  a.block<4, 4>(3, 3) = 0.5 * rate_jacobian(w);
  a.block<4, 3>(3, 10) = 0.5 * quat::rate_matrix(q);
  a.block<3, 3>(7, 7) = -m_inv * skew(w) * m;
  a.block<3, 3>(7, 10) = m_inv * skew(m * v);
  a.block<3, 3>(10, 10) = j_inv * (skew(j * w) - skew(w) * j);
  return a;
}

Mat Fish::control_jacobian(const Vec& /*x*/, int k) const {
  if (k < 0 || k > 3) throw std::out_of_range("fish: control column out of range");
  return Mat::Zero(13, 13);
}

Mat Fish::dynamics_jacobian(const Vec& x, const Vec& u) const {
  check_dims(x, u);
  return drift_jacobian(x);
}

Mat Fish::weighted_hessian(const Vec& x, const Vec& u, const Vec& wt) const {
  check_dims(x, u);
  const Vec4 q = quat_of(x);
  const double q0 = q[0];
  const Vec3 qv = q.tail<3>();
  const Vec3 v = x.segment<3>(7);
  const Vec3 wb = wt.segment<3>(0);
  const Vec4 wq = wt.segment<4>(3);
  const Vec3 c = wt.segment<3>(7).cwiseQuotient(p_.mass);
  const Vec3 d = wt.segment<3>(10).cwiseQuotient(p_.inertia);
  const Mat3 m = p_.mass.asDiagonal();
  const Mat3 j = p_.inertia.asDiagonal();

  Mat hess = Mat::Zero(13, 13);
  hess.block<4, 4>(3, 3) = rotate_hessian(wb, v);

  Eigen::Matrix<double, 4, 3> qv_block;
  qv_block.row(0) = (2.0 * q0 * wb + 2.0 * wb.cross(qv)).transpose();
  qv_block.bottomRows<3>() = -2.0 * qv * wb.transpose() + 2.0 * wb * qv.transpose() +
                             2.0 * wb.dot(qv) * Mat3::Identity() - 2.0 * q0 * skew(wb);
  hess.block<4, 3>(3, 7) = qv_block;
  hess.block<3, 4>(7, 3) = qv_block.transpose();

  Eigen::Matrix<double, 4, 3> qw_block;
  for (int a = 0; a < 4; ++a) {
    qw_block.row(a) = 0.5 * (quat::rate_matrix(Vec4::Unit(a)).transpose() * wq).transpose();
  }
  hess.block<4, 3>(3, 10) = qw_block;
  hess.block<3, 4>(10, 3) = qw_block.transpose();

  const Mat3 vw_block = -m * skew(c);
  hess.block<3, 3>(7, 10) = vw_block;
  hess.block<3, 3>(10, 7) = vw_block.transpose();

  const Mat3 b = -j * skew(d);
  hess.block<3, 3>(10, 10) = b + b.transpose();
  return hess;
}

void Fish::project(Vec& x) const { normalize_quat(x); }

ControlBounds default_fish_bounds() {
  Vec lo(4);
  Vec hi(4);
  lo << -1.0, 0.0, -0.1, -0.1;
  hi << 1.0, 1.0, 0.1, 0.1;
  return {lo, hi};
}

ModelPtr make_fish(const FishParams& p, const ControlBounds& bounds) { return std::make_shared<Fish>(p, bounds); }

ModelPtr make_fish(const FishParams& p) { return make_fish(p, default_fish_bounds()); }

}  // namespace needle
