#include "needle/mode_insertion.hpp"

namespace needle {

double mig(const SystemModel& model, const Vec& rho, const Vec& x, const Vec& u, const Vec& v) {
  return rho.dot(model.control_matrix(x) * (u - v));
}

double mih(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega, const Vec& x,
           const Vec& u, const Vec& v, double t) {
  const Vec f1 = model.dynamics(x, v);
  const Vec f2 = model.dynamics(x, u);
  const Mat df1 = model.dynamics_jacobian(x, v);
  const Mat df2 = model.dynamics_jacobian(x, u);
  const Vec d = f2 - f1;
  return d.dot(omega * d) + rho.dot(df2 * f2 + df1 * f1 - 2.0 * df1 * f2) -
         obj.running_gradient(x, t).dot(d);
}

MihQuadratic mih_quadratic(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega,
                           const Vec& x, const Vec& v, double t) {
  const int m = model.control_dim();
  const Mat h = model.control_matrix(x);
  const Vec f1 = model.dynamics(x, v);
  const Mat df1 = model.dynamics_jacobian(x, v);

  Mat s(m, model.state_dim());
  for (int k = 0; k < m; ++k) s.row(k) = rho.transpose() * model.control_jacobian(x, k);

  MihQuadratic q;
  q.A = h.transpose() * omega * h + s * h;
  q.b = s * f1 - h.transpose() * (df1.transpose() * rho + obj.running_gradient(x, t));
  return q;
}

MihDerivatives mih_control_derivatives(const MihQuadratic& q, const Vec& v) {
  MihDerivatives d;
  d.gamma = q.A + q.A.transpose();
  d.delta = d.gamma * v - q.b;
  return d;
}

MihDerivatives mih_control_derivatives(const SystemModel& model, const Objective& obj, const Vec& rho,
                                       const Mat& omega, const Vec& x, const Vec& v, double t) {
  return mih_control_derivatives(mih_quadratic(model, obj, rho, omega, x, v, t), v);
}

}  // namespace needle
