#pragma once

#include "needle/objective.hpp"
#include "needle/system_model.hpp"

namespace needle {

/// First-order sensitivity of the cost to inserting u at a point:
///   dJ/dlambda = rho' (f2 - f1) = rho' h(x) (u - v).
double mig(const SystemModel& model, const Vec& rho, const Vec& x, const Vec& u, const Vec& v);

/// Second-order sensitivity for an insertion of u on [tau, tau + lambda]:
///   d' Omega d + rho' (D_x f2 f2 + D_x f1 f1 - 2 D_x f1 f2) - D_x l d,
/// with d = f2 - f1 and everything evaluated at (x, t) = (x(tau), tau).
double mih(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega, const Vec& x,
           const Vec& u, const Vec& v, double t);

/// MIH written as a quadratic in w = u - v:  MIH = w' A w + b' w.
struct MihQuadratic {
  Mat A;  ///< h' Omega h + C, with C_kj = rho' D_x h_k h_j (not symmetric)
  Vec b;  ///< S f1 - h' (D_x f1' rho + D_x l'), with S_k = rho' D_x h_k

  double value(const Vec& w) const { return w.dot(A * w) + b.dot(w); }
};

MihQuadratic mih_quadratic(const SystemModel& model, const Objective& obj, const Vec& rho, const Mat& omega,
                           const Vec& x, const Vec& v, double t);

/// Gamma = d^2 MIH / du^2 and Delta = -dMIH/du at u = 0 (= Gamma v - b), the pair for
/// which the minimizer of lambda MIG + lambda^2/2 MIH + 1/2 |u|_R^2 reads
///   u* = [lambda^2/2 Gamma + R]^{-1} [lambda^2/2 Delta - lambda h' rho].
struct MihDerivatives {
  Vec delta;
  Mat gamma;
};

MihDerivatives mih_control_derivatives(const SystemModel& model, const Objective& obj, const Vec& rho,
                                       const Mat& omega, const Vec& x, const Vec& v, double t);
MihDerivatives mih_control_derivatives(const MihQuadratic& q, const Vec& v);

}  // namespace needle
