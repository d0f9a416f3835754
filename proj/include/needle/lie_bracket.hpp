#pragma once

#include "needle/system_model.hpp"

#include <functional>
#include <vector>

namespace needle {

/// A state-dependent vector field with an optional analytic Jacobian; when
/// `jacobian` is empty, central differences are used.
struct SmoothField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;

  Mat jacobian_at(const Vec& x) const;
};

/// [f, g](x) = D_x g f - D_x f g.
Vec lie_bracket(const SmoothField& f, const SmoothField& g, const Vec& x);

/// Control column h_k of a model, with its analytic Jacobian.
SmoothField control_field(const SystemModel& model, int k);
/// Drift g of a model, with its analytic Jacobian.
SmoothField drift_field(const SystemModel& model);

struct BracketPair {
  int i = 0;
  int j = 0;
  Vec value;
};

struct BracketSet {
  Mat columns;                       ///< h(x), N x M
  std::vector<BracketPair> control;  ///< [h_i, h_j] for i < j
  std::vector<Vec> drift;            ///< [g, h_i]
  Mat assembled;                     ///< all of the above side by side, N x K
};

BracketSet bracket_set(const SystemModel& model, const Vec& x);

struct SpanRank {
  int rank = 0;
  int dimension = 0;  ///< N, or N - 1 on models carrying a unit quaternion
  BracketSet brackets;
};

/// Numerical rank (singular values above 1e-8 sigma_max) of the bracket set.
/// On quaternion models the quaternion block of every vector is first
/// projected onto the tangent space of the unit sphere at q.
SpanRank bracket_span_rank(const SystemModel& model, const Vec& x);

}  // namespace needle
