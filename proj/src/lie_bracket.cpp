#include "needle/lie_bracket.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace needle {

Mat SmoothField::jacobian_at(const Vec& x) const {
  if (jacobian) return jacobian(x);
  const auto n = x.size();
  Mat out;
  Vec xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    const Vec plus = value(xp);
    xp[j] = x[j] - h;
    const Vec minus = value(xp);
    xp[j] = x[j];
    if (out.size() == 0) out.resize(plus.size(), n);
    out.col(j) = (plus - minus) / (2.0 * h);
  }
  return out;
}

Vec lie_bracket(const SmoothField& f, const SmoothField& g, const Vec& x) {
  return g.jacobian_at(x) * f.value(x) - f.jacobian_at(x) * g.value(x);
}

SmoothField control_field(const SystemModel& model, int k) {
  return {[&model, k](const Vec& x) -> Vec { return model.control_matrix(x).col(k); },
          [&model, k](const Vec& x) { return model.control_jacobian(x, k); }};
}

SmoothField drift_field(const SystemModel& model) {
  return {[&model](const Vec& x) { return model.drift(x); },
          [&model](const Vec& x) { return model.drift_jacobian(x); }};
}

BracketSet bracket_set(const SystemModel& model, const Vec& x) {
  const int m = model.control_dim();
  const int n = model.state_dim();
  BracketSet set;
  set.columns = model.control_matrix(x);
  std::vector<SmoothField> h;
  for (int k = 0; k < m; ++k) h.push_back(control_field(model, k));
  const SmoothField g = drift_field(model);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) set.control.push_back({i, j, lie_bracket(h[i], h[j], x)});
  }
  for (int i = 0; i < m; ++i) set.drift.push_back(lie_bracket(g, h[i], x));

  const auto k = static_cast<Eigen::Index>(m + set.control.size() + set.drift.size());
  set.assembled.resize(n, k);
  Eigen::Index c = 0;
  set.assembled.leftCols(m) = set.columns;
  c = m;
  for (const auto& p : set.control) set.assembled.col(c++) = p.value;
  for (const auto& d : set.drift) set.assembled.col(c++) = d;
  return set;
}

SpanRank bracket_span_rank(const SystemModel& model, const Vec& x) {
  SpanRank out;
  out.brackets = bracket_set(model, x);
  Mat vectors = out.brackets.assembled;
  out.dimension = model.state_dim();
  if (auto qr = model.quaternion_row()) {
    const Vec q = x.segment(*qr, 4).normalized();
    const Mat proj = Mat::Identity(4, 4) - q * q.transpose();
    vectors.middleRows(*qr, 4) = proj * vectors.middleRows(*qr, 4);
    out.dimension -= 1;
  }
  Eigen::JacobiSVD<Mat> svd(vectors);
  const Vec& s = svd.singularValues();
  const double threshold = s.size() > 0 ? 1e-8 * s[0] : 0.0;
  out.rank = static_cast<int>((s.array() > threshold).count());
  return out;
}

}  // namespace needle
