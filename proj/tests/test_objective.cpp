#include "properties.hpp"

#include <doctest.h>

#include <numbers>

using needle::Mat;
using needle::Vec;

namespace {

needle::Objective quadratic(const Vec& q, const Vec& p1, const Vec& target) {
  return needle::Objective(q.asDiagonal(), p1.asDiagonal(), needle::fixed_target(target), {0, 1});
}

}  // namespace

TEST_CASE("running cost at the target") {
  const auto obj = quadratic(Vec{{10.0, 10.0, 1000.0}}, Vec::Zero(3), Vec{{1.0, 2.0, 0.3}});
  const auto c = obj.running(Vec{{1.0, 2.0, 0.3}}, 0.0);
  CHECK(c.value == 0.0);
  CHECK(c.gradient.isZero(0.0));
  CHECK(c.hessian.isApprox(Vec{{10.0, 10.0, 1000.0}}.asDiagonal().toDenseMatrix()));
}

TEST_CASE("running cost with a unit position error") {
  const auto obj = quadratic(Vec{{10.0, 10.0, 1000.0}}, Vec::Zero(3), Vec::Zero(3));
  CHECK(obj.running_value(Vec{{1.0, 0.0, 0.0}}, 0.0) == doctest::Approx(5.0));
}

TEST_CASE("terminal cost curvature is P1") {
  const Vec p1{{100.0, 200.0, 100.0, 0.0, 0.0, 0.0, 0.0}};
  Vec target = Vec::Zero(7);
  target[3] = 1.0;
  const needle::Objective obj(Mat::Zero(7, 7), p1.asDiagonal(), needle::fixed_target(target), {0, 1, 2});
  const auto at = obj.terminal(target, 1.0);
  CHECK(at.value == 0.0);
  CHECK(at.gradient.isZero(0.0));
  Vec off = target;
  off[1] = 2.0;
  const auto c = obj.terminal(off, 1.0);
  CHECK(c.value == doctest::Approx(400.0));
  CHECK(c.hessian.isApprox(p1.asDiagonal().toDenseMatrix()));
}

TEST_CASE("total cost of a constant error is T e'Qe / 2") {
  const auto obj = quadratic(Vec{{2.0, 3.0, 0.0}}, Vec::Zero(3), Vec::Zero(3));
  std::vector<Vec> xs(101, Vec{{1.0, -2.0, 0.0}});
  const auto tr = needle::Trajectory::from_samples(0.0, 0.01, xs);
  CHECK(std::abs(obj.total_cost(tr) - 1.0 * 0.5 * (2.0 + 12.0)) < 1e-8);
}

TEST_CASE("tracking reference") {
  const Vec x0 = needle::target_tracking_trajectory(0.0);
  CHECK(x0.size() == 13);
  CHECK(x0.head<3>().isApprox(Eigen::Vector3d(30.0, 0.0, 0.0)));
  const Vec x1 = needle::target_tracking_trajectory(5.0 * std::numbers::pi);
  CHECK(x1.head<2>().norm() == doctest::Approx(10.0));
  CHECK(x1.tail<10>().isZero(0.0));
}

TEST_CASE("obstacle penalty") {
  needle::ObstaclePenalty p;
  p.center = Vec{{1.0, 1.0}};
  p.radius = 2.0;
  p.weight = 3.0;
  p.sharpness = 0.5;
  CHECK(p.value(Vec{{4.0, 1.0}}, 0.0) == doctest::Approx(3.0 * std::exp(-0.5)));
  CHECK(p.clearance(Vec{{4.0, 1.0}}, 0.0) == doctest::Approx(1.0));
  CHECK(p.clearance(Vec{{1.0, 1.0}}, 0.0) < 0.0);

  double v = 0.0;
  Vec g = Vec::Zero(2);
  Mat H = Mat::Zero(2, 2);
  p.accumulate(Vec{{1.0, 1.0}}, 0.0, v, g, H);
  CHECK(g.allFinite());
  CHECK(H.allFinite());

  p.velocity = Vec{{0.0, 2.0}};
  CHECK(p.center_at(1.5).isApprox(Vec{{1.0, 4.0}}));
}

TEST_CASE("objective validation") {
  CHECK_THROWS_AS(needle::Objective(Vec{{1.0, -1.0}}.asDiagonal(), Mat::Zero(2, 2), needle::fixed_target(Vec::Zero(2)),
                                    {0, 1}),
                  std::invalid_argument);
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(needle::Objective(asym, Mat::Zero(2, 2), needle::fixed_target(Vec::Zero(2)), {0, 1}),
                  std::invalid_argument);
  needle::ObstaclePenalty wrong;
  wrong.center = Vec::Zero(3);
  CHECK_THROWS_AS(needle::Objective(Mat::Identity(2, 2), Mat::Zero(2, 2), needle::fixed_target(Vec::Zero(2)), {0, 1},
                                    {wrong}),
                  std::invalid_argument);
}

TEST_CASE("clearance without obstacles is infinite") {
  const auto obj = quadratic(Vec::Ones(3), Vec::Zero(3), Vec::Zero(3));
  CHECK(std::isinf(obj.clearance(Vec::Zero(3), 0.0)));
}

TEST_CASE("objective properties") {
  for (const auto& c : {props::objective_derivatives(), props::cost_nonnegative(), props::penalty_smooth()}) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.ok);
  }
}
