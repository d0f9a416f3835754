#pragma once

#include "needle/system_model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace needle {

struct DerivativeError {
  std::string derivative;  ///< e.g. "drift_jacobian", "control_jacobian[1]", "weighted_hessian"
  double max_rel_error = 0.0;
  std::string worst_entry;  ///< "(row, col)" of the largest mismatch
};

struct DerivativeReport {
  std::string model;
  int trials = 0;
  double tolerance = 1e-5;
  std::vector<DerivativeError> errors;

  bool passed() const;
  /// Names of every derivative entry above tolerance, empty when passed.
  std::string failures() const;
  std::string to_string() const;
};

/// Compares every analytic derivative of `model` with central differences
/// (step 1e-5 scaled by |x_j|) at `trials` random states and controls.
/// Relative error is |analytic - fd| / max(1, |fd|).
DerivativeReport check_derivatives(const SystemModel& model, int trials, std::uint64_t seed,
                                   double tolerance = 1e-5);

/// Uniform sample from a unit box around the origin; angles in [-pi, pi] for
/// the planar heading, quaternion blocks normalized.
Vec random_state(const SystemModel& model, std::mt19937_64& rng);
/// Uniform sample inside the model's control bounds.
Vec random_control(const SystemModel& model, std::mt19937_64& rng);

}  // namespace needle
