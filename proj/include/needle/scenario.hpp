#pragma once

#include "needle/models.hpp"
#include "needle/objective.hpp"
#include "needle/synthesis.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace needle {

struct ModelSpec {
  std::string type = "diff_drive";  ///< diff_drive | kin_body | fish
  DiffDriveParams diff_drive;
  FishParams fish;
  std::optional<ControlBounds> bounds;  ///< model default when absent
};

struct ObstacleSpec {
  Vec center;
  Vec velocity;
  double radius = 0.0;
  double weight = 1.0;
  double sharpness = 1.0;
};

struct ObjectiveSpec {
  Vec Q;   ///< diagonal
  Vec P1;  ///< diagonal
  std::string target_kind = "fixed";  ///< fixed | tracking
  Vec target;                         ///< fixed target state
  std::vector<ObstacleSpec> obstacles;
};

/// Uniform initial positions in an axis-aligned box (or a ball of
/// `ball_radius` when set) around the origin, rejecting samples closer than
/// `exclusion_radius` to the target position. All other state entries come
/// from `base_state`.
struct SamplingRegion {
  Vec box_lo;
  Vec box_hi;
  std::optional<double> ball_radius;
  double exclusion_radius = 0.0;
  Vec base_state;
};

struct SuccessCriterion {
  double position_tolerance = 0.0;
  std::optional<double> angle_tolerance;  ///< planar heading error (diff drive)
  std::optional<double> speed_tolerance;  ///< body linear speed (fish)
  double deadline = 0.0;
  bool stop_on_success = true;
};

struct Scenario {
  std::string name;
  ModelSpec model;
  ObjectiveSpec objective;
  SynthesisMode mode = SynthesisMode::second_order;
  SynthesisConfig synthesis;  ///< R is replaced by R_first / R_second per mode
  Mat R_first;
  Mat R_second;
  double feedback_rate = 4.0;  ///< Hz
  double duration = 60.0;      ///< simulated seconds
  std::optional<Vec> initial_state;
  std::optional<SamplingRegion> sampling;
  std::optional<SuccessCriterion> success;
  int trials = 1;
  std::uint64_t seed = 1;
  int record_stride = 10;  ///< keep every k-th integration node in logged trajectories

  double feedback_period() const { return 1.0 / feedback_rate; }
  SynthesisConfig config_for(SynthesisMode m) const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

ModelPtr make_model(const ModelSpec& spec);
Objective make_objective(const ObjectiveSpec& spec, const SystemModel& model);

/// Parses the YAML scenario schema. Unknown keys and type mismatches are
/// reported with the key path, e.g. "synthesis.horizon: expected a number".
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& yaml_text);
std::string dump_scenario(const Scenario& s);

/// Named scenarios reproducing the benchmark setups.
std::vector<std::string> preset_names();
Scenario preset(const std::string& name);
bool is_preset(const std::string& name);

/// A preset name or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace needle
