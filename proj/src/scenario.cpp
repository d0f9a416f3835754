#include "needle/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace needle {

namespace {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw SchemaError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw SchemaError(join(path, key), "unknown key");
  }
}

double get_number(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw SchemaError(path, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw SchemaError(path, "expected a number, got '" + node.Scalar() + "'");
  }
}

int get_int(const YAML::Node& node, const std::string& path) {
  const double d = get_number(node, path);
  if (d != std::floor(d)) throw SchemaError(path, "expected an integer");
  return static_cast<int>(d);
}

bool get_bool(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw SchemaError(path, "expected a boolean");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    throw SchemaError(path, "expected a boolean, got '" + node.Scalar() + "'");
  }
}

std::string get_string(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw SchemaError(path, "expected a string");
  return node.Scalar();
}

Vec get_vector(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw SchemaError(path, "expected a list of numbers");
  Vec v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = get_number(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat diag_or_matrix(const YAML::Node& node, const std::string& path) {
  if (node.IsSequence() && node.size() > 0 && node[0].IsSequence()) {
    const auto n = static_cast<Eigen::Index>(node.size());
    Mat m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Vec row = get_vector(node[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
      if (row.size() != n) throw SchemaError(path, "expected a square matrix");
      m.row(r) = row.transpose();
    }
    return m;
  }
  return get_vector(node, path).asDiagonal();
}

template <typename Fn>
void if_present(const YAML::Node& parent, const char* key, Fn&& fn) {
  const YAML::Node n = parent[key];
  if (n && !n.IsNull()) fn(n);
}

ModelSpec parse_model(const YAML::Node& node) {
  const std::string p = "model";
  check_keys(node, p,
             {"type", "wheel_radius", "wheel_separation", "mass", "inertia", "flow", "control_lo", "control_hi"});
  ModelSpec m;
  if (!node["type"]) throw SchemaError(join(p, "type"), "missing required key");
  m.type = get_string(node["type"], join(p, "type"));
  if (m.type != "diff_drive" && m.type != "kin_body" && m.type != "fish") {
    throw SchemaError(join(p, "type"), "expected one of diff_drive, kin_body, fish");
  }
  if_present(node, "wheel_radius", [&](auto n) { m.diff_drive.wheel_radius = get_number(n, join(p, "wheel_radius")); });
  if_present(node, "wheel_separation",
             [&](auto n) { m.diff_drive.wheel_separation = get_number(n, join(p, "wheel_separation")); });
  const auto vec3 = [&](const YAML::Node& n, const std::string& key) {
    const Vec v = get_vector(n, join(p, key));
    if (v.size() != 3) throw SchemaError(join(p, key), "expected 3 numbers");
    return Eigen::Vector3d(v);
  };
  if_present(node, "mass", [&](auto n) { m.fish.mass = vec3(n, "mass"); });
  if_present(node, "inertia", [&](auto n) { m.fish.inertia = vec3(n, "inertia"); });
  if_present(node, "flow", [&](auto n) { m.fish.flow = vec3(n, "flow"); });
  const bool has_lo = node["control_lo"].IsDefined();
  const bool has_hi = node["control_hi"].IsDefined();
  if (has_lo != has_hi) throw SchemaError(p, "control_lo and control_hi must be given together");
  if (has_lo) {
    m.bounds = ControlBounds{get_vector(node["control_lo"], join(p, "control_lo")),
                             get_vector(node["control_hi"], join(p, "control_hi"))};
  }
  return m;
}

ObjectiveSpec parse_objective(const YAML::Node& node) {
  const std::string p = "objective";
  check_keys(node, p, {"Q", "P1", "target", "obstacles"});
  ObjectiveSpec o;
  if (!node["Q"] || !node["P1"]) throw SchemaError(p, "Q and P1 are required");
  o.Q = get_vector(node["Q"], join(p, "Q"));
  o.P1 = get_vector(node["P1"], join(p, "P1"));
  if_present(node, "target", [&](const YAML::Node& t) {
    const std::string tp = join(p, "target");
    check_keys(t, tp, {"fixed", "named"});
    if (t["fixed"]) {
      o.target_kind = "fixed";
      o.target = get_vector(t["fixed"], join(tp, "fixed"));
    } else if (t["named"]) {
      const auto name = get_string(t["named"], join(tp, "named"));
      if (name != "tracking") throw SchemaError(join(tp, "named"), "unknown target '" + name + "'");
      o.target_kind = "tracking";
    }
  });
  if_present(node, "obstacles", [&](const YAML::Node& list) {
    const std::string lp = join(p, "obstacles");
    if (!list.IsSequence()) throw SchemaError(lp, "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ip = lp + "[" + std::to_string(i) + "]";
      check_keys(list[i], ip, {"center", "velocity", "radius", "weight", "sharpness"});
      ObstacleSpec ob;
      if (!list[i]["center"] || !list[i]["radius"]) throw SchemaError(ip, "center and radius are required");
      ob.center = get_vector(list[i]["center"], join(ip, "center"));
      ob.radius = get_number(list[i]["radius"], join(ip, "radius"));
      if_present(list[i], "velocity", [&](auto n) { ob.velocity = get_vector(n, join(ip, "velocity")); });
      if_present(list[i], "weight", [&](auto n) { ob.weight = get_number(n, join(ip, "weight")); });
      if_present(list[i], "sharpness", [&](auto n) { ob.sharpness = get_number(n, join(ip, "sharpness")); });
      o.obstacles.push_back(ob);
    }
  });
  return o;
}

void parse_synthesis(const YAML::Node& node, Scenario& s) {
  const std::string p = "synthesis";
  check_keys(node, p,
             {"mode", "horizon", "dt", "gamma", "lambda", "R_first", "R_second", "epsilon", "epsilon_relative", "beta", "k_max", "c",
              "lambda_init", "tau_stride", "saddle_tolerance", "tau_in_window"});
  auto& c = s.synthesis;
  if_present(node, "mode", [&](auto n) {
    try {
      s.mode = parse_mode(get_string(n, join(p, "mode")));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(join(p, "mode"), e.what());
    }
  });
  if_present(node, "horizon", [&](auto n) { c.horizon = get_number(n, join(p, "horizon")); });
  if_present(node, "dt", [&](auto n) { c.dt = get_number(n, join(p, "dt")); });
  if_present(node, "gamma", [&](auto n) { c.gamma = get_number(n, join(p, "gamma")); });
  if_present(node, "lambda", [&](auto n) { c.lambda_nominal = get_number(n, join(p, "lambda")); });
  if_present(node, "epsilon", [&](auto n) { c.epsilon_eig = get_number(n, join(p, "epsilon")); });
  if_present(node, "epsilon_relative",
             [&](auto n) { c.epsilon_relative = get_number(n, join(p, "epsilon_relative")); });
  if_present(node, "beta", [&](auto n) { c.beta = get_number(n, join(p, "beta")); });
  if_present(node, "k_max", [&](auto n) { c.k_max = get_int(n, join(p, "k_max")); });
  if_present(node, "c", [&](auto n) { c.c_decrease = get_number(n, join(p, "c")); });
  if_present(node, "lambda_init", [&](auto n) { c.lambda_init = get_number(n, join(p, "lambda_init")); });
  if_present(node, "tau_stride", [&](auto n) { c.tau_stride = get_int(n, join(p, "tau_stride")); });
  if_present(node, "saddle_tolerance",
             [&](auto n) { c.saddle_tolerance = get_number(n, join(p, "saddle_tolerance")); });
  if_present(node, "tau_in_window", [&](auto n) { c.tau_in_window = get_bool(n, join(p, "tau_in_window")); });
  if (!node["R_first"] || !node["R_second"]) throw SchemaError(p, "R_first and R_second are required");
  s.R_first = diag_or_matrix(node["R_first"], join(p, "R_first"));
  s.R_second = diag_or_matrix(node["R_second"], join(p, "R_second"));
}

SamplingRegion parse_sampling(const YAML::Node& node) {
  const std::string p = "sampling";
  check_keys(node, p, {"box_lo", "box_hi", "ball_radius", "exclusion_radius", "base_state"});
  SamplingRegion r;
  if_present(node, "box_lo", [&](auto n) { r.box_lo = get_vector(n, join(p, "box_lo")); });
  if_present(node, "box_hi", [&](auto n) { r.box_hi = get_vector(n, join(p, "box_hi")); });
  if_present(node, "ball_radius", [&](auto n) { r.ball_radius = get_number(n, join(p, "ball_radius")); });
  if_present(node, "exclusion_radius",
             [&](auto n) { r.exclusion_radius = get_number(n, join(p, "exclusion_radius")); });
  if (!node["base_state"]) throw SchemaError(join(p, "base_state"), "missing required key");
  r.base_state = get_vector(node["base_state"], join(p, "base_state"));
  return r;
}

SuccessCriterion parse_success(const YAML::Node& node) {
  const std::string p = "success";
  check_keys(node, p, {"position_tolerance", "angle_tolerance", "speed_tolerance", "deadline", "stop_on_success"});
  SuccessCriterion c;
  if (!node["position_tolerance"] || !node["deadline"]) {
    throw SchemaError(p, "position_tolerance and deadline are required");
  }
  c.position_tolerance = get_number(node["position_tolerance"], join(p, "position_tolerance"));
  c.deadline = get_number(node["deadline"], join(p, "deadline"));
  if_present(node, "angle_tolerance", [&](auto n) { c.angle_tolerance = get_number(n, join(p, "angle_tolerance")); });
  if_present(node, "speed_tolerance", [&](auto n) { c.speed_tolerance = get_number(n, join(p, "speed_tolerance")); });
  if_present(node, "stop_on_success", [&](auto n) { c.stop_on_success = get_bool(n, join(p, "stop_on_success")); });
  return c;
}

Scenario parse_root(const YAML::Node& root) {
  check_keys(root, "",
             {"name", "model", "objective", "synthesis", "feedback_rate", "duration", "initial_state", "sampling",
              "success", "trials", "seed", "record_stride"});
  for (const char* key : {"model", "objective", "synthesis"}) {
    if (!root[key]) throw SchemaError(key, "missing required section");
  }
  Scenario s;
  if_present(root, "name", [&](auto n) { s.name = get_string(n, "name"); });
  s.model = parse_model(root["model"]);
  s.objective = parse_objective(root["objective"]);
  parse_synthesis(root["synthesis"], s);
  if_present(root, "feedback_rate", [&](auto n) { s.feedback_rate = get_number(n, "feedback_rate"); });
  if_present(root, "duration", [&](auto n) { s.duration = get_number(n, "duration"); });
  if_present(root, "initial_state", [&](auto n) { s.initial_state = get_vector(n, "initial_state"); });
  if_present(root, "sampling", [&](auto n) { s.sampling = parse_sampling(n); });
  if_present(root, "success", [&](auto n) { s.success = parse_success(n); });
  if_present(root, "trials", [&](auto n) { s.trials = get_int(n, "trials"); });
  if_present(root, "seed", [&](auto n) {
    const int seed = get_int(n, "seed");
    if (seed < 0) throw SchemaError("seed", "expected a non-negative integer");
    s.seed = static_cast<std::uint64_t>(seed);
  });
  if_present(root, "record_stride", [&](auto n) { s.record_stride = get_int(n, "record_stride"); });
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("<scenario>", e.what());
  }
  return s;
}

YAML::Node to_yaml(const Vec& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (Eigen::Index i = 0; i < v.size(); ++i) n.push_back(v[i]);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

YAML::Node matrix_to_yaml(const Mat& m) {
  if (m.isDiagonal()) return to_yaml(m.diagonal());
  YAML::Node n(YAML::NodeType::Sequence);
  for (Eigen::Index r = 0; r < m.rows(); ++r) n.push_back(to_yaml(m.row(r).transpose()));
  return n;
}

}  // namespace

SynthesisConfig Scenario::config_for(SynthesisMode m) const {
  SynthesisConfig c = synthesis;
  c.R = m == SynthesisMode::first_order ? R_first : R_second;
  return c;
}

void Scenario::validate() const {
  const ModelPtr mdl = make_model(model);
  const int n = mdl->state_dim();
  const int m = mdl->control_dim();
  if (objective.Q.size() != n) throw std::invalid_argument("objective.Q must have " + std::to_string(n) + " entries");
  if (objective.P1.size() != n) {
    throw std::invalid_argument("objective.P1 must have " + std::to_string(n) + " entries");
  }
  if (objective.target_kind == "fixed" && objective.target.size() != n) {
    throw std::invalid_argument("objective.target.fixed must have " + std::to_string(n) + " entries");
  }
  (void)make_objective(objective, *mdl);
  config_for(SynthesisMode::first_order).validate(m);
  config_for(SynthesisMode::second_order).validate(m);
  if (!(feedback_rate > 0.0)) throw std::invalid_argument("feedback_rate must be positive");
  if (feedback_period() < synthesis.dt) throw std::invalid_argument("feedback period must be >= synthesis.dt");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (initial_state && initial_state->size() != n) {
    throw std::invalid_argument("initial_state must have " + std::to_string(n) + " entries");
  }
  if (!initial_state && !sampling) throw std::invalid_argument("need initial_state or sampling");
  if (sampling) {
    const auto k = static_cast<Eigen::Index>(mdl->position_rows().size());
    if (sampling->base_state.size() != n) throw std::invalid_argument("sampling.base_state dimension");
    if (!sampling->ball_radius && (sampling->box_lo.size() != k || sampling->box_hi.size() != k)) {
      throw std::invalid_argument("sampling needs box_lo/box_hi over the position coordinates or ball_radius");
    }
    if (sampling->box_lo.size() == k && sampling->box_hi.size() == k &&
        (sampling->box_hi - sampling->box_lo).minCoeff() < 0.0) {
      throw std::invalid_argument("sampling box needs box_lo <= box_hi");
    }
  }
  if (success && success->deadline > duration) throw std::invalid_argument("success.deadline exceeds duration");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

ModelPtr make_model(const ModelSpec& spec) {
  if (spec.type == "diff_drive") {
    return spec.bounds ? make_diff_drive(spec.diff_drive, *spec.bounds) : make_diff_drive(spec.diff_drive);
  }
  if (spec.type == "kin_body") return spec.bounds ? make_kinematic_body(*spec.bounds) : make_kinematic_body();
  if (spec.type == "fish") return spec.bounds ? make_fish(spec.fish, *spec.bounds) : make_fish(spec.fish);
  throw std::invalid_argument("unknown model type '" + spec.type + "'");
}

Objective make_objective(const ObjectiveSpec& spec, const SystemModel& model) {
  const int n = model.state_dim();
  TargetFn target = spec.target_kind == "tracking" ? tracking_target(n) : fixed_target(spec.target);
  std::vector<ObstaclePenalty> obstacles;
  for (const auto& o : spec.obstacles) obstacles.push_back({o.center, o.velocity, o.radius, o.weight, o.sharpness});
  return Objective(spec.Q.asDiagonal(), spec.P1.asDiagonal(), std::move(target), model.position_rows(),
                   std::move(obstacles));
}

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw std::runtime_error(std::string("scenario parse error: ") + e.what());
  }
  try {
    return parse_root(root);
  } catch (const SchemaError& e) {
    throw std::runtime_error(std::string("scenario schema error: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string dump_scenario(const Scenario& s) {
  YAML::Node root;
  root["name"] = s.name;
  YAML::Node model;
  model["type"] = s.model.type;
  if (s.model.type == "diff_drive") {
    model["wheel_radius"] = s.model.diff_drive.wheel_radius;
    model["wheel_separation"] = s.model.diff_drive.wheel_separation;
  }
  if (s.model.type == "fish") {
    model["mass"] = to_yaml(s.model.fish.mass);
    model["inertia"] = to_yaml(s.model.fish.inertia);
    model["flow"] = to_yaml(s.model.fish.flow);
  }
  if (s.model.bounds) {
    model["control_lo"] = to_yaml(s.model.bounds->lo);
    model["control_hi"] = to_yaml(s.model.bounds->hi);
  }
  root["model"] = model;

  YAML::Node obj;
  obj["Q"] = to_yaml(s.objective.Q);
  obj["P1"] = to_yaml(s.objective.P1);
  if (s.objective.target_kind == "tracking") {
    obj["target"]["named"] = "tracking";
  } else {
    obj["target"]["fixed"] = to_yaml(s.objective.target);
  }
  for (const auto& o : s.objective.obstacles) {
    YAML::Node on;
    on["center"] = to_yaml(o.center);
    if (o.velocity.size() > 0) on["velocity"] = to_yaml(o.velocity);
    on["radius"] = o.radius;
    on["weight"] = o.weight;
    on["sharpness"] = o.sharpness;
    obj["obstacles"].push_back(on);
  }
  root["objective"] = obj;

  YAML::Node syn;
  const auto& c = s.synthesis;
  syn["mode"] = to_string(s.mode);
  syn["horizon"] = c.horizon;
  syn["dt"] = c.dt;
  syn["gamma"] = c.gamma;
  syn["lambda"] = c.lambda_nominal;
  syn["R_first"] = matrix_to_yaml(s.R_first);
  syn["R_second"] = matrix_to_yaml(s.R_second);
  if (c.epsilon_eig > 0.0) syn["epsilon"] = c.epsilon_eig;
  if (c.epsilon_relative > 0.0) syn["epsilon_relative"] = c.epsilon_relative;
  syn["beta"] = c.beta;
  syn["k_max"] = c.k_max;
  syn["c"] = c.c_decrease;
  if (c.lambda_init > 0.0) syn["lambda_init"] = c.lambda_init;
  syn["tau_stride"] = c.tau_stride;
  syn["saddle_tolerance"] = c.saddle_tolerance;
  syn["tau_in_window"] = c.tau_in_window;
  root["synthesis"] = syn;

  root["feedback_rate"] = s.feedback_rate;
  root["duration"] = s.duration;
  if (s.initial_state) root["initial_state"] = to_yaml(*s.initial_state);
  if (s.sampling) {
    YAML::Node sm;
    if (s.sampling->box_lo.size() > 0) sm["box_lo"] = to_yaml(s.sampling->box_lo);
    if (s.sampling->box_hi.size() > 0) sm["box_hi"] = to_yaml(s.sampling->box_hi);
    if (s.sampling->ball_radius) sm["ball_radius"] = *s.sampling->ball_radius;
    sm["exclusion_radius"] = s.sampling->exclusion_radius;
    sm["base_state"] = to_yaml(s.sampling->base_state);
    root["sampling"] = sm;
  }
  if (s.success) {
    YAML::Node sc;
    sc["position_tolerance"] = s.success->position_tolerance;
    if (s.success->angle_tolerance) sc["angle_tolerance"] = *s.success->angle_tolerance;
    if (s.success->speed_tolerance) sc["speed_tolerance"] = *s.success->speed_tolerance;
    sc["deadline"] = s.success->deadline;
    sc["stop_on_success"] = s.success->stop_on_success;
    root["success"] = sc;
  }
  root["trials"] = s.trials;
  root["seed"] = static_cast<long long>(s.seed);
  root["record_stride"] = s.record_stride;

  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return preset(name_or_path);
  return load_scenario(name_or_path);
}

}  // namespace needle
