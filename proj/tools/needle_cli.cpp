#include "needle/derivative_check.hpp"
#include "needle/descent_map.hpp"
#include "needle/monte_carlo.hpp"
#include "needle/results_io.hpp"
#include "needle/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace needle;

struct RunOptions {
  std::string scenario;
  std::string mode;
  int trials = 0;
  long long seed = -1;
  std::string out;
  int threads = 0;
};

int run_command(const RunOptions& o) {
  Scenario s = resolve_scenario(o.scenario);
  std::vector<SynthesisMode> modes;
  if (o.mode.empty()) {
    modes = {s.mode};
  } else if (o.mode == "both") {
    modes = {SynthesisMode::first_order, SynthesisMode::second_order};
  } else {
    modes = {parse_mode(o.mode)};
  }
  const int trials = o.trials > 0 ? o.trials : s.trials;
  const std::uint64_t seed = o.seed >= 0 ? static_cast<std::uint64_t>(o.seed) : s.seed;
  for (SynthesisMode mode : modes) {
    const MonteCarloResult r = run_monte_carlo(s, mode, trials, seed, o.threads);
    write_summary(std::cout, r.summary);
    if (!o.out.empty()) {
      const std::filesystem::path dir =
          modes.size() > 1 ? std::filesystem::path(o.out) / to_string(mode) : std::filesystem::path(o.out);
      emit_results(r, dir);
      std::cout << "results written to " << dir.string() << '\n';
    }
    std::cout << '\n';
  }
  return 0;
}

struct MapOptions {
  std::string scenario;
  std::vector<double> grid;
  double lambda = 1e-3;
  std::string out = "descent_map.csv";
  int threads = 0;
};

int descent_map_command(const MapOptions& o) {
  const Scenario s = resolve_scenario(o.scenario);
  const ModelPtr model = make_model(s.model);
  const Objective obj = make_objective(s.objective, *model);
  GridSpec g;
  if (!o.grid.empty()) {
    if (o.grid.size() != 5) throw std::invalid_argument("--grid expects a_min,a_max,b_min,b_max,step");
    g.a_min = o.grid[0];
    g.a_max = o.grid[1];
    g.b_min = o.grid[2];
    g.b_max = o.grid[3];
    g.step = o.grid[4];
  } else if (s.sampling && s.sampling->box_lo.size() == 2) {
    g.a_min = s.sampling->box_lo[0];
    g.a_max = s.sampling->box_hi[0];
    g.b_min = s.sampling->box_lo[1];
    g.b_max = s.sampling->box_hi[1];
    g.step = 25.0;
  } else {
    throw std::invalid_argument("scenario has no planar sampling box; pass --grid");
  }
  const auto rows = model->position_rows();
  g.coord_a = rows.at(0);
  g.coord_b = rows.at(1);
  g.base_state = s.initial_state ? *s.initial_state : s.sampling->base_state;
  const unsigned threads =
      o.threads > 0 ? static_cast<unsigned>(o.threads) : std::max(1u, std::thread::hardware_concurrency());
  const DescentMap map = descent_map(*model, obj, g, s.config_for(SynthesisMode::second_order),
                                     s.config_for(SynthesisMode::first_order), o.lambda, threads);
  map.write_csv(o.out);
  std::size_t feasible = 0;
  std::size_t negative = 0;
  for (const auto& c : map.cells) {
    if (!c.feasible || c.at_target) continue;
    ++feasible;
    if (c.predicted_dJ < 0.0) ++negative;
  }
  std::cout << "cells = " << map.cells.size() << "\nfeasible_off_target = " << feasible
            << "\npredicted_dJ_negative = " << negative << "\nwritten = " << o.out << '\n';
  return 0;
}

int check_derivatives_command(const std::string& model_name, int trials, long long seed) {
  ModelSpec spec;
  spec.type = model_name;
  const ModelPtr model = make_model(spec);
  const DerivativeReport report = check_derivatives(*model, trials, static_cast<std::uint64_t>(seed));
  std::cout << report.to_string();
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Needle-variation feedback synthesis and benchmark harness"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file or preset (Monte Carlo when trials > 1)");
  run_cmd->add_option("scenario", run.scenario, "Scenario file or preset name")->required();
  run_cmd->add_option("--mode", run.mode, "first, second or both (default: scenario mode)")
      ->check(CLI::IsMember({"first", "second", "first_order", "second_order", "both"}));
  run_cmd->add_option("--trials", run.trials, "Number of trials (default: scenario value)");
  run_cmd->add_option("--seed", run.seed, "Sampling seed (default: scenario value)");
  run_cmd->add_option("--out", run.out, "Output directory for CSV results");
  run_cmd->add_option("--threads", run.threads, "Worker threads (default: hardware concurrency)");

  MapOptions map;
  auto* map_cmd = app.add_subcommand("descent-map", "Evaluate the predicted cost change over a planar grid");
  map_cmd->add_option("scenario", map.scenario, "Scenario file or preset name")->required();
  map_cmd->add_option("--grid", map.grid, "a_min,a_max,b_min,b_max,step")->delimiter(',');
  map_cmd->add_option("--lambda", map.lambda, "Duration at which the Taylor model is evaluated");
  map_cmd->add_option("--out", map.out, "CSV output path");
  map_cmd->add_option("--threads", map.threads, "Worker threads");

  std::string model_name;
  int deriv_trials = 100;
  long long deriv_seed = 1;
  auto* deriv_cmd = app.add_subcommand("check-derivatives", "Compare analytic derivatives with finite differences");
  deriv_cmd->add_option("model", model_name, "diff_drive, kin_body or fish")
      ->required()
      ->check(CLI::IsMember({"diff_drive", "kin_body", "fish"}));
  deriv_cmd->add_option("--trials", deriv_trials, "Random states");
  deriv_cmd->add_option("--seed", deriv_seed, "Random seed");

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in scenarios");

  std::string export_name;
  std::string export_out;
  auto* export_cmd = app.add_subcommand("export-preset", "Print a preset as a scenario file");
  export_cmd->add_option("preset", export_name, "Preset name")->required();
  export_cmd->add_option("--out", export_out, "Write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run_command(run);
    if (*map_cmd) return descent_map_command(map);
    if (*deriv_cmd) return check_derivatives_command(model_name, deriv_trials, deriv_seed);
    if (*list_cmd) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (*export_cmd) {
      const std::string text = dump_scenario(preset(export_name));
      if (export_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(export_out);
        if (!f) throw std::runtime_error("cannot write " + export_out);
        f << text;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
