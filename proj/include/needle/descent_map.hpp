#pragma once

#include "needle/lie_bracket.hpp"
#include "needle/synthesis.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace needle {

/// Rectangular grid over two state coordinates; the remaining coordinates
/// are taken from `base_state`.
struct GridSpec {
  int coord_a = 0;
  int coord_b = 1;
  double a_min = 0.0;
  double a_max = 0.0;
  double b_min = 0.0;
  double b_max = 0.0;
  double step = 1.0;
  Vec base_state;
  double t0 = 0.0;

  std::vector<double> axis_a() const;
  std::vector<double> axis_b() const;
};

struct DescentCell {
  double a = 0.0;
  double b = 0.0;
  bool feasible = true;   ///< outside every obstacle
  bool at_target = false;
  double predicted_dJ = 0.0;  ///< lambda MIG + lambda^2/2 MIH at the second-order action
  double mig_first = 0.0;     ///< most negative MIG over the horizon at the first-order action
  double tau = 0.0;           ///< application time chosen by the second-order plan
};

struct DescentMap {
  GridSpec grid;
  double lambda = 0.0;
  std::vector<DescentCell> cells;  ///< row-major over (b, a)

  /// Columns: a, b, predicted_dJ_second_order, mig_first_order. Infeasible
  /// cells are omitted.
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
};

/// Evaluates, per grid cell and without applying anything, the second-order
/// plan (action from `second`, Taylor model evaluated at `lambda`) and the
/// first-order plan (action from `first`). Cells are distributed over
/// `threads` workers; results are stored by cell index.
DescentMap descent_map(const SystemModel& model, const Objective& obj, const GridSpec& grid,
                       const SynthesisConfig& second, const SynthesisConfig& first, double lambda,
                       unsigned threads = 1);

/// Quantities behind the first- and second-order existence arguments at a
/// state, evaluated along the default (v = 0) horizon from `t0`.
struct PropositionReport {
  double tau = 0.0;                   ///< candidate time (second-order plan)
  double max_abs_mig = 0.0;           ///< max over the control box of |MIG| at tau
  double max_abs_mig_horizon = 0.0;   ///< same, maximized over the horizon
  Vec rho_h;                          ///< rho' h_i at tau
  std::vector<double> rho_hh;         ///< rho' [h_i, h_j], i < j, at tau
  std::vector<double> rho_gh;         ///< rho' [g, h_i] at tau
  double min_mih = 0.0;               ///< minimum MIH found over the box
  Vec min_mih_control;

  std::string to_string() const;
};

PropositionReport proposition_diagnostics(const SystemModel& model, const Objective& obj, const Vec& x,
                                          const SynthesisConfig& cfg, double t0 = 0.0);

}  // namespace needle
