// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

#include "combenergy/metrology.hpp"

namespace combenergy {

enum class SupBattery { individual, shared };

/// Causal-superposition optimization over two orders of two intermediate
/// channels (N = 3). The order-control space is a degenerate qubit; the final
/// measurement covers the energy eigenbasis of s5 and an arbitrary basis of
/// the order control, giving outcome pairs (x, y).
struct SupOptions {
  SupBattery battery = SupBattery::individual;
  BatteryModel sub_model = BatteryModel::global;
  // pins (p_id, p_swapped); used for uniform superpositions and for the
  // single-order fairness control
  std::optional<std::array<double, 2>> fixed_branch_weights;
};

struct SupProgram {
  ConicProblem problem;
  std::array<std::array<int, 2>, 2> g_vars{};   // [x][y] elements on (s1..s4, oc)
  std::array<std::array<int, 2>, 2> w_vars{};   // [tau][x] branch blocks on s1..s4
  std::array<int, 2> w2_vars{};                 // level-2 branch combs
  std::array<int, 2> w1_vars{};                 // level-1 branch combs
};

/// Builds the superposition program for a task operator on (s1..s4) with
/// estimator phases indexed row-major by (x, y).
SupProgram build_sup_program(const LabeledOperator& j_sup, double energy, const SupOptions& opts,
                             const std::vector<double>& phases);

struct SupStrategyResult {
  double cost = 0.0;
  std::vector<double> estimator;            // per (x, y), row-major
  std::array<double, 2> branch_weights{};   // recovered p_tau
  SolveReport solved;
  int total_solves = 0;
};

/// See-saw over the estimator phases of the superposition program.
SupStrategyResult sup_seesaw(const LabeledOperator& j_sup, double energy, const SupOptions& opts,
                             const SeesawOptions& seesaw_opts = {});

/// A pair of parameterized qubit channels plugged into the two slots.
struct TwoChannelFamily {
  std::function<Matrix(double)> first;   // Choi matrix on (s1, s2)
  std::function<Matrix(double)> second;  // Choi matrix on (s3, s4)

  LabeledOperator joint_choi(double theta) const;      // on s1..s4
  TaskOperator task_operator(int quadrature = 512) const;

  /// The strict-hierarchy example: e^{-i theta Z/2} and e^{+i theta Z/2},
  /// each preceded by a bit flip.
  static TwoChannelFamily hierarchy_example();
  /// The battery-separation example: e^{-i theta Z/2} and e^{+i theta X/2},
  /// each preceded by a bit flip.
  static TwoChannelFamily ind_vs_shared_example();
};

struct HierarchyRow {
  double energy = 0.0;
  double cost_sup_ind = 0.0;
  double cost_def_global = 0.0;
  double cost_def_local = 0.0;
  bool solved = true;
  std::string note;

  double gap_sup() const { return cost_def_global - cost_sup_ind; }
  double gap_battery() const { return cost_def_local - cost_def_global; }
};

struct HierarchyOptions {
  SeesawOptions seesaw;
  bool coherent_ancilla_column = false;  // adds the single-order fairness control
};

/// Sweeps the three optimized costs over the energy grid for the paper's
/// hierarchy channels. Estimator phases continue from the previous grid
/// point, so the sweep runs sequentially.
std::vector<HierarchyRow> hierarchy_experiment(const std::vector<double>& e_grid,
                                               const HierarchyOptions& opts = {});

struct BatterySeparation {
  double e_loc_c1 = 0.0;  // sqrt(2)
  double e_gl_c1 = 0.0;   // sqrt(2)/2
  double e_ind_c2 = 0.0;  // sqrt(2)/2
  double e_sh_c2 = 0.0;   // sqrt(2)/4
};

/// Audited constants of the controlled-Hadamard comb C1 and the superposed
/// Hadamard-or-identity process C2.
BatterySeparation battery_separation_examples();

/// The two-step comb steered by a control qubit: Hadamard at step 1 when the
/// control reads |0>, at step 2 when it reads |1>.
Comb controlled_hadamard_comb();

struct IndVsSharedRow {
  double energy = 0.0;
  double cost_individual = 0.0;
  double cost_shared = 0.0;
  bool solved = true;
  std::string note;
};

/// Uniform two-order superposition with individual vs shared global
/// batteries, on the ind-vs-shared channel pair.
std::vector<IndVsSharedRow> ind_vs_shared_experiment(const std::vector<double>& e_grid,
                                                     const SeesawOptions& opts = {});

}  // namespace combenergy
