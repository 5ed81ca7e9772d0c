// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>

#include "combenergy/programs.hpp"

namespace combenergy {

struct Prior {
  enum class Kind { uniform, gaussian, delta } kind = Kind::uniform;
  double mu = 0.0;
  double sigma = 1.0;
  double theta0 = 0.0;

  static Prior uniform() { return {}; }
  static Prior gaussian(double mu, double sigma);
  static Prior delta(double theta0);
};

/// Parameterized environment process theta -> Choi of C_theta, with a prior.
/// phase_dimension is set for the built-in diagonal phase families, enabling
/// the analytic Fourier route of the task operator.
struct ParamFamily {
  std::function<LabeledOperator(double)> generator;
  Prior prior;
  std::optional<int> phase_dimension;
};

/// J = integral e^{-i theta} C_theta^T p(theta) d theta. Not Hermitian in
/// general. Quadrature doubles its point count until stable; throws on
/// non-convergence.
struct TaskOperator {
  LabeledOperator op;
};

TaskOperator task_operator(const ParamFamily& fam, int quadrature_points = 512);

struct CostEstimate {
  double cost = 0.0;
  std::vector<double> estimator;      // theta_hat per outcome, in [0, 2 pi)
  std::vector<Complex> traces;        // Tr[T_x J]
};

/// Optimal-estimator average Holevo cost of an instrument against a task
/// operator: cost = 2 - 2 sum_x |Tr[T_x J]|, theta_hat(x) = -arg Tr[T_x J]
/// (arg(0) resolves to 0).
CostEstimate average_cost(const std::vector<Matrix>& instrument, const TaskOperator& j);

/// |sum_x Tr[T_x J]|; vanishes for uniform priors.
double outcome_sum_check(const std::vector<Matrix>& instrument, const TaskOperator& j);

struct StrategyResult {
  double cost = 0.0;
  std::vector<Matrix> instrument;
  std::vector<double> estimator;
  EnergyAudit audit;
  SolveReport solved;
  int restart_index = 0;
  int total_solves = 0;
};

struct SeesawOptions {
  int restarts = 8;
  int max_iterations = 50;
  double improvement_tol = 1e-8;
  double solver_tol = 1e-7;
  std::uint64_t seed = 0x5eed;
  std::optional<std::vector<double>> initial_phases;  // used by restart 0
};

/// Alternates the instrument SDP at fixed estimator phases with the phase
/// update theta_hat(x) = -arg Tr[T_x J]. The objective is nondecreasing
/// across iterations; the best restart wins. Restart 0 starts from
/// phases 2 pi x / n unless initial_phases is given; later restarts draw
/// phases uniformly from the seeded generator.
StrategyResult seesaw(const ProbeStructure& structure, const TaskOperator& j, BatteryModel battery,
                      double energy, const SeesawOptions& opts = {});

}  // namespace combenergy
