// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combenergy/metrology.hpp"

namespace combenergy {

/// Entrywise derivative of the phase-channel Choi: i (j - k) e^{i (j - k) theta}
/// on the |jj><kk| support, as a matrix on (s1, s2).
Matrix phase_choi_derivative(int d, double theta);

struct FisherPoint {
  double p0 = 0.0;
  double slope = 0.0;   // best |d p(0|theta) / d theta| over the two branches
  int branch = +1;      // sign of the winning subproblem
  double fisher = 0.0;
  bool feasible = false;
  std::string note;
};

struct FisherResult {
  double energy = 0.0;
  double best_fisher = 0.0;
  double p0_star = 0.0;
  int branch = +1;
  std::vector<FisherPoint> curve;
  std::vector<Matrix> best_instrument;  // T_0, T_1 at the winning point
};

std::vector<double> default_p0_grid();  // 0.01 .. 0.99, 99 points

/// Classical Fisher information of the qubit phase channel at theta, maximized
/// over E-globally constrained probes by scanning p0 and solving the paired
/// slope SDPs. Infeasible grid points are skipped and recorded. At E = 0 the
/// only feasible probe is the ground state, which pins the outcome; the whole
/// grid is recorded as infeasible and F = 0.
FisherResult fisher_optimize(double energy, double theta = M_PI,
                             const std::vector<double>& p0_grid = default_p0_grid(),
                             double solver_tol = 1e-7);

/// Analytic Gaussian-prior task operator for the d-dimensional phase family,
/// via the characteristic function of the (unwrapped) normal prior.
LabeledOperator gaussian_task_operator(int d, double mu, double sigma);

/// Narrow-prior Bayesian estimation for the qubit phase channel: see-saw with
/// free estimator phases against the Gaussian task operator. At E = 0 the
/// cost equals 2 - 2 e^{-sigma^2 / 2}.
StrategyResult narrow_prior_strategy(double energy, double mu = M_PI, double sigma = 0.5,
                                     const SeesawOptions& opts = {});
double narrow_prior_cost(double energy, double mu = M_PI, double sigma = 0.5);

}  // namespace combenergy
