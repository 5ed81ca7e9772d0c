// SPDX-License-Identifier: Apache-2.0
#include "combenergy/local.hpp"

#include <cmath>

#include "combenergy/phase.hpp"

namespace combenergy {

Matrix phase_choi_derivative(int d, double theta) {
  if (d < 2) throw std::invalid_argument("phase_choi_derivative: d must be >= 2");
  Matrix m = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      if (j == k) continue;
      m(static_cast<long>(j) * d + j, static_cast<long>(k) * d + k) =
          Complex(0, j - k) * std::polar(1.0, (j - k) * theta);
    }
  return m;
}

std::vector<double> default_p0_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
  return g;
}

namespace {

SuperOp so_trace_against(const Matrix& m) {
  const long n = m.rows();
  std::vector<Eigen::Triplet<Complex>> t;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (m(i, j) != Complex(0, 0)) t.emplace_back(0, j + n * i, m(i, j));
  SuperOp s(1, n * n);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace

FisherResult fisher_optimize(double energy, double theta, const std::vector<double>& p0_grid,
                             double solver_tol) {
  if (energy < 0) throw std::invalid_argument("fisher_optimize: E must be >= 0");
  FisherResult result;
  result.energy = energy;

  const int d = 2;
  ProbeStructure st = ProbeStructure::single_channel(d);
  Matrix c_theta = phase_choi(d, theta).matrix;
  Matrix dc = phase_choi_derivative(d, theta);
  LabeledOperator placeholder = phase_choi(d, theta);
  bool have_best = false;

  for (double p0 : p0_grid) {
    FisherPoint point;
    point.p0 = p0;
    if (energy == 0.0) {
      // zero budget pins the probe to the ground state; the phase channel
      // leaves it untouched and the global constraint forbids raising the
      // output, so p(0|theta) = 1 and every interior p0 is infeasible
      point.note = "infeasible: zero budget forces the ground probe";
      result.curve.push_back(std::move(point));
      continue;
    }

    double best_slope = -1.0;
    int best_branch = 0;
    std::vector<Matrix> best_inst;
    bool any = false;
    for (int branch : {+1, -1}) {
      ProbeProgram prog =
          build_probe_program(st, placeholder, BatteryModel::global, energy, {0.0, 0.0});
      prog.problem.objective_terms.clear();
      prog.problem.add_objective(prog.instrument_vars[0],
                                 herm_part(double(branch) * dc.transpose()));
      prog.problem.add_equality(
          expr_of(prog.instrument_vars[0], so_trace_against(c_theta.transpose()), 1),
          Matrix::Constant(1, 1, p0), "outcome probability");
      SolveReport rep = solve(prog.problem, solver_tol);
      if (rep.status != SolveStatus::optimal) continue;
      any = true;
      if (rep.value > best_slope) {
        best_slope = rep.value;
        best_branch = branch;
        best_inst = extract_instrument(prog, rep);
      }
    }
    if (!any) {
      point.note = "infeasible";
      result.curve.push_back(std::move(point));
      continue;
    }
    point.feasible = true;
    point.slope = std::max(best_slope, 0.0);
    point.branch = best_branch;
    point.fisher = point.slope * point.slope * (1.0 / p0 + 1.0 / (1.0 - p0));
    if (!have_best || point.fisher > result.best_fisher + 1e-15) {
      have_best = true;
      result.best_fisher = point.fisher;
      result.p0_star = p0;
      result.branch = best_branch;
      result.best_instrument = best_inst;
    }
    result.curve.push_back(std::move(point));
  }
  return result;
}

LabeledOperator gaussian_task_operator(int d, double mu, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("gaussian_task_operator: sigma must be positive");
  // J[(jj),(kk)] = E[e^{-i (j - k + 1) theta}] for theta ~ N(mu, sigma)
  Matrix j = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double t = -(a - b + 1.0);
      j(static_cast<long>(a) * d + a, static_cast<long>(b) * d + b) =
          std::polar(std::exp(-0.5 * t * t * sigma * sigma), t * mu);
    }
  return LabeledOperator({SpaceLabel::number("s1", d), SpaceLabel::number("s2", d)}, std::move(j));
}

StrategyResult narrow_prior_strategy(double energy, double mu, double sigma,
                                     const SeesawOptions& opts) {
  TaskOperator j{gaussian_task_operator(2, mu, sigma)};
  return seesaw(ProbeStructure::single_channel(2), j, BatteryModel::global, energy, opts);
}

double narrow_prior_cost(double energy, double mu, double sigma) {
  SeesawOptions opts;
  opts.restarts = 4;
  return narrow_prior_strategy(energy, mu, sigma, opts).cost;
}

}  // namespace combenergy
