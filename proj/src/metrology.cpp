// SPDX-License-Identifier: Apache-2.0
#include "combenergy/metrology.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace combenergy {

Prior Prior::gaussian(double mu, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("Prior::gaussian: sigma must be positive");
  Prior p;
  p.kind = Kind::gaussian;
  p.mu = mu;
  p.sigma = sigma;
  return p;
}

Prior Prior::delta(double theta0) {
  Prior p;
  p.kind = Kind::delta;
  p.theta0 = theta0;
  return p;
}

namespace {

LabeledOperator weighted_transpose_average(const ParamFamily& fam, int k) {
  // trapezoid quadrature of e^{-i theta} C_theta^T p(theta)
  LabeledOperator first = fam.generator(fam.prior.kind == Prior::Kind::gaussian
                                            ? fam.prior.mu - 8.0 * fam.prior.sigma
                                            : 0.0);
  std::vector<std::string> all = label_ids(first.labels);
  Matrix acc = Matrix::Zero(first.dim(), first.dim());

  if (fam.prior.kind == Prior::Kind::uniform) {
    // periodic integrand: plain Riemann sum is the trapezoid rule here
    for (int i = 0; i < k; ++i) {
      double theta = 2.0 * M_PI * i / k;
      LabeledOperator c = fam.generator(theta);
      acc += std::polar(1.0 / k, -theta) * partial_transpose(c, all).matrix;
    }
  } else {
    double lo = fam.prior.mu - 8.0 * fam.prior.sigma, hi = fam.prior.mu + 8.0 * fam.prior.sigma;
    double h = (hi - lo) / (k - 1);
    const double norm = 1.0 / (fam.prior.sigma * std::sqrt(2.0 * M_PI));
    for (int i = 0; i < k; ++i) {
      double theta = lo + h * i;
      double w = norm * std::exp(-0.5 * std::pow((theta - fam.prior.mu) / fam.prior.sigma, 2.0));
      if (i == 0 || i == k - 1) w *= 0.5;
      LabeledOperator c = fam.generator(theta);
      acc += std::polar(w * h, -theta) * partial_transpose(c, all).matrix;
    }
  }
  return LabeledOperator(first.labels, std::move(acc));
}

}  // namespace

TaskOperator task_operator(const ParamFamily& fam, int quadrature_points) {
  if (fam.prior.kind == Prior::Kind::delta) {
    LabeledOperator c = fam.generator(fam.prior.theta0);
    LabeledOperator ct = partial_transpose(c, label_ids(c.labels));
    ct.matrix *= std::polar(1.0, -fam.prior.theta0);
    return {std::move(ct)};
  }

  if (fam.prior.kind == Prior::Kind::uniform && fam.phase_dimension) {
    // Fourier selection: J = sum_j |j-1, j-1><j, j|
    const int d = *fam.phase_dimension;
    LabeledOperator sample = fam.generator(0.0);
    Matrix j = Matrix::Zero(d * d, d * d);
    for (int n = 1; n < d; ++n) j((n - 1) * d + (n - 1), n * d + n) = 1.0;
    return {LabeledOperator(sample.labels, std::move(j))};
  }

  int k = quadrature_points;
  LabeledOperator current = weighted_transpose_average(fam, k);
  for (int round = 0; round < 6; ++round) {
    LabeledOperator refined = weighted_transpose_average(fam, 2 * k);
    double delta = max_abs(refined.matrix - current.matrix);
    current = std::move(refined);
    k *= 2;
    if (delta <= 1e-8) return {std::move(current)};
  }
  throw std::runtime_error("task_operator: quadrature did not converge");
}

CostEstimate average_cost(const std::vector<Matrix>& instrument, const TaskOperator& j) {
  CostEstimate est;
  double total = 0.0;
  for (const Matrix& t : instrument) {
    if (lambda_min(t) < -1e-9) throw std::invalid_argument("average_cost: element not PSD");
    Complex z = (t * j.op.matrix).trace();
    est.traces.push_back(z);
    double phase = std::abs(z) < 1e-15 ? 0.0 : -std::arg(z);
    if (phase < 0) phase += 2.0 * M_PI;
    est.estimator.push_back(phase);
    total += std::abs(z);
  }
  est.cost = 2.0 - 2.0 * total;
  return est;
}

double outcome_sum_check(const std::vector<Matrix>& instrument, const TaskOperator& j) {
  Complex sum(0, 0);
  for (const Matrix& t : instrument) sum += (t * j.op.matrix).trace();
  return std::abs(sum);
}

StrategyResult seesaw(const ProbeStructure& structure, const TaskOperator& j, BatteryModel battery,
                      double energy, const SeesawOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("seesaw: restarts must be >= 1");
  const int n_out = structure.n_outcomes();

  StrategyResult best;
  double best_objective = -std::numeric_limits<double>::infinity();
  int total_solves = 0;

  for (int restart = 0; restart < opts.restarts; ++restart) {
    std::vector<double> phases(n_out);
    if (restart == 0) {
      if (opts.initial_phases) {
        if (static_cast<int>(opts.initial_phases->size()) != n_out)
          throw std::invalid_argument("seesaw: initial phase count mismatch");
        phases = *opts.initial_phases;
      } else {
        for (int x = 0; x < n_out; ++x) phases[x] = 2.0 * M_PI * x / n_out;
      }
    } else {
      std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ull * restart);
      std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
      for (double& ph : phases) ph = u(rng);
    }

    double objective = -std::numeric_limits<double>::infinity();
    std::vector<Matrix> instrument;
    SolveReport last;
    for (int it = 0; it < opts.max_iterations; ++it) {
      ProbeProgram prog = build_probe_program(structure, j.op, battery, energy, phases);
      SolveReport rep = solve(prog.problem, opts.solver_tol);
      ++total_solves;
      if (rep.status != SolveStatus::optimal)
        throw std::runtime_error("seesaw: solver failed (" + to_string(rep.status) +
                                 ") at restart " + std::to_string(restart) + ", iteration " +
                                 std::to_string(it));
      instrument = extract_instrument(prog, rep);
      last = std::move(rep);

      // phase update; the refreshed objective can only move up
      double updated = 0.0;
      bool changed = false;
      for (int x = 0; x < n_out; ++x) {
        Complex z = (instrument[x] * j.op.matrix).trace();
        updated += std::abs(z);
        double ph = std::abs(z) < 1e-15 ? 0.0 : -std::arg(z);
        if (ph < 0) ph += 2.0 * M_PI;
        if (std::abs(ph - phases[x]) > 1e-12) changed = true;
        phases[x] = ph;
      }
      double gain = updated - objective;
      objective = updated;
      if (!changed || gain < opts.improvement_tol) break;
    }

    if (objective > best_objective) {
      best_objective = objective;
      best.cost = 2.0 - 2.0 * objective;
      best.instrument = instrument;
      best.solved = last;
      best.restart_index = restart;
      CostEstimate est = average_cost(instrument, j);
      best.estimator = est.estimator;
    }
  }

  best.total_solves = total_solves;
  best.audit = energy_audit(assemble_probe_comb(structure, best.instrument));
  return best;
}

}  // namespace combenergy
