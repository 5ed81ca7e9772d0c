// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combenergy/metrology.hpp"

namespace combenergy {

/// Diagonal phase channel family |n> -> e^{i n theta} |n> in dimension d on
/// the equal-spaced Hamiltonian H_d = sum n |n><n|.
struct PhaseChannelFamily {
  int d = 2;

  PhaseChannelFamily() = default;
  explicit PhaseChannelFamily(int d_);

  /// Choi of the phase unitary at theta, on labels (in_id, out_id).
  LabeledOperator choi(double theta, const std::string& in_id = "s1",
                       const std::string& out_id = "s2") const;
  ParamFamily family(const Prior& prior = Prior::uniform()) const;
  Matrix hamiltonian() const;
};

LabeledOperator phase_choi(int d, double theta);

/// Optimal average cost of E-globally constrained qubit phase estimation:
/// 2 - 4 (1 - sqrt(1-E)) sqrt(1-E) for E <= 3/4, constant 1 beyond.
double qubit_cost_closed_form(double energy);

struct QubitInstrument {
  Matrix t0, t1;   // on (s1, s2), 4 x 4
  Matrix t_level;  // T^{(1)} = diag(1 - kappa, kappa)
  double kappa = 0.0;
};

/// The explicit optimal instrument for 0 <= E <= 3/4, kappa = 1 - sqrt(1-E).
QubitInstrument qubit_optimal_instrument(double energy);

struct ScalingPoint {
  int d = 2;
  double cost = 0.0;
  double probe_energy = 0.0;
  double measurement_energy = 0.0;
  double total_energy_bound = 0.0;  // probe + measurement
};

struct SineStrategy {
  ScalingPoint point;
  ProbeStructure structure;
  std::vector<Matrix> instrument;  // T_x on (s1, s2)
  double matched_global_energy = 0.0;  // audited E_gl of the assembled comb
};

/// The sine-state probe sqrt(2/d) sum sin(pi j / d)|j> followed by a Fourier
/// measurement. Cost 2 - 2 cos(pi/d), probe energy d/2, measurement energy
/// at most d - 1; the cost is cross-checked through the generic link-product
/// machinery.
SineStrategy sine_probe_strategy(int d);

/// Dual lower bound 2 - min_{gamma >= 0} [E gamma - lambda_min(H_d gamma + 2 A_d)]
/// on the optimal cost at (E, d); the minimization runs by ternary search on
/// a doubled bracket.
double lower_bound(double energy, int d);

/// Objective E gamma - lambda_min(H_d gamma + 2 A_d) of the bound above.
double lower_bound_objective(double energy, int d, double gamma);

/// First negative Airy root constant a = -a1 / 2^{1/3}.
extern const double kAiryScale;

/// Closed-form d -> infinity bound (E+1) / (((3E+3)/(2a))^3 + (3E+3)/2).
double asymptotic_lower_bound(double energy);

}  // namespace combenergy
