// SPDX-License-Identifier: Apache-2.0
#include "combenergy/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace combenergy {

PhaseChannelFamily::PhaseChannelFamily(int d_) : d(d_) {
  if (d < 2) throw std::invalid_argument("PhaseChannelFamily: d must be >= 2");
}

LabeledOperator PhaseChannelFamily::choi(double theta, const std::string& in_id,
                                         const std::string& out_id) const {
  Matrix c = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      c(static_cast<long>(j) * d + j, static_cast<long>(k) * d + k) = std::polar(1.0, (j - k) * theta);
  return LabeledOperator({SpaceLabel::number(in_id, d), SpaceLabel::number(out_id, d)}, std::move(c));
}

ParamFamily PhaseChannelFamily::family(const Prior& prior) const {
  ParamFamily fam;
  int dim = d;
  fam.generator = [dim](double theta) { return PhaseChannelFamily(dim).choi(theta); };
  fam.prior = prior;
  fam.phase_dimension = d;
  return fam;
}

Matrix PhaseChannelFamily::hamiltonian() const { return SpaceLabel::number("h", d).hamiltonian; }

LabeledOperator phase_choi(int d, double theta) { return PhaseChannelFamily(d).choi(theta); }

double qubit_cost_closed_form(double energy) {
  if (energy < 0) throw std::invalid_argument("qubit_cost_closed_form: E must be >= 0");
  if (energy > 0.75) return 1.0;
  double w = std::sqrt(1.0 - energy);
  return 2.0 - 4.0 * (1.0 - w) * w;
}

QubitInstrument qubit_optimal_instrument(double energy) {
  if (energy < 0 || energy > 0.75)
    throw std::invalid_argument("qubit_optimal_instrument: E must lie in [0, 3/4]");
  const double kappa = 1.0 - std::sqrt(1.0 - energy);
  QubitInstrument q;
  q.kappa = kappa;
  q.t0 = Matrix::Zero(4, 4);
  q.t1 = Matrix::Zero(4, 4);
  // basis |ik> with i on s1, k on s2
  q.t0(0, 0) = (1 - kappa) * (1 - kappa);
  q.t0(0, 3) = kappa * (1 - kappa);
  q.t0(3, 0) = kappa * (1 - kappa);
  q.t0(3, 3) = kappa * kappa;
  q.t0(2, 2) = kappa;
  q.t1(0, 0) = kappa * (1 - kappa);
  q.t1(0, 3) = -kappa * (1 - kappa);
  q.t1(3, 0) = -kappa * (1 - kappa);
  q.t1(3, 3) = kappa * (1 - kappa);
  q.t1(1, 1) = 1 - kappa;
  q.t_level = Matrix::Zero(2, 2);
  q.t_level(0, 0) = 1 - kappa;
  q.t_level(1, 1) = kappa;
  return q;
}

SineStrategy sine_probe_strategy(int d) {
  if (d < 2) throw std::invalid_argument("sine_probe_strategy: d must be >= 2");
  SineStrategy out;
  out.structure = ProbeStructure::single_channel(d);
  out.point.d = d;
  out.point.cost = 2.0 - 2.0 * std::cos(M_PI / d);

  CVector psi(d);
  for (int j = 0; j < d; ++j) psi(j) = std::sqrt(2.0 / d) * std::sin(M_PI * j / d);
  Matrix probe = psi * psi.adjoint();
  Matrix hd = SpaceLabel::number("h", d).hamiltonian;
  out.point.probe_energy = (hd * probe).trace().real();

  // Fourier-measurement comb (I (x) F)|Omega><Omega|(I (x) F^dag) on (s2, s3)
  Matrix f = fourier_matrix(d);
  CVector om = omega_vector(d);
  Matrix meas = kron(Matrix::Identity(d, d), f) * (om * om.adjoint()) *
                kron(Matrix::Identity(d, d), f).adjoint();
  LabeledOperator meas_op({SpaceLabel::number("s2", d), SpaceLabel::number("s3", d)}, meas);
  Comb meas_comb{meas_op, {{"s2", "s3"}}};
  out.point.measurement_energy = energy_global(meas_comb);
  out.point.total_energy_bound = out.point.probe_energy + out.point.measurement_energy;

  // instrument elements T_x = probe (x) m_x with m_x = (I (x) <x|F)|Omega><Omega|(F^dag|x> (x) I)
  Matrix m2 = Matrix::Zero(d, d);
  for (int x = 0; x < d; ++x) {
    Matrix mx(d, d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) mx(j, k) = f(x, j) * std::conj(f(x, k));
    m2 += double(x) * mx;
    out.instrument.push_back(kron(probe, mx));
  }

  // global audit without assembling the d^3 comb: the prefix operators are
  //   O_1 = (d/2) I,   O_2 = (d/2) I + sum_x x m_x - H^T
  out.matched_global_energy =
      std::max(out.point.probe_energy,
               lambda_max(Matrix(out.point.probe_energy * Matrix::Identity(d, d) + m2 -
                                 hd.transpose())));
  return out;
}

double lower_bound_objective(double energy, int d, double gamma) {
  Matrix m = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = gamma * n;
  for (int n = 0; n + 1 < d; ++n) {
    m(n, n + 1) += 1.0;
    m(n + 1, n) += 1.0;
  }
  return energy * gamma - lambda_min(m);
}

double lower_bound(double energy, int d) {
  if (energy < 0 || d < 2) throw std::invalid_argument("lower_bound: need E >= 0, d >= 2");
  auto f = [&](double g) { return lower_bound_objective(energy, d, g); };

  // bracket: double gamma_max until the marginal decrease dies out
  double gmax = 1.0;
  double f_cur = f(gmax);
  for (int it = 0; it < 120; ++it) {
    double f_next = f(2.0 * gmax);
    gmax *= 2.0;
    if (f_cur - f_next < 1e-10) break;
    f_cur = f_next;
  }

  // ternary search on the convex objective
  double lo = 0.0, hi = gmax;
  for (int it = 0; it < 300 && hi - lo > 1e-10; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  double g = 0.5 * (lo + hi);
  double val = std::min({f(g), f(lo), f(hi), f(0.0)});
  return 2.0 - val;
}

const double kAiryScale = 2.33811 / std::pow(2.0, 1.0 / 3.0);  // about 1.85576

double asymptotic_lower_bound(double energy) {
  if (energy < 0) throw std::invalid_argument("asymptotic_lower_bound: E must be >= 0");
  const double a = kAiryScale;
  const double s = 3.0 * energy + 3.0;
  return (energy + 1.0) / (std::pow(s / (2.0 * a), 3.0) + 0.5 * s);
}

}  // namespace combenergy
