#include <cmath>

#include "combenergy/phase.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace combenergy;

TEST_CASE("phase channel choi") {
  LabeledOperator c0 = phase_choi(3, 0.0);
  CVector om = omega_vector(3);
  CHECK(max_abs(c0.matrix - om * om.adjoint()) < 1e-14);

  for (double theta : {0.0, 0.7, 2.4}) {
    Comb comb{phase_choi(2, theta), {{"s1", "s2"}}};
    CHECK(validate_comb(comb, 1e-10).valid);
    CHECK(std::abs(energy_global(comb)) < 1e-12);
    CHECK(std::abs(energy_local(comb)) < 1e-12);
  }

  // covariance: composing phases adds the angles
  Comb a{phase_choi(3, 0.4), {{"s1", "s2"}}};
  Comb b{phase_choi(3, 1.1), {{"s1", "s2"}}};
  Comb ab = compose(a, b);
  CHECK(max_abs(ab.op.canonical().matrix - phase_choi(3, 1.5).canonical().matrix) < 1e-12);

  CHECK_THROWS_AS(phase_choi(1, 0.0), std::invalid_argument);
}

TEST_CASE("qubit closed form") {
  CHECK(qubit_cost_closed_form(0.0) == doctest::Approx(2.0));
  CHECK(qubit_cost_closed_form(0.75) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(qubit_cost_closed_form(0.9) == doctest::Approx(1.0));
  CHECK(qubit_cost_closed_form(0.5) == doctest::Approx(1.1715729).epsilon(1e-6));
  // continuity at the knee
  CHECK(qubit_cost_closed_form(0.75 - 1e-9) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(qubit_cost_closed_form(-0.1), std::invalid_argument);
}

TEST_CASE("explicit qubit instrument feasibility and energy pattern") {
  ProbeStructure st = ProbeStructure::single_channel(2);
  Matrix h = test_util::pauli_z();  // placeholder, unused
  (void)h;
  for (double e : {0.0, 0.1, 0.4, 0.75}) {
    QubitInstrument q = qubit_optimal_instrument(e);
    Comb probe = assemble_probe_comb(st, {q.t0, q.t1});
    auto rep = validate_comb(probe, 1e-9);
    CHECK(rep.valid);

    // T^{(1)} matches the level reduction of the assembled comb
    LabeledOperator lvl = partial_trace(probe.op, {"s3"});
    lvl = partial_trace(lvl, {"s2"});
    lvl.matrix /= 2.0;
    CHECK(max_abs(lvl.matrix - q.t_level) < 1e-12);

    // energy pattern: Tr[H T^{(1)}] = kappa, E_gl = E exactly (E > 0)
    Matrix hq = SpaceLabel::number("h", 2).hamiltonian;
    CHECK((hq * q.t_level).trace().real() == doctest::Approx(q.kappa).epsilon(1e-12));
    EnergyAudit audit = energy_audit(probe);
    CHECK(audit.e_global <= e + 1e-12);
    if (e > 0) CHECK(audit.e_global == doctest::Approx(e).epsilon(1e-9));

    // cost reproduces the closed form through the generic machinery
    TaskOperator j = task_operator(PhaseChannelFamily(2).family());
    CHECK(average_cost({q.t0, q.t1}, j).cost ==
          doctest::Approx(qubit_cost_closed_form(e)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(qubit_optimal_instrument(0.76), std::invalid_argument);
}

TEST_CASE("sine probe strategy") {
  TaskOperator j4 = task_operator(PhaseChannelFamily(4).family());
  SineStrategy s4 = sine_probe_strategy(4);
  CHECK(s4.point.cost == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s4.point.probe_energy == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s4.point.measurement_energy <= 3.0 + 1e-9);
  CHECK(average_cost(s4.instrument, j4).cost == doctest::Approx(s4.point.cost).epsilon(1e-9));

  // d = 2: the sine state is |1>, no interference
  SineStrategy s2 = sine_probe_strategy(2);
  CHECK(s2.point.cost == doctest::Approx(2.0).epsilon(1e-12));
  TaskOperator j2 = task_operator(PhaseChannelFamily(2).family());
  CHECK(average_cost(s2.instrument, j2).cost == doctest::Approx(2.0).epsilon(1e-9));

  for (int d : {2, 3, 4, 5, 6}) {
    SineStrategy s = sine_probe_strategy(d);
    TaskOperator j = task_operator(PhaseChannelFamily(d).family());
    CHECK(average_cost(s.instrument, j).cost ==
          doctest::Approx(2.0 - 2.0 * std::cos(M_PI / d)).epsilon(1e-9));
    CHECK(s.point.probe_energy == doctest::Approx(d / 2.0).epsilon(1e-9));
    CHECK(s.point.measurement_energy <= d - 1.0 + 1e-9);
    CHECK(s.point.total_energy_bound <= 1.5 * d - 1.0 + 1e-9);

    // for small d, the structured audit agrees with the assembled comb
    if (d <= 4) {
      Comb full = assemble_probe_comb(s.structure, s.instrument);
      CHECK(validate_comb(full, 1e-9).valid);
      CHECK(energy_global(full) == doctest::Approx(s.matched_global_energy).epsilon(1e-9));
    }
  }
}

TEST_CASE("dual lower bound") {
  // gamma = 0 evaluation point of the objective
  for (int d : {2, 4, 9})
    CHECK(lower_bound_objective(1.0, d, 0.0) ==
          doctest::Approx(-2.0 * std::cos(d * M_PI / (d + 1))).epsilon(1e-12));

  // E = 0: the bound saturates at 2
  for (int d : {2, 3, 8}) CHECK(lower_bound(0.0, d) == doctest::Approx(2.0).epsilon(1e-6));

  // the bound never exceeds the exact qubit optimum
  for (double e : {0.1, 0.25, 0.5, 1.0})
    CHECK(lower_bound(e, 2) <= qubit_cost_closed_form(e) + 1e-8);

  // bound value is nonincreasing in E
  double prev = 2.1;
  for (double e : {0.0, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    double v = lower_bound(e, 6);
    CHECK(v <= prev + 1e-10);
    prev = v;
  }
}

TEST_CASE("asymptotic lower bound") {
  CHECK(kAiryScale == doctest::Approx(1.85576).epsilon(1e-5));
  CHECK(asymptotic_lower_bound(9.0) == doctest::Approx(0.018414).epsilon(1e-4));

  // value * E^2 approaches 8 a^3 / 27 for large E
  const double limit = 8.0 * std::pow(kAiryScale, 3.0) / 27.0;
  CHECK(limit == doctest::Approx(1.8937).epsilon(1e-4));
  double e = 1e3;
  CHECK(std::abs(asymptotic_lower_bound(e) * e * e / limit - 1.0) < 0.01);
}
