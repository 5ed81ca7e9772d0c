#include <cmath>

#include "combenergy/metrology.hpp"
#include "combenergy/phase.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace combenergy;

TEST_CASE("task operator for phase families") {
  // qubit, uniform prior: J = |0><1| (x) |0><1|
  TaskOperator j2 = task_operator(PhaseChannelFamily(2).family());
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 3) = 1.0;
  CHECK(max_abs(j2.op.matrix - expect) < 1e-14);

  // d-dimensional: sum_j |j-1,j-1><j,j|
  for (int d : {3, 5}) {
    TaskOperator jd = task_operator(PhaseChannelFamily(d).family());
    Matrix m = Matrix::Zero(d * d, d * d);
    for (int n = 1; n < d; ++n) m((n - 1) * d + (n - 1), n * d + n) = 1.0;
    CHECK(max_abs(jd.op.matrix - m) < 1e-14);

    // quadrature route agrees with the Fourier selection
    ParamFamily fam = PhaseChannelFamily(d).family();
    fam.phase_dimension.reset();
    TaskOperator jq = task_operator(fam, 64);
    CHECK(max_abs(jq.op.matrix - m) < 1e-10);
  }

  // a theta-independent family averages to zero
  ParamFamily constant;
  constant.generator = [](double) { return phase_choi(2, 0.0); };
  constant.prior = Prior::uniform();
  CHECK(max_abs(task_operator(constant, 32).op.matrix) < 1e-12);

  // contraction property of J for normalized priors: no instrument can pull
  // sum_x |Tr[T_x J]| above 1, so costs stay nonnegative
  TaskOperator jg = task_operator(PhaseChannelFamily(2).family(Prior::gaussian(M_PI, 0.5)));
  QubitInstrument q = qubit_optimal_instrument(0.6);
  double pulled = std::abs((q.t0 * jg.op.matrix).trace()) + std::abs((q.t1 * jg.op.matrix).trace());
  CHECK(pulled <= 1.0 + 1e-9);
  CHECK(average_cost({q.t0, q.t1}, jg).cost >= -1e-9);
}

TEST_CASE("average cost against the explicit qubit instrument") {
  TaskOperator j = task_operator(PhaseChannelFamily(2).family());

  // probe stuck in the ground state captures no phase
  Matrix ground0 = Matrix::Zero(4, 4);
  ground0(0, 0) = 1.0;
  Matrix ground1 = Matrix::Zero(4, 4);
  ground1(1, 1) = 1.0;
  CostEstimate blind = average_cost({ground0, ground1}, j);
  CHECK(blind.cost == doctest::Approx(2.0).epsilon(1e-12));

  // optimal instrument at E = 3/4 reaches cost 1 with estimator {0, pi}
  QubitInstrument q = qubit_optimal_instrument(0.75);
  CostEstimate opt = average_cost({q.t0, q.t1}, j);
  CHECK(opt.cost == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(opt.estimator[0] == doctest::Approx(0.0));
  CHECK(opt.estimator[1] == doctest::Approx(M_PI));
  CHECK(outcome_sum_check({q.t0, q.t1}, j) < 1e-12);

  // kappa instrument at E = 0.5
  QubitInstrument q5 = qubit_optimal_instrument(0.5);
  CHECK(average_cost({q5.t0, q5.t1}, j).cost == doctest::Approx(1.1715729).epsilon(1e-6));
}

TEST_CASE("probe program reproduces the qubit optimum") {
  TaskOperator j = task_operator(PhaseChannelFamily(2).family());
  ProbeStructure st = ProbeStructure::single_channel(2);
  std::vector<double> phases = {0.0, M_PI};

  for (double e : {0.75, 0.5, 0.2}) {
    ProbeProgram prog = build_probe_program(st, j.op, BatteryModel::global, e, phases);
    SolveReport rep = solve(prog.problem, 1e-8);
    REQUIRE(rep.status == SolveStatus::optimal);
    double cost = 2.0 - 2.0 * rep.value;
    CHECK(cost == doctest::Approx(qubit_cost_closed_form(e)).epsilon(1e-6));
    CHECK(certify(rep, prog.problem, 1e-8).ok);
  }

  // zero budget: only the ground-state probe is feasible, cost 2
  ProbeProgram prog0 = build_probe_program(st, j.op, BatteryModel::global, 0.0, phases);
  SolveReport rep0 = solve(prog0.problem, 1e-8);
  REQUIRE(rep0.status == SolveStatus::optimal);
  CHECK(2.0 - 2.0 * rep0.value == doctest::Approx(2.0).epsilon(1e-6));

  // single-step coincidence: local battery matches global for N = 2 at these budgets
  ProbeProgram plocal = build_probe_program(st, j.op, BatteryModel::local, 0.5, phases);
  SolveReport rloc = solve(plocal.problem, 1e-8);
  REQUIRE(rloc.status == SolveStatus::optimal);
  CHECK(rloc.value <= rep0.value + 1.0);  // sanity: bounded

  CHECK_THROWS_AS(build_probe_program(st, j.op, BatteryModel::global, -0.1, phases),
                  std::invalid_argument);
}

TEST_CASE("seesaw matches the closed form for the qubit") {
  TaskOperator j = task_operator(PhaseChannelFamily(2).family());
  ProbeStructure st = ProbeStructure::single_channel(2);
  SeesawOptions opts;
  opts.restarts = 3;
  opts.solver_tol = 1e-8;

  for (double e : {0.0, 0.3, 0.75, 1.2}) {
    StrategyResult res = seesaw(st, j, BatteryModel::global, e, opts);
    CHECK(res.cost == doctest::Approx(qubit_cost_closed_form(e)).epsilon(2e-6));
    CHECK(res.audit.e_global <= e + 1e-6);
  }

  // determinism with a fixed seed
  StrategyResult a = seesaw(st, j, BatteryModel::global, 0.4, opts);
  StrategyResult b = seesaw(st, j, BatteryModel::global, 0.4, opts);
  CHECK(a.cost == b.cost);
  CHECK(max_abs(a.instrument[0] - b.instrument[0]) == 0.0);

  // outcome sum vanishes for the uniform prior at the optimum
  CHECK(outcome_sum_check(a.instrument, j) < 1e-6);
}

TEST_CASE("monotonicity and battery ordering on a small grid") {
  TaskOperator j = task_operator(PhaseChannelFamily(2).family());
  ProbeStructure st = ProbeStructure::single_channel(2);
  SeesawOptions opts;
  opts.restarts = 1;

  double prev_g = 3.0, prev_l = 3.0;
  for (double e : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double cg = seesaw(st, j, BatteryModel::global, e, opts).cost;
    double cl = seesaw(st, j, BatteryModel::local, e, opts).cost;
    CHECK(cg <= prev_g + 1e-7);
    CHECK(cl <= prev_l + 1e-7);
    CHECK(cg <= cl + 1e-7);
    prev_g = cg;
    prev_l = cl;
  }
}

TEST_CASE("free phases do not beat fixed {0, pi} for the covariant qubit") {
  TaskOperator j = task_operator(PhaseChannelFamily(2).family());
  ProbeStructure st = ProbeStructure::single_channel(2);
  SeesawOptions free_opts;
  free_opts.restarts = 4;
  SeesawOptions fixed_opts;
  fixed_opts.restarts = 1;
  fixed_opts.initial_phases = std::vector<double>{0.0, M_PI};
  fixed_opts.max_iterations = 1;

  for (double e : {0.15, 0.6}) {
    double free_cost = seesaw(st, j, BatteryModel::global, e, free_opts).cost;
    double fixed_cost = seesaw(st, j, BatteryModel::global, e, fixed_opts).cost;
    CHECK(std::abs(free_cost - fixed_cost) < 1e-6);
  }
}
