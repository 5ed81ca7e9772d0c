#include <cmath>

#include "combenergy/ico.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace combenergy;

TEST_CASE("battery separation constants") {
  BatterySeparation sep = battery_separation_examples();
  CHECK(sep.e_loc_c1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(sep.e_gl_c1 == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  CHECK(sep.e_ind_c2 == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  CHECK(sep.e_sh_c2 == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-9));

  // replacing the Hadamard by the identity in both branches kills every cost
  CVector om = omega_vector(2);
  SpaceLabel i2 = SpaceLabel::number("i", 2), o2 = SpaceLabel::number("o", 2);
  Comb ident{LabeledOperator({i2, o2}, om * om.adjoint()), {{"i", "o"}}};
  CHECK(std::abs(energy_global(ident)) < 1e-12);
  CHECK(std::abs(energy_local(ident)) < 1e-12);
}

TEST_CASE("controlled hadamard comb is a valid two-step comb") {
  Comb c1 = controlled_hadamard_comb();
  auto rep = validate_comb(c1, 1e-9);
  CHECK(rep.valid);
  CHECK(c1.input_dim_product() == 8);  // (control (x) qubit) and the step-2 qubit

  // audit invariance under unitaries on the degenerate control factor
  std::mt19937_64 rng(3);
  Matrix u = random_isometry(rng, 2, 2);
  Matrix big = kron(u, Matrix::Identity(2, 2));
  LabeledOperator rotated = c1.op;
  int pos = rotated.index_of("a0");
  Matrix rot = embed_with_identity(
                   LabeledOperator({rotated.labels[pos]}, big), rotated.labels)
                   .matrix;
  rotated.matrix = rot * rotated.matrix * rot.adjoint();
  Comb c1rot{rotated, c1.steps};
  EnergyAudit a = energy_audit(c1), b = energy_audit(c1rot);
  CHECK(a.e_global == doctest::Approx(b.e_global).epsilon(1e-9));
  CHECK(a.e_local == doctest::Approx(b.e_local).epsilon(1e-9));
}

TEST_CASE("hierarchy channels and task operator") {
  TwoChannelFamily fam = TwoChannelFamily::hierarchy_example();
  // each slot is trace preserving at every theta
  for (double theta : {0.0, 1.1, 4.0}) {
    LabeledOperator joint = fam.joint_choi(theta);
    LabeledOperator red = partial_trace(joint, {"s2", "s4"});
    CHECK(max_abs(red.matrix - Matrix::Identity(4, 4)) < 1e-12);
  }
  TaskOperator j = fam.task_operator(128);
  CHECK(j.op.dim() == 16);
  // theta-averaged against e^{-i theta}: the theta-free bit-flip part drops out
  CHECK(max_abs(j.op.matrix) > 1e-3);
}

TEST_CASE("superposition program at zero and generous budgets") {
  TwoChannelFamily fam = TwoChannelFamily::hierarchy_example();
  TaskOperator j = fam.task_operator(128);

  ProbeStructure def_st;
  for (int k = 1; k <= 5; ++k) def_st.spaces.push_back(SpaceLabel::number("s" + std::to_string(k), 2));
  SeesawOptions fast;
  fast.restarts = 1;
  fast.max_iterations = 8;

  // at E = 0 every strategy collapses to cost 2
  SupOptions sup_opts;
  SupStrategyResult s0 = sup_seesaw(j.op, 0.0, sup_opts, fast);
  CHECK(s0.cost == doctest::Approx(2.0).epsilon(1e-5));
  StrategyResult d0 = seesaw(def_st, j, BatteryModel::global, 0.0, fast);
  CHECK(d0.cost == doctest::Approx(2.0).epsilon(1e-5));

  // ordering at an intermediate budget
  double e = 0.6;
  SupStrategyResult sup = sup_seesaw(j.op, e, sup_opts, fast);
  StrategyResult def_gl = seesaw(def_st, j, BatteryModel::global, e, fast);
  StrategyResult def_loc = seesaw(def_st, j, BatteryModel::local, e, fast);
  CHECK(sup.cost <= def_gl.cost + 1e-6);
  CHECK(def_gl.cost <= def_loc.cost + 1e-6);
  CHECK(sup.cost <= 2.0 + 1e-9);
  CHECK(std::abs(sup.branch_weights[0] + sup.branch_weights[1] - 1.0) < 1e-6);

  // single-order ensemble reproduces the definite-order value
  SupOptions single;
  single.fixed_branch_weights = {{1.0, 0.0}};
  SupStrategyResult fair = sup_seesaw(j.op, e, single, fast);
  CHECK(fair.cost == doctest::Approx(def_gl.cost).epsilon(5e-5));
}

TEST_CASE("individual versus shared battery ordering") {
  std::vector<IndVsSharedRow> rows = ind_vs_shared_experiment({0.0, 0.5});
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    REQUIRE(row.solved);
    CHECK(row.cost_shared <= row.cost_individual + 1e-6);
  }
  CHECK(rows[0].cost_individual == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(rows[0].cost_shared == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(rows[1].cost_shared <= rows[0].cost_shared + 1e-7);
}
