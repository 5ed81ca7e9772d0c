// SPDX-License-Identifier: Apache-2.0
#include "combenergy/ico.hpp"

#include <cmath>
#include <random>

#include "combenergy/phase.hpp"

namespace combenergy {

using program_detail::embedded_hamiltonian_sum;
using program_detail::energy_trace_map;
using program_detail::so_scalar_times;

namespace {

// factor positions of one causal order within the (s1, s2, s3, s4) layout
struct BranchLayout {
  int out1, in2, out2, in3;
};
constexpr BranchLayout kOrders[2] = {{0, 1, 2, 3}, {2, 3, 0, 1}};

int rank_of(const std::vector<int>& sorted, int value) {
  for (size_t k = 0; k < sorted.size(); ++k)
    if (sorted[k] == value) return static_cast<int>(k);
  throw std::logic_error("rank_of: value not present");
}

Matrix qubit_h() { return SpaceLabel::number("h", 2).hamiltonian; }

SuperOp so_trace_all(int d) { return so_partial_trace({d}, {0}); }

}  // namespace

SupProgram build_sup_program(const LabeledOperator& j_sup, double energy, const SupOptions& opts,
                             const std::vector<double>& phases) {
  if (energy < 0) throw std::invalid_argument("build_sup_program: E must be >= 0");
  if (phases.size() != 4) throw std::invalid_argument("build_sup_program: four estimator phases");
  if (j_sup.dim() != 16) throw std::invalid_argument("build_sup_program: task operator must live on s1..s4");
  std::vector<std::string> order = {"s1", "s2", "s3", "s4"};
  Matrix j16 = permute_spaces(j_sup, order).matrix;

  const std::vector<int> dims4 = {2, 2, 2, 2};
  const std::vector<int> dims5g = {2, 2, 2, 2, 2};  // s1..s4, oc
  const Matrix h = qubit_h();
  const int n_tau = 2;
  std::array<bool, 2> active = {true, true};
  std::array<double, 2> pfix = {0.0, 0.0};
  const bool fixed_p = opts.fixed_branch_weights.has_value();
  if (fixed_p) {
    pfix = *opts.fixed_branch_weights;
    if (std::abs(pfix[0] + pfix[1] - 1.0) > 1e-12)
      throw std::invalid_argument("build_sup_program: branch weights must sum to 1");
    for (int t = 0; t < n_tau; ++t) active[t] = pfix[t] > 0.0;
  }

  SupProgram prog;
  ConicProblem& p = prog.problem;
  p.maximize = true;

  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      prog.g_vars[x][y] = p.add_var("G" + std::to_string(x) + std::to_string(y), 32,
                                    "instrument element (x, y)");
  for (int t = 0; t < n_tau; ++t) {
    prog.w2_vars[t] = prog.w1_vars[t] = -1;
    for (int x = 0; x < 2; ++x) prog.w_vars[t][x] = -1;
    if (!active[t]) continue;
    for (int x = 0; x < 2; ++x)
      prog.w_vars[t][x] =
          p.add_var("W" + std::to_string(t) + "_" + std::to_string(x), 16, "branch block");
    prog.w2_vars[t] = p.add_var("W2_" + std::to_string(t), 8, "branch level 2");
    prog.w1_vars[t] = p.add_var("W1_" + std::to_string(t), 2, "branch level 1");
  }

  // linking: Tr_oc[G_{x,0} + G_{x,1}] = sum_tau W_{tau,x}
  SuperOp tr_oc = so_partial_trace(dims5g, {4});
  for (int x = 0; x < 2; ++x) {
    MatrixExpr e = expr_of(prog.g_vars[x][0], tr_oc, 16);
    e += expr_of(prog.g_vars[x][1], tr_oc, 16);
    for (int t = 0; t < n_tau; ++t)
      if (active[t])
        e += expr_of(prog.w_vars[t][x], so_scale(Complex(-1, 0), 16), 16);
    p.add_equality(std::move(e), Matrix::Zero(16, 16), "link x=" + std::to_string(x));
  }

  // branch comb levels
  for (int t = 0; t < n_tau; ++t) {
    if (!active[t]) continue;
    const BranchLayout& lay = kOrders[t];
    std::vector<int> w2_positions = {lay.out1, lay.in2, lay.out2};
    std::sort(w2_positions.begin(), w2_positions.end());

    MatrixExpr top = expr_of(prog.w_vars[t][0], so_identity(16), 16);
    top += expr_of(prog.w_vars[t][1], so_identity(16), 16);
    top += expr_of(prog.w2_vars[t], SuperOp(Complex(-1, 0) * so_embed(dims4, w2_positions)), 16);
    p.add_equality(std::move(top), Matrix::Zero(16, 16), "branch top " + std::to_string(t));

    int out2_rank = rank_of(w2_positions, lay.out2);
    std::vector<int> rem_positions;
    for (int q : w2_positions)
      if (q != lay.out2) rem_positions.push_back(q);
    int out1_rank = rank_of(rem_positions, lay.out1);
    MatrixExpr mid = expr_of(prog.w2_vars[t], so_partial_trace({2, 2, 2}, {out2_rank}), 4);
    mid += expr_of(prog.w1_vars[t], SuperOp(Complex(-1, 0) * so_embed({2, 2}, {out1_rank})), 4);
    p.add_equality(std::move(mid), Matrix::Zero(4, 4), "branch mid " + std::to_string(t));
  }

  // branch weights
  if (fixed_p) {
    for (int t = 0; t < n_tau; ++t) {
      if (!active[t]) continue;
      p.add_equality(expr_of(prog.w1_vars[t], so_trace_all(2), 1), Matrix::Constant(1, 1, pfix[t]),
                     "weight " + std::to_string(t));
    }
  } else {
    MatrixExpr total;
    total.dim = 1;
    for (int t = 0; t < n_tau; ++t) total += expr_of(prog.w1_vars[t], so_trace_all(2), 1);
    p.add_equality(std::move(total), Matrix::Constant(1, 1, 1.0), "weights sum");
  }

  const bool local = opts.sub_model == BatteryModel::local;

  if (opts.battery == SupBattery::individual) {
    for (int t = 0; t < n_tau; ++t) {
      if (!active[t]) continue;
      const BranchLayout& lay = kOrders[t];
      std::vector<int> w2_positions = {lay.out1, lay.in2, lay.out2};
      std::sort(w2_positions.begin(), w2_positions.end());
      int out1_r2 = rank_of(w2_positions, lay.out1);
      int out2_r2 = rank_of(w2_positions, lay.out2);
      int in2_r2 = rank_of(w2_positions, lay.in2);

      std::vector<int> rem = {std::min(lay.in2, lay.in3), std::max(lay.in2, lay.in3)};
      int in2_rank = rank_of(rem, lay.in2);
      int in3_rank = rank_of(rem, lay.in3);

      // per-branch budget terms: either E * p_fix (constant) or E * Tr[W1]
      auto budget_term = [&](MatrixExpr& e, int dim_out) {
        if (fixed_p) return energy * pfix[t];
        e += expr_of(prog.w1_vars[t],
                     so_compose(so_scalar_times(Matrix(-energy * Matrix::Identity(dim_out, dim_out))),
                                so_trace_all(2)),
                     dim_out);
        return 0.0;
      };
      // local model: per-step allocations F_{t,n} >= 0 with sum = E p_t
      std::array<int, 3> alloc{-1, -1, -1};
      if (local) {
        MatrixExpr split;
        split.dim = 1;
        for (int n = 0; n < 3; ++n) {
          alloc[n] = p.add_var("F" + std::to_string(t) + std::to_string(n + 1), 1, "branch budget");
          split += expr_of(alloc[n], so_identity(1), 1);
        }
        double rhs = 0.0;
        if (fixed_p)
          rhs = energy * pfix[t];
        else
          split += expr_of(prog.w1_vars[t],
                           so_compose(so_scalar_times(Matrix(-energy * Matrix::Identity(1, 1))),
                                      so_trace_all(2)),
                           1);
        p.add_equality(std::move(split), Matrix::Constant(1, 1, rhs),
                       "branch split " + std::to_string(t));
      }
      auto step_budget = [&](MatrixExpr& e, int n, int dim_out) {
        e += expr_of(alloc[n - 1],
                     so_scalar_times(Matrix(-Matrix::Identity(dim_out, dim_out))), dim_out);
      };

      // n = 1: Tr[H W1] <= budget
      {
        MatrixExpr e = expr_of(prog.w1_vars[t],
                               so_compose(so_trace_all(2), so_left_right(h, Matrix::Identity(2, 2))),
                               1);
        double rhs = 0.0;
        if (local)
          step_budget(e, 1, 1);
        else
          rhs = budget_term(e, 1);
        p.add_psd_upper_bound(std::move(e), Matrix::Constant(1, 1, rhs),
                              "energy 1 branch " + std::to_string(t));
      }
      // n = 2 via W2
      {
        std::vector<std::pair<int, const Matrix*>> hout;
        hout.emplace_back(out2_r2, &h);
        if (!local) hout.emplace_back(out1_r2, &h);
        SuperOp map = energy_trace_map({2, 2, 2}, {std::min(out1_r2, out2_r2), std::max(out1_r2, out2_r2)},
                                       embedded_hamiltonian_sum({2, 2, 2}, hout));
        MatrixExpr e = expr_of(prog.w2_vars[t], std::move(map), 2);
        Matrix rhs = h.transpose();
        (void)in2_r2;
        if (local)
          step_budget(e, 2, 2);
        else
          rhs += budget_term(e, 2) * Matrix::Identity(2, 2);
        p.add_psd_upper_bound(std::move(e), std::move(rhs), "energy 2 branch " + std::to_string(t));
      }
      // n = 3 via the W blocks, with the measured-space weights
      {
        std::vector<std::pair<int, const Matrix*>> hout;
        if (!local) {
          hout.emplace_back(lay.out1, &h);
          hout.emplace_back(lay.out2, &h);
        }
        SuperOp map = energy_trace_map(
            dims4, {std::min(lay.out1, lay.out2), std::max(lay.out1, lay.out2)},
            embedded_hamiltonian_sum(dims4, hout));
        SuperOp weight =
            so_partial_trace(dims4, {std::min(lay.out1, lay.out2), std::max(lay.out1, lay.out2)});
        MatrixExpr e;
        e.dim = 4;
        for (int x = 0; x < 2; ++x) {
          SuperOp total = map;
          if (x > 0) total = SuperOp(total + Complex(double(x), 0) * weight);
          e.terms.push_back({prog.w_vars[t][x], total});
        }
        std::vector<std::pair<int, const Matrix*>> hin;
        Matrix ht = h.transpose();
        hin.emplace_back(in3_rank, &ht);
        if (!local) hin.emplace_back(in2_rank, &ht);
        Matrix rhs = embedded_hamiltonian_sum({2, 2}, hin);
        if (local)
          step_budget(e, 3, 4);
        else
          rhs += budget_term(e, 4) * Matrix::Identity(4, 4);
        p.add_psd_upper_bound(std::move(e), std::move(rhs), "energy 3 branch " + std::to_string(t));
      }
    }
  } else {
    // shared battery: Thm-1 constraints on the weighted mixture of the
    // canonically relabeled branches
    SuperOp perm_sw = so_permute(dims4, {2, 3, 0, 1});
    auto mixture_terms = [&](MatrixExpr& e, const SuperOp& map) {
      for (int t = 0; t < n_tau; ++t) {
        if (!active[t]) continue;
        SuperOp composed = t == 0 ? map : so_compose(map, perm_sw);
        for (int x = 0; x < 2; ++x) e.terms.push_back({prog.w_vars[t][x], composed});
      }
    };
    auto mixture_weighted = [&](MatrixExpr& e, const SuperOp& map, const SuperOp& weight) {
      for (int t = 0; t < n_tau; ++t) {
        if (!active[t]) continue;
        for (int x = 0; x < 2; ++x) {
          SuperOp total = t == 0 ? map : so_compose(map, perm_sw);
          if (x > 0) {
            SuperOp w = t == 0 ? weight : so_compose(weight, perm_sw);
            total = SuperOp(total + Complex(double(x), 0) * w);
          }
          e.terms.push_back({prog.w_vars[t][x], total});
        }
      }
    };

    std::array<int, 3> alloc{-1, -1, -1};
    if (local) {
      MatrixExpr split;
      split.dim = 1;
      for (int n = 0; n < 3; ++n) {
        alloc[n] = p.add_var("e" + std::to_string(n + 1), 1, "shared step budget");
        split += expr_of(alloc[n], so_identity(1), 1);
      }
      p.add_equality(std::move(split), Matrix::Constant(1, 1, energy), "shared split");
    }

    const SuperOp tr_outs = so_partial_trace(dims4, {0, 2});
    const Matrix ht = h.transpose();
    for (int n = 1; n <= 3; ++n) {
      std::vector<std::pair<int, const Matrix*>> hout;
      const int m_lo = local ? n : 1;
      for (int m = m_lo; m <= std::min(n, 2); ++m) hout.emplace_back(2 * (m - 1), &h);
      SuperOp map = energy_trace_map(dims4, {0, 2}, embedded_hamiltonian_sum(dims4, hout));
      MatrixExpr e;
      e.dim = 4;
      if (n == 3)
        mixture_weighted(e, map, tr_outs);
      else
        mixture_terms(e, map);

      std::vector<std::pair<int, const Matrix*>> hin;
      for (int m = std::max(m_lo, 2); m <= n; ++m) hin.emplace_back(m - 2, &ht);
      Matrix rhs = embedded_hamiltonian_sum({2, 2}, hin);
      if (local)
        e += expr_of(alloc[n - 1], so_scalar_times(Matrix(-Matrix::Identity(4, 4))), 4);
      else
        rhs += energy * Matrix::Identity(4, 4);
      p.add_psd_upper_bound(std::move(e), std::move(rhs), "shared energy " + std::to_string(n));
    }
  }

  // objective
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      Matrix coeff = herm_part(std::polar(1.0, phases[2 * x + y]) *
                               kron(j16, Matrix::Identity(2, 2)));
      p.add_objective(prog.g_vars[x][y], coeff);
    }
  return prog;
}

SupStrategyResult sup_seesaw(const LabeledOperator& j_sup, double energy, const SupOptions& opts,
                             const SeesawOptions& seesaw_opts) {
  if (seesaw_opts.restarts < 1) throw std::invalid_argument("sup_seesaw: restarts must be >= 1");
  Matrix j16 = permute_spaces(j_sup, {"s1", "s2", "s3", "s4"}).matrix;
  Matrix joc = kron(j16, Matrix::Identity(2, 2));

  SupStrategyResult best;
  double best_objective = -std::numeric_limits<double>::infinity();
  int total_solves = 0;

  for (int restart = 0; restart < seesaw_opts.restarts; ++restart) {
    std::vector<double> phases(4);
    if (restart == 0 && seesaw_opts.initial_phases) {
      phases = *seesaw_opts.initial_phases;
      if (phases.size() != 4) throw std::invalid_argument("sup_seesaw: need four initial phases");
    } else if (restart == 0) {
      phases = {0.0, 0.0, M_PI, M_PI};
    } else {
      std::mt19937_64 rng(seesaw_opts.seed + 0x9e3779b97f4a7c15ull * restart);
      std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
      for (double& ph : phases) ph = u(rng);
    }

    double objective = -std::numeric_limits<double>::infinity();
    SolveReport last;
    SupProgram prog_last;
    for (int it = 0; it < seesaw_opts.max_iterations; ++it) {
      SupProgram prog = build_sup_program(j_sup, energy, opts, phases);
      SolveReport rep = solve(prog.problem, seesaw_opts.solver_tol);
      ++total_solves;
      if (rep.status != SolveStatus::optimal)
        throw std::runtime_error("sup_seesaw: solver failed (" + to_string(rep.status) +
                                 ") at restart " + std::to_string(restart));
      double updated = 0.0;
      bool changed = false;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          Complex z = (rep.assignments[prog.g_vars[x][y]] * joc).trace();
          updated += std::abs(z);
          double ph = std::abs(z) < 1e-15 ? 0.0 : -std::arg(z);
          if (ph < 0) ph += 2.0 * M_PI;
          if (std::abs(ph - phases[2 * x + y]) > 1e-12) changed = true;
          phases[2 * x + y] = ph;
        }
      last = std::move(rep);
      prog_last = std::move(prog);
      double gain = updated - objective;
      objective = updated;
      if (!changed || gain < seesaw_opts.improvement_tol) break;
    }

    if (objective > best_objective) {
      best_objective = objective;
      best.cost = 2.0 - 2.0 * objective;
      best.estimator = phases;
      best.solved = last;
      for (int t = 0; t < 2; ++t)
        best.branch_weights[t] = prog_last.w1_vars[t] >= 0
                                     ? last.assignments[prog_last.w1_vars[t]].trace().real()
                                     : 0.0;
    }
  }
  best.total_solves = total_solves;
  return best;
}

LabeledOperator TwoChannelFamily::joint_choi(double theta) const {
  std::vector<SpaceLabel> labels = {SpaceLabel::number("s1", 2), SpaceLabel::number("s2", 2),
                                    SpaceLabel::number("s3", 2), SpaceLabel::number("s4", 2)};
  return LabeledOperator(std::move(labels), kron(first(theta), second(theta)));
}

TaskOperator TwoChannelFamily::task_operator(int quadrature) const {
  ParamFamily fam;
  TwoChannelFamily copy = *this;
  fam.generator = [copy](double theta) { return copy.joint_choi(theta); };
  fam.prior = Prior::uniform();
  return combenergy::task_operator(fam, quadrature);
}

namespace {

Matrix bitflip_choi() {
  CVector om = omega_vector(2);
  Matrix base = om * om.adjoint();
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  Matrix ix = kron(Matrix::Identity(2, 2), x);
  return 0.5 * base + 0.5 * ix * base * ix.adjoint();
}

Matrix rotated_bitflip_choi(const Matrix& u) {
  Matrix iu = kron(Matrix::Identity(2, 2), u);
  return iu * bitflip_choi() * iu.adjoint();
}

Matrix uz(double theta) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = std::polar(1.0, -theta / 2);
  u(1, 1) = std::polar(1.0, theta / 2);
  return u;
}

Matrix ux(double theta) {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return std::cos(theta / 2) * Matrix::Identity(2, 2) + Complex(0, 1) * std::sin(theta / 2) * x;
}

}  // namespace

TwoChannelFamily TwoChannelFamily::hierarchy_example() {
  TwoChannelFamily f;
  f.first = [](double theta) { return rotated_bitflip_choi(uz(theta)); };
  f.second = [](double theta) { return rotated_bitflip_choi(uz(-theta)); };
  return f;
}

TwoChannelFamily TwoChannelFamily::ind_vs_shared_example() {
  TwoChannelFamily f;
  f.first = [](double theta) { return rotated_bitflip_choi(uz(theta)); };
  f.second = [](double theta) { return rotated_bitflip_choi(ux(theta)); };
  return f;
}

std::vector<HierarchyRow> hierarchy_experiment(const std::vector<double>& e_grid,
                                               const HierarchyOptions& opts) {
  TwoChannelFamily fam = TwoChannelFamily::hierarchy_example();
  TaskOperator j = fam.task_operator();

  ProbeStructure def_st;
  for (int k = 1; k <= 5; ++k) def_st.spaces.push_back(SpaceLabel::number("s" + std::to_string(k), 2));

  std::vector<HierarchyRow> rows;
  std::optional<std::vector<double>> cont_gl, cont_loc, cont_sup;
  for (size_t i = 0; i < e_grid.size(); ++i) {
    HierarchyRow row;
    row.energy = e_grid[i];
    SeesawOptions so = opts.seesaw;
    if (i == 0) so.restarts = std::max(so.restarts, 2);
    try {
      SeesawOptions gl = so;
      gl.initial_phases = cont_gl;
      StrategyResult rg = seesaw(def_st, j, BatteryModel::global, e_grid[i], gl);
      row.cost_def_global = rg.cost;
      cont_gl = rg.estimator;

      SeesawOptions lc = so;
      lc.initial_phases = cont_loc;
      StrategyResult rl = seesaw(def_st, j, BatteryModel::local, e_grid[i], lc);
      row.cost_def_local = rl.cost;
      cont_loc = rl.estimator;

      SupOptions sup_opts;
      SeesawOptions ss = so;
      ss.initial_phases = cont_sup;
      SupStrategyResult rs = sup_seesaw(j.op, e_grid[i], sup_opts, ss);
      row.cost_sup_ind = rs.cost;
      cont_sup = rs.estimator;
    } catch (const std::exception& ex) {
      row.solved = false;
      row.note = ex.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Comb controlled_hadamard_comb() {
  Matrix h2(2, 2);
  h2 << 1, 1, 1, -1;
  h2 /= std::sqrt(2.0);
  CVector om = omega_vector(2);
  CVector hom = kron(Matrix::Identity(2, 2), h2) * om;
  auto basis = [](int j) {
    CVector v = CVector::Zero(2);
    v(j) = 1.0;
    return v;
  };
  CVector term0 = kron(kron(basis(0), basis(0)).eval(), kron(hom, om).eval());
  CVector term1 = kron(kron(basis(1), basis(1)).eval(), kron(om, hom).eval());
  CVector phi = term0 + term1;

  std::vector<SpaceLabel> labels = {SpaceLabel::degenerate("c", 2), SpaceLabel::degenerate("c'", 2),
                                    SpaceLabel::number("w0", 2),    SpaceLabel::number("w1", 2),
                                    SpaceLabel::number("w2", 2),    SpaceLabel::number("w3", 2)};
  LabeledOperator raw(labels, phi * phi.adjoint());
  LabeledOperator fused_in = fuse_labels(raw, {"c", "w0"}, "a0");
  LabeledOperator fused = fuse_labels(fused_in, {"c'", "w3"}, "a3");
  return Comb{fused, {{"a0", "w1"}, {"w2", "a3"}}};
}

BatterySeparation battery_separation_examples() {
  BatterySeparation sep;
  Comb c1 = controlled_hadamard_comb();
  EnergyAudit audit = energy_audit(c1);
  sep.e_loc_c1 = audit.e_local;
  sep.e_gl_c1 = audit.e_global;

  Matrix h2(2, 2);
  h2 << 1, 1, 1, -1;
  h2 /= std::sqrt(2.0);
  SpaceLabel in = SpaceLabel::number("i", 2), out = SpaceLabel::number("o", 2);
  Comb had{choi_of_kraus({h2}, in, out), {{"i", "o"}}};
  Comb ident{choi_of_kraus({Matrix::Identity(2, 2)}, in, out), {{"i", "o"}}};
  sep.e_ind_c2 = std::max(energy_global(had), energy_global(ident));

  Comb mix{LabeledOperator({in, out}, 0.5 * had.op.matrix + 0.5 * ident.op.matrix),
           {{"i", "o"}}};
  sep.e_sh_c2 = energy_global(mix);
  return sep;
}

std::vector<IndVsSharedRow> ind_vs_shared_experiment(const std::vector<double>& e_grid,
                                                     const SeesawOptions& opts) {
  TwoChannelFamily fam = TwoChannelFamily::ind_vs_shared_example();
  TaskOperator j = fam.task_operator();

  std::vector<IndVsSharedRow> rows;
  std::optional<std::vector<double>> cont_ind, cont_sh;
  for (size_t i = 0; i < e_grid.size(); ++i) {
    IndVsSharedRow row;
    row.energy = e_grid[i];
    SeesawOptions so = opts;
    if (i == 0) so.restarts = std::max(so.restarts, 2);
    try {
      SupOptions ind;
      ind.fixed_branch_weights = {{0.5, 0.5}};
      SeesawOptions a = so;
      a.initial_phases = cont_ind;
      SupStrategyResult ri = sup_seesaw(j.op, e_grid[i], ind, a);
      row.cost_individual = ri.cost;
      cont_ind = ri.estimator;

      SupOptions sh = ind;
      sh.battery = SupBattery::shared;
      SeesawOptions b = so;
      b.initial_phases = cont_sh;
      SupStrategyResult rs = sup_seesaw(j.op, e_grid[i], sh, b);
      row.cost_shared = rs.cost;
      cont_sh = rs.estimator;
    } catch (const std::exception& ex) {
      row.solved = false;
      row.note = ex.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace combenergy
