// SPDX-License-Identifier: Apache-2.0
#include "combenergy/programs.hpp"

#include <cmath>
#include <stdexcept>

namespace combenergy {

std::vector<int> ProbeStructure::element_dims() const {
  std::vector<int> d;
  for (size_t k = 0; k + 1 < spaces.size(); ++k) d.push_back(spaces[k].dim);
  return d;
}

ProbeStructure ProbeStructure::single_channel(int d) {
  ProbeStructure s;
  s.spaces = {SpaceLabel::number("s1", d), SpaceLabel::number("s2", d), SpaceLabel::number("s3", d)};
  return s;
}

namespace program_detail {

Matrix embedded_hamiltonian_sum(const std::vector<int>& dims,
                                const std::vector<std::pair<int, const Matrix*>>& hs) {
  long n = 1;
  for (int d : dims) n *= d;
  Matrix out = Matrix::Zero(n, n);
  for (const auto& [pos, h] : hs) {
    long left = 1, right = 1;
    for (int k = 0; k < pos; ++k) left *= dims[k];
    for (size_t k = pos + 1; k < dims.size(); ++k) right *= dims[k];
    out += kron(kron(Matrix::Identity(left, left), *h), Matrix::Identity(right, right));
  }
  return out;
}

SuperOp energy_trace_map(const std::vector<int>& dims, const std::vector<int>& out_positions,
                         const Matrix& h_embedded) {
  long n = 1;
  for (int d : dims) n *= d;
  SuperOp mult = so_left_right(h_embedded, Matrix::Identity(n, n));
  return so_compose(so_partial_trace(dims, out_positions), mult);
}

SuperOp so_scalar_times(const Matrix& m) {
  const long d = m.rows();
  std::vector<Eigen::Triplet<Complex>> t;
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      if (m(i, j) != Complex(0, 0)) t.emplace_back(i + d * j, 0, m(i, j));
  SuperOp s(d * d, 1);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace program_detail

using program_detail::embedded_hamiltonian_sum;
using program_detail::energy_trace_map;
using program_detail::so_scalar_times;

ProbeProgram build_probe_program(const ProbeStructure& structure, const LabeledOperator& task_op,
                                 BatteryModel battery, double energy,
                                 const std::vector<double>& phases, bool diagonal_final) {
  const int n_spaces = static_cast<int>(structure.spaces.size());
  if (n_spaces < 3 || n_spaces % 2 == 0)
    throw std::invalid_argument("build_probe_program: structure needs 2N-1 spaces, N >= 2");
  if (energy < 0) throw std::invalid_argument("build_probe_program: E must be >= 0");
  const int n_steps = structure.n_steps();
  const SpaceLabel& fin = structure.final_space();
  if (max_abs(Matrix(fin.hamiltonian - Matrix(fin.hamiltonian.diagonal().asDiagonal()))) > 1e-12)
    throw std::invalid_argument("build_probe_program: final Hamiltonian must be diagonal");
  if (static_cast<int>(phases.size()) != fin.dim)
    throw std::invalid_argument("build_probe_program: one estimator phase per energy outcome");

  // align the task operator with the element-space order
  std::vector<std::string> element_ids;
  for (int k = 0; k + 1 < n_spaces; ++k) element_ids.push_back(structure.spaces[k].id);
  if (task_op.labels.size() != element_ids.size())
    throw std::invalid_argument("build_probe_program: task operator label mismatch");
  Matrix j_mat = permute_spaces(task_op, element_ids).matrix;

  const std::vector<int> el_dims = structure.element_dims();
  long el_total = 1;
  for (int d : el_dims) el_total *= d;

  std::vector<int> el_out_positions, el_in_positions;
  for (int k = 0; k + 1 < n_spaces; k += 2) el_out_positions.push_back(k);
  for (int k = 1; k + 1 < n_spaces; k += 2) el_in_positions.push_back(k);

  ProbeProgram prog;
  prog.n_outcomes = fin.dim;
  ConicProblem& p = prog.problem;
  p.maximize = true;

  // variables
  std::vector<int> all_dims = el_dims;
  all_dims.push_back(fin.dim);
  long full_total = el_total * fin.dim;
  if (diagonal_final) {
    for (int x = 0; x < fin.dim; ++x)
      prog.instrument_vars.push_back(
          p.add_var("T" + std::to_string(x), static_cast<int>(el_total), "instrument element"));
  } else {
    prog.full_var = p.add_var("T", static_cast<int>(full_total), "probe comb");
  }
  for (int n = 1; n < n_steps; ++n) {
    long dn = 1;
    for (int k = 0; k <= 2 * n - 2; ++k) dn *= structure.spaces[k].dim;
    prog.level_vars.push_back(p.add_var("T(" + std::to_string(n) + ")", static_cast<int>(dn),
                                        "level-" + std::to_string(n) + " comb"));
  }

  // maps of the assembled probe, lowered onto the actual variables
  auto lifted_expr = [&](const SuperOp& map_on_elements, const SuperOp& final_energy_weight,
                         int out_dim) {
    // map applied to sum_x T_x plus (optionally) sum_x E_x * weight(T_x)
    MatrixExpr e;
    e.dim = out_dim;
    for (int x = 0; x < fin.dim; ++x) {
      double ex = fin.hamiltonian(x, x).real();
      SuperOp total = map_on_elements;
      if (final_energy_weight.nonZeros() > 0 && ex != 0.0)
        total = SuperOp(total + Complex(ex, 0) * final_energy_weight);
      if (diagonal_final) {
        e.terms.push_back({prog.instrument_vars[x], total});
      } else {
        Matrix px = Matrix::Zero(fin.dim, fin.dim);
        px(x, x) = 1.0;
        std::vector<int> positions(el_dims.size());
        for (size_t k = 0; k < el_dims.size(); ++k) positions[k] = static_cast<int>(k);
        SuperOp block = so_embed(all_dims, positions, {{static_cast<int>(el_dims.size()), px}});
        // adjoint of embedding extracts the diagonal block
        e.terms.push_back({prog.full_var, so_compose(total, SuperOp(block.adjoint()))});
      }
    }
    return e;
  };
  SuperOp no_weight(static_cast<long>(el_total) * el_total, static_cast<long>(el_total) * el_total);

  // causality: sum_x T_x = T^{(N-1)} (x) I on the element space
  {
    MatrixExpr top = lifted_expr(so_identity(static_cast<int>(el_total)), no_weight,
                                 static_cast<int>(el_total));
    std::vector<int> positions;
    for (int k = 0; k + 2 < n_spaces; ++k) positions.push_back(k);
    SuperOp lift = so_embed(el_dims, positions);
    top += expr_of(prog.level_vars[n_steps - 2], SuperOp(Complex(-1, 0) * lift),
                   static_cast<int>(el_total));
    p.add_equality(std::move(top), Matrix::Zero(el_total, el_total), "comb level " + std::to_string(n_steps));
  }
  // intermediate levels: Tr_{2n-1}[T^{(n)}] = T^{(n-1)} (x) I
  for (int n = n_steps - 1; n >= 2; --n) {
    std::vector<int> dims_n;
    for (int k = 0; k <= 2 * n - 2; ++k) dims_n.push_back(structure.spaces[k].dim);
    long dn_low = 1;
    for (int k = 0; k <= 2 * n - 3; ++k) dn_low *= structure.spaces[k].dim;
    MatrixExpr e = expr_of(prog.level_vars[n - 1], so_partial_trace(dims_n, {2 * n - 2}),
                           static_cast<int>(dn_low));
    std::vector<int> dims_low(dims_n.begin(), dims_n.end() - 1);
    std::vector<int> positions;
    for (int k = 0; k <= 2 * n - 4; ++k) positions.push_back(k);
    e += expr_of(prog.level_vars[n - 2], SuperOp(Complex(-1, 0) * so_embed(dims_low, positions)),
                 static_cast<int>(dn_low));
    p.add_equality(std::move(e), Matrix::Zero(dn_low, dn_low), "comb level " + std::to_string(n));
  }
  // bottom: Tr[T^{(1)}] = 1
  p.add_equality(expr_of(prog.level_vars[0], so_partial_trace({structure.spaces[0].dim}, {0}), 1),
                 Matrix::Constant(1, 1, 1.0), "unit trace");

  // local battery allocations
  if (battery == BatteryModel::local) {
    for (int n = 1; n <= n_steps; ++n)
      prog.allocation_vars.push_back(p.add_var("E" + std::to_string(n), 1, "step budget"));
    MatrixExpr total;
    total.dim = 1;
    for (int v : prog.allocation_vars) total += expr_of(v, so_identity(1), 1);
    p.add_equality(std::move(total), Matrix::Constant(1, 1, energy), "battery split");
  }

  // energy constraint for prefix/step n, expressed through the smallest level
  auto add_energy_constraint = [&](int n, bool prefix) {
    const int m_lo = prefix ? 1 : n;
    // spaces carrying the result: inputs s2, s4, ..., s_{2n-2}
    std::vector<int> res_positions;  // within the level/element layout
    std::vector<int> res_dims;
    for (int k = 1; k <= 2 * n - 3; k += 2) {
      res_positions.push_back(k);
      res_dims.push_back(structure.spaces[k].dim);
    }
    long res_total = 1;
    for (int d : res_dims) res_total *= d;

    Matrix rhs = Matrix::Zero(res_total, res_total);
    {
      std::vector<std::pair<int, const Matrix*>> hin;
      std::vector<Matrix> transposed;
      transposed.reserve(n);
      for (int m = std::max(m_lo, 2); m <= n; ++m)
        transposed.push_back(structure.spaces[2 * m - 3].hamiltonian.transpose());
      int idx = 0;
      for (int m = std::max(m_lo, 2); m <= n; ++m)
        hin.emplace_back((m - 2), &transposed[idx++]);
      std::vector<int> in_dims = res_dims;
      rhs = embedded_hamiltonian_sum(in_dims, hin);
    }

    MatrixExpr expr;
    if (n < n_steps) {
      // via the level variable T^{(n)}
      std::vector<int> dims_n;
      for (int k = 0; k <= 2 * n - 2; ++k) dims_n.push_back(structure.spaces[k].dim);
      std::vector<std::pair<int, const Matrix*>> hout;
      for (int m = m_lo; m <= n; ++m) hout.emplace_back(2 * m - 2, &structure.spaces[2 * m - 2].hamiltonian);
      std::vector<int> outs;
      for (int k = 0; k <= 2 * n - 2; k += 2) outs.push_back(k);
      SuperOp map = energy_trace_map(dims_n, outs, embedded_hamiltonian_sum(dims_n, hout));
      expr = expr_of(prog.level_vars[n - 1], std::move(map), static_cast<int>(res_total));
    } else {
      // via the instrument elements, with the measured-space energy weights
      std::vector<std::pair<int, const Matrix*>> hout;
      for (int m = m_lo; m <= n_steps - 1; ++m)
        hout.emplace_back(2 * m - 2, &structure.spaces[2 * m - 2].hamiltonian);
      SuperOp map = energy_trace_map(el_dims, el_out_positions, embedded_hamiltonian_sum(el_dims, hout));
      SuperOp weight = so_partial_trace(el_dims, el_out_positions);
      expr = lifted_expr(map, weight, static_cast<int>(res_total));
    }

    std::string tag = (prefix ? "global prefix " : "local step ") + std::to_string(n);
    if (battery == BatteryModel::local && !prefix) {
      expr += expr_of(prog.allocation_vars[n - 1],
                      so_scalar_times(Matrix(-Matrix::Identity(res_total, res_total))),
                      static_cast<int>(res_total));
      p.add_psd_upper_bound(std::move(expr), rhs, tag);
    } else {
      p.add_psd_upper_bound(std::move(expr), rhs + energy * Matrix::Identity(res_total, res_total),
                            tag);
    }
  };

  for (int n = 1; n <= n_steps; ++n) add_energy_constraint(n, battery == BatteryModel::global);

  // objective: max sum_x Re[e^{i phase_x} Tr[T_x J]]
  for (int x = 0; x < fin.dim; ++x) {
    Matrix coeff = herm_part(std::polar(1.0, phases[x]) * j_mat);
    if (diagonal_final) {
      p.add_objective(prog.instrument_vars[x], coeff);
    } else {
      Matrix px = Matrix::Zero(fin.dim, fin.dim);
      px(x, x) = 1.0;
      p.add_objective(prog.full_var, kron(coeff, px));
    }
  }
  return prog;
}

std::vector<Matrix> extract_instrument(const ProbeProgram& prog, const SolveReport& report) {
  std::vector<Matrix> out;
  if (prog.full_var >= 0) {
    // diagonal blocks of T in the final-space basis (final factor is last)
    const Matrix& t = report.assignments.at(prog.full_var);
    const int df = prog.n_outcomes;
    const long el = t.rows() / df;
    for (int x = 0; x < df; ++x) {
      Matrix block(el, el);
      for (long i = 0; i < el; ++i)
        for (long j = 0; j < el; ++j) block(i, j) = t(i * df + x, j * df + x);
      out.push_back(std::move(block));
    }
    return out;
  }
  for (int v : prog.instrument_vars) out.push_back(report.assignments.at(v));
  return out;
}

Comb assemble_probe_comb(const ProbeStructure& structure, const std::vector<Matrix>& instrument) {
  const SpaceLabel& fin = structure.final_space();
  if (static_cast<int>(instrument.size()) != fin.dim)
    throw std::invalid_argument("assemble_probe_comb: one element per outcome");
  long el = instrument.front().rows();
  Matrix full = Matrix::Zero(el * fin.dim, el * fin.dim);
  for (int x = 0; x < fin.dim; ++x) {
    Matrix px = Matrix::Zero(fin.dim, fin.dim);
    px(x, x) = 1.0;
    full += kron(instrument[x], px);
  }
  Comb c;
  c.op = LabeledOperator(structure.spaces, std::move(full));
  for (int n = 0; n < structure.n_steps(); ++n) {
    CombStep step;
    if (n > 0) step.input = structure.spaces[2 * n - 1].id;
    step.output = structure.spaces[2 * n].id;
    c.steps.push_back(step);
  }
  return c;
}

}  // namespace combenergy
