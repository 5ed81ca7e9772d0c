// SPDX-License-Identifier: Apache-2.0
#include "combenergy/comb.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace combenergy {

std::vector<std::string> Comb::input_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : steps)
    if (s.input) ids.push_back(*s.input);
  return ids;
}

std::vector<std::string> Comb::output_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : steps) ids.push_back(s.output);
  return ids;
}

long Comb::input_dim_product() const {
  long d = 1;
  for (const auto& id : input_ids()) d *= op.label(id).dim;
  return d;
}

ValidityReport validate_comb(const Comb& c, double tol) {
  if (c.steps.empty()) throw std::invalid_argument("validate_comb: comb has no steps");
  for (const auto& s : c.steps) {
    if (!c.op.has(s.output)) throw std::invalid_argument("validate_comb: missing output '" + s.output + "'");
    if (s.input && !c.op.has(*s.input))
      throw std::invalid_argument("validate_comb: missing input '" + *s.input + "'");
  }

  ValidityReport rep;
  rep.tol = tol;
  rep.psd_margin = lambda_min(herm_part(c.op.matrix));

  LabeledOperator level = c.op;
  for (int n = c.n_steps(); n >= 1; --n) {
    const CombStep& step = c.steps[n - 1];
    LabeledOperator traced = partial_trace(level, {step.output});
    if (n == 1) {
      // bottom level: Tr_out[C^(1)] = I on the (possibly trivial) input
      Matrix target = step.input ? cidentity(c.op.label(*step.input).dim) : Matrix::Constant(1, 1, 1.0);
      rep.level_residuals.push_back((traced.matrix - target).norm());
      break;
    }
    if (step.input) {
      int din = c.op.label(*step.input).dim;
      LabeledOperator lower = partial_trace(traced, {*step.input});
      lower.matrix /= double(din);
      LabeledOperator lifted = embed_with_identity(lower, traced.labels);
      rep.level_residuals.push_back((traced.matrix - lifted.matrix).norm());
      level = lower;
    } else {
      rep.level_residuals.push_back(0.0);
      level = traced;
    }
  }

  rep.valid = rep.psd_margin >= -1e-9;
  for (double r : rep.level_residuals) rep.valid = rep.valid && r <= tol;
  return rep;
}

LabeledOperator link(const LabeledOperator& a, const LabeledOperator& b) {
  std::vector<std::string> shared;
  for (const auto& l : a.labels)
    if (b.has(l.id)) {
      if (b.label(l.id).dim != l.dim)
        throw std::invalid_argument("link: dim mismatch on shared label '" + l.id + "'");
      shared.push_back(l.id);
    }

  std::vector<SpaceLabel> all;
  std::set<std::string> seen;
  for (const auto& l : a.labels) {
    all.push_back(l);
    seen.insert(l.id);
  }
  for (const auto& l : b.labels)
    if (!seen.count(l.id)) all.push_back(l);
  std::sort(all.begin(), all.end(), [](const SpaceLabel& x, const SpaceLabel& y) { return x.id < y.id; });

  LabeledOperator at = partial_transpose(a, shared);
  LabeledOperator ae = embed_with_identity(at, all);
  LabeledOperator be = embed_with_identity(b, all);
  LabeledOperator prod(all, ae.matrix * be.matrix);
  if (shared.empty()) return prod;
  return partial_trace(prod, shared);
}

Comb compose(const Comb& a, const Comb& b) {
  if (a.n_steps() != b.n_steps()) throw std::invalid_argument("compose: step count mismatch");

  // Wire a's outputs to b's inputs. b is relabeled through temporaries so
  // label sets cannot clash mid-rename.
  LabeledOperator bop = b.op;
  std::vector<std::string> b_out_tmp(b.n_steps());
  for (int n = 0; n < b.n_steps(); ++n) {
    const auto& bs = b.steps[n];
    if (!bs.input) throw std::invalid_argument("compose: b has a trivial input at step " + std::to_string(n + 1));
    const SpaceLabel& aout = a.op.label(a.steps[n].output);
    if (b.op.label(*bs.input).dim != aout.dim)
      throw std::invalid_argument("compose: wiring dim mismatch at step " + std::to_string(n + 1));
  }
  for (size_t k = 0; k < bop.labels.size(); ++k) bop.labels[k].id = "\x01tmp" + std::to_string(k);
  for (int n = 0; n < b.n_steps(); ++n) {
    int pin = b.op.index_of(*b.steps[n].input);
    bop.labels[pin] = a.op.label(a.steps[n].output);
    b_out_tmp[n] = bop.labels[b.op.index_of(b.steps[n].output)].id;
  }

  LabeledOperator linked = link(a.op, bop);
  // b's outputs get their original ids back after the contraction
  for (int n = 0; n < b.n_steps(); ++n) {
    const std::string& target = b.steps[n].output;
    if (linked.has(target))
      throw std::invalid_argument("compose: label collision between a's inputs and b's outputs");
    linked.labels[linked.index_of(b_out_tmp[n])].id = target;
  }

  Comb out;
  out.op = linked.canonical();
  for (int n = 0; n < a.n_steps(); ++n) out.steps.push_back({a.steps[n].input, b.steps[n].output});
  return out;
}

LabeledOperator energy_operator(const Comb& c, int n, bool prefix) {
  if (n < 1 || n > c.n_steps()) throw std::invalid_argument("energy_operator: bad step index");

  const auto& full = c.op.labels;
  Matrix hout = Matrix::Zero(c.op.dim(), c.op.dim());
  for (int m = prefix ? 1 : n; m <= n; ++m) {
    const SpaceLabel& out = c.op.label(c.steps[m - 1].output);
    hout += embed_with_identity(LabeledOperator({out}, out.hamiltonian), full).matrix;
  }

  LabeledOperator weighted(full, hout * c.op.matrix);
  LabeledOperator term1 = partial_trace(weighted, c.output_ids());

  Matrix hin = Matrix::Zero(term1.dim(), term1.dim());
  for (int m = prefix ? 1 : n; m <= n; ++m) {
    const auto& step = c.steps[m - 1];
    if (!step.input) continue;
    const SpaceLabel& in = c.op.label(*step.input);
    LabeledOperator ht({in}, in.hamiltonian.transpose().eval());
    hin += embed_with_identity(ht, term1.labels).matrix;
  }
  return LabeledOperator(term1.labels, herm_part(term1.matrix - hin));
}

EnergyAudit energy_audit(const Comb& c) {
  EnergyAudit audit;
  for (int n = 1; n <= c.n_steps(); ++n) {
    double step = lambda_max(energy_operator(c, n, false).matrix);
    double pref = lambda_max(energy_operator(c, n, true).matrix);
    audit.per_step_local.push_back(std::max(step, 0.0));
    audit.per_prefix_global.push_back(pref);
  }
  audit.e_local = 0.0;
  for (double v : audit.per_step_local) audit.e_local += v;
  audit.e_global = *std::max_element(audit.per_prefix_global.begin(), audit.per_prefix_global.end());
  return audit;
}

double energy_global(const Comb& c) { return energy_audit(c).e_global; }
double energy_local(const Comb& c) { return energy_audit(c).e_local; }

bool is_energy_constrained(const Comb& c, double e, BatteryModel model) {
  if (e < 0) throw std::invalid_argument("is_energy_constrained: E must be >= 0");
  double used = model == BatteryModel::global ? energy_global(c) : energy_local(c);
  return used <= e + 1e-9;
}

Matrix random_isometry(std::mt19937_64& rng, int rows, int cols) {
  if (cols > rows) throw std::invalid_argument("random_isometry: cols > rows");
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    Complex d = r(j, j);
    if (std::abs(d) > 1e-14) q.col(j) *= d / std::abs(d);
  }
  return q;
}

CVector random_state(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();
  return v;
}

Comb random_comb(std::mt19937_64& rng, const std::vector<std::pair<int, int>>& step_dims,
                 const std::vector<int>& memory_dims, const std::string& prefix,
                 bool degenerate_hamiltonians) {
  const int n_steps = static_cast<int>(step_dims.size());
  if (n_steps == 0 || memory_dims.size() != step_dims.size())
    throw std::invalid_argument("random_comb: bad step/memory shape");

  auto make_label = [&](int wire, int dim) {
    std::string id = prefix + (wire < 10 ? "0" : "") + std::to_string(wire);
    return degenerate_hamiltonians ? SpaceLabel::degenerate(id, dim) : SpaceLabel::number(id, dim);
  };

  // Total isometry W: (in_1 .. in_N) -> (out_1 .. out_N) (x) mem, built from
  // per-step isometries V_n : (mem_{n-1} (x) in_n) -> (out_n (x) mem_n).
  // With W_{n-1}'s range ordered (outs, mem), the trailing (mem (x) in_n)
  // block of W_{n-1} (x) I is exactly what V_n consumes.
  Matrix w = Matrix::Identity(1, 1);
  long din_total = 1, dout_total = 1;
  int mem = 1;
  for (int n = 0; n < n_steps; ++n) {
    auto [din, dout] = step_dims[n];
    int mem_next = memory_dims[n];
    if (static_cast<long>(dout) * mem_next < static_cast<long>(din) * mem)
      throw std::invalid_argument("random_comb: memory too small for an isometry");
    Matrix v = random_isometry(rng, dout * mem_next, mem * din);
    Matrix lifted = kron(w, Matrix::Identity(din, din));
    w = kron(Matrix::Identity(dout_total, dout_total), v) * lifted;
    din_total *= din;
    dout_total *= dout;
    mem = mem_next;
  }

  // Pure Choi vector Psi = sum_i |i>_in (x) W|i>, then trace out the memory.
  long dout_mem = dout_total * mem;
  Matrix cfull = Matrix::Zero(din_total * dout_mem, din_total * dout_mem);
  {
    CVector psi(din_total * dout_mem);
    for (long i = 0; i < din_total; ++i) psi.segment(i * dout_mem, dout_mem) = w.col(i);
    cfull = psi * psi.adjoint();
  }

  Comb out;
  for (int n = 0; n < n_steps; ++n) {
    CombStep step;
    if (step_dims[n].first > 1) step.input = make_label(2 * n, step_dims[n].first).id;
    step.output = make_label(2 * n + 1, step_dims[n].second).id;
    out.steps.push_back(step);
  }
  // label list in construction order: all inputs, then all outputs, then memory
  std::vector<SpaceLabel> ordered;
  for (int n = 0; n < n_steps; ++n)
    if (step_dims[n].first > 1) ordered.push_back(make_label(2 * n, step_dims[n].first));
  for (int n = 0; n < n_steps; ++n) ordered.push_back(make_label(2 * n + 1, step_dims[n].second));
  ordered.push_back(SpaceLabel::degenerate("\x01mem", mem));

  LabeledOperator full(ordered, std::move(cfull));
  out.op = partial_trace(full, {"\x01mem"}).canonical();
  return out;
}

}  // namespace combenergy
