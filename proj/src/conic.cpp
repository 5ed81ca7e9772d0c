// SPDX-License-Identifier: Apache-2.0
#include "combenergy/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "combenergy/parallel.hpp"

namespace combenergy {

// ---------------------------------------------------------------------------
// superoperator builders
// ---------------------------------------------------------------------------

namespace {

using Triplet = Eigen::Triplet<Complex>;

void unflatten(long idx, const std::vector<int>& dims, std::vector<int>& digits) {
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(idx % dims[k]);
    idx /= dims[k];
  }
}

long flatten(const std::vector<int>& digits, const std::vector<int>& dims) {
  long idx = 0;
  for (size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
  return idx;
}

long dim_product(const std::vector<int>& dims) {
  long p = 1;
  for (int d : dims) p *= d;
  return p;
}

}  // namespace

SuperOp so_identity(int d) {
  SuperOp s(static_cast<long>(d) * d, static_cast<long>(d) * d);
  s.setIdentity();
  return s;
}

SuperOp so_scale(Complex c, int d) {
  SuperOp s = so_identity(d);
  return SuperOp(c * s);
}

SuperOp so_left_right(const Matrix& l, const Matrix& r) {
  // vec(L X R) = (R^T (x) L) vec(X), column-major vec
  const long m = l.rows(), d = l.cols();
  if (r.rows() != d || r.cols() != m)
    throw std::invalid_argument("so_left_right: shape mismatch");
  std::vector<Triplet> t;
  for (long rj = 0; rj < r.cols(); ++rj)
    for (long ri = 0; ri < r.rows(); ++ri) {
      if (r(ri, rj) == Complex(0, 0)) continue;
      for (long lj = 0; lj < d; ++lj)
        for (long li = 0; li < m; ++li) {
          if (l(li, lj) == Complex(0, 0)) continue;
          t.emplace_back(li + m * rj, lj + d * ri, r(ri, rj) * l(li, lj));
        }
    }
  SuperOp s(m * m, d * d);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SuperOp so_sandwich(const Matrix& m) { return so_left_right(m, m.adjoint()); }

SuperOp so_partial_trace(const std::vector<int>& dims, const std::vector<int>& traced) {
  std::vector<bool> is_traced(dims.size(), false);
  for (int p : traced) is_traced.at(p) = true;
  std::vector<int> kd, td, kpos, tpos;
  for (size_t k = 0; k < dims.size(); ++k) {
    if (is_traced[k]) {
      td.push_back(dims[k]);
      tpos.push_back(static_cast<int>(k));
    } else {
      kd.push_back(dims[k]);
      kpos.push_back(static_cast<int>(k));
    }
  }
  const long dk = dim_product(kd), dt = dim_product(td), dn = dim_product(dims);
  std::vector<Triplet> t;
  std::vector<int> ki(kd.size()), kj(kd.size()), ti(td.size()), row(dims.size()), col(dims.size());
  for (long i = 0; i < dk; ++i) {
    unflatten(i, kd, ki);
    for (long j = 0; j < dk; ++j) {
      unflatten(j, kd, kj);
      for (long tr = 0; tr < dt; ++tr) {
        unflatten(tr, td, ti);
        for (size_t k = 0; k < kpos.size(); ++k) {
          row[kpos[k]] = ki[k];
          col[kpos[k]] = kj[k];
        }
        for (size_t k = 0; k < tpos.size(); ++k) {
          row[tpos[k]] = ti[k];
          col[tpos[k]] = ti[k];
        }
        t.emplace_back(i + dk * j, flatten(row, dims) + dn * flatten(col, dims), Complex(1, 0));
      }
    }
  }
  SuperOp s(dk * dk, dn * dn);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SuperOp so_partial_transpose(const std::vector<int>& dims, const std::vector<int>& subset) {
  std::vector<bool> flip(dims.size(), false);
  for (int p : subset) flip.at(p) = true;
  const long dn = dim_product(dims);
  std::vector<Triplet> t;
  std::vector<int> ri(dims.size()), ci(dims.size()), ro(dims.size()), co(dims.size());
  for (long i = 0; i < dn; ++i) {
    unflatten(i, dims, ri);
    for (long j = 0; j < dn; ++j) {
      unflatten(j, dims, ci);
      for (size_t k = 0; k < dims.size(); ++k) {
        ro[k] = flip[k] ? ci[k] : ri[k];
        co[k] = flip[k] ? ri[k] : ci[k];
      }
      t.emplace_back(flatten(ro, dims) + dn * flatten(co, dims), i + dn * j, Complex(1, 0));
    }
  }
  SuperOp s(dn * dn, dn * dn);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SuperOp so_embed(const std::vector<int>& out_dims, const std::vector<int>& var_positions,
                 const std::vector<std::pair<int, Matrix>>& fixed) {
  const long dn = dim_product(out_dims);
  std::vector<int> vd;
  std::vector<bool> is_var(out_dims.size(), false);
  for (int p : var_positions) {
    vd.push_back(out_dims.at(p));
    is_var[p] = true;
  }
  std::map<int, const Matrix*> fixed_at;
  for (const auto& [p, m] : fixed) {
    if (is_var[p]) throw std::invalid_argument("so_embed: fixed factor on a variable position");
    fixed_at[p] = &m;
  }
  const long dv = dim_product(vd);

  std::vector<Triplet> t;
  std::vector<int> ro(out_dims.size()), co(out_dims.size()), vi(vd.size()), vj(vd.size());
  for (long i = 0; i < dn; ++i) {
    unflatten(i, out_dims, ro);
    for (long j = 0; j < dn; ++j) {
      unflatten(j, out_dims, co);
      Complex w(1, 0);
      bool zero = false;
      for (size_t k = 0; k < out_dims.size() && !zero; ++k) {
        if (is_var[k]) continue;
        auto it = fixed_at.find(static_cast<int>(k));
        if (it == fixed_at.end()) {
          if (ro[k] != co[k]) zero = true;
        } else {
          Complex f = (*it->second)(ro[k], co[k]);
          if (f == Complex(0, 0)) zero = true;
          w *= f;
        }
      }
      if (zero) continue;
      for (size_t k = 0; k < var_positions.size(); ++k) {
        vi[k] = ro[var_positions[k]];
        vj[k] = co[var_positions[k]];
      }
      t.emplace_back(i + dn * j, flatten(vi, vd) + dv * flatten(vj, vd), w);
    }
  }
  SuperOp s(dn * dn, dv * dv);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SuperOp so_permute(const std::vector<int>& dims, const std::vector<int>& perm) {
  if (perm.size() != dims.size()) throw std::invalid_argument("so_permute: bad permutation");
  std::vector<int> new_dims;
  for (int p : perm) new_dims.push_back(dims.at(p));
  const long dn = dim_product(dims);
  std::vector<long> new_to_old(dn);
  std::vector<int> nd(dims.size()), od(dims.size());
  for (long i = 0; i < dn; ++i) {
    unflatten(i, new_dims, nd);
    for (size_t k = 0; k < perm.size(); ++k) od[perm[k]] = nd[k];
    new_to_old[i] = flatten(od, dims);
  }
  std::vector<Triplet> t;
  for (long i = 0; i < dn; ++i)
    for (long j = 0; j < dn; ++j)
      t.emplace_back(i + dn * j, new_to_old[i] + dn * new_to_old[j], Complex(1, 0));
  SuperOp s(dn * dn, dn * dn);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SuperOp so_compose(const SuperOp& outer, const SuperOp& inner) { return SuperOp(outer * inner); }

MatrixExpr expr_of(int var, SuperOp map, int out_dim) {
  MatrixExpr e;
  e.dim = out_dim;
  if (map.rows() != static_cast<long>(out_dim) * out_dim)
    throw std::invalid_argument("expr_of: map output dim mismatch");
  e.terms.push_back({var, std::move(map)});
  return e;
}

MatrixExpr& operator+=(MatrixExpr& e, const MatrixExpr& other) {
  if (e.dim != other.dim) throw std::invalid_argument("MatrixExpr +=: dim mismatch");
  e.terms.insert(e.terms.end(), other.terms.begin(), other.terms.end());
  return e;
}

// ---------------------------------------------------------------------------
// problem assembly
// ---------------------------------------------------------------------------

int ConicProblem::add_var(const std::string& id, int dim, const std::string& role) {
  if (dim < 1) throw std::invalid_argument("add_var: dim must be >= 1");
  vars.push_back({id, dim, role});
  return static_cast<int>(vars.size()) - 1;
}

void ConicProblem::add_equality(MatrixExpr expr, Matrix rhs, const std::string& name) {
  if (rhs.rows() != expr.dim || rhs.cols() != expr.dim)
    throw std::invalid_argument("add_equality '" + name + "': rhs dim mismatch");
  for (const auto& term : expr.terms) {
    const HermVar& v = vars.at(term.var);
    if (term.map.cols() != static_cast<long>(v.dim) * v.dim)
      throw std::invalid_argument("add_equality '" + name + "': map input dim mismatch");
  }
  equalities.push_back({std::move(expr), std::move(rhs), name});
}

void ConicProblem::add_psd_upper_bound(MatrixExpr expr, Matrix rhs, const std::string& name) {
  if (rhs.rows() != expr.dim || rhs.cols() != expr.dim)
    throw std::invalid_argument("add_psd_upper_bound '" + name + "': rhs dim mismatch");
  psd_inequalities.push_back({std::move(expr), std::move(rhs), name});
}

void ConicProblem::add_objective(int v, const Matrix& a) {
  const HermVar& hv = vars.at(v);
  if (a.rows() != hv.dim || a.cols() != hv.dim)
    throw std::invalid_argument("add_objective: coefficient dim mismatch");
  objective_terms.emplace_back(v, herm_part(a));
}

RealMatrix realify(const Matrix& herm) {
  const long n = herm.rows();
  RealMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = herm.real();
  out.bottomRightCorner(n, n) = herm.real();
  out.topRightCorner(n, n) = -herm.imag();
  out.bottomLeftCorner(n, n) = herm.imag();
  return out;
}

Matrix unrealify(const RealMatrix& sym) {
  const long n = sym.rows() / 2;
  Matrix out(n, n);
  out.real() = 0.5 * (sym.topLeftCorner(n, n) + sym.bottomRightCorner(n, n));
  out.imag() = 0.5 * (sym.bottomLeftCorner(n, n) - sym.topRightCorner(n, n));
  return herm_part(out);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    default: return "numerical-trouble";
  }
}

// ---------------------------------------------------------------------------
// compiled form: realified blocks and scalarized rows
// ---------------------------------------------------------------------------

namespace {

struct BlockCoeff {
  int row = 0;  // scalar row index
  std::vector<int> ri, ci;
  std::vector<double> v;  // full symmetric triplets of realify(A)/2
};

struct CompiledSdp {
  std::vector<int> block_dim;                        // realified sizes
  std::vector<std::vector<BlockCoeff>> block_rows;   // per block
  std::vector<RealMatrix> cost;                      // per block (internal min sense)
  Eigen::VectorXd b;
  int n_rows = 0;
  int n_vars = 0;  // leading blocks are variables, the rest slacks
  double maxabs_coeff = 1.0;
};

// Hermitian coefficient matrix of one scalar probe against one term,
// A = herm(mat(adj(map) vec(E))).
void accumulate_coeff(const SuperOp& adj, const std::vector<std::pair<long, Complex>>& probe_vec,
                      int vdim, std::map<std::pair<int, int>, Complex>& entries) {
  for (const auto& [idx, w] : probe_vec) {
    for (SuperOp::InnerIterator it(adj, idx); it; ++it) {
      long r = it.row() % vdim, c = it.row() / vdim;  // column-major vec index
      entries[{static_cast<int>(r), static_cast<int>(c)}] += w * it.value();
    }
  }
}

void emit_block_coeff(const std::map<std::pair<int, int>, Complex>& entries, int vdim, int row,
                      std::vector<BlockCoeff>& sink, double& maxabs) {
  // hermitize, then realify/2 into full symmetric triplets
  std::map<std::pair<int, int>, Complex> herm;
  for (const auto& [rc, val] : entries) {
    herm[rc] += 0.5 * val;
    herm[{rc.second, rc.first}] += 0.5 * std::conj(val);
  }
  BlockCoeff bc;
  bc.row = row;
  for (const auto& [rc, val] : herm) {
    auto [r, c] = rc;
    double x = 0.5 * val.real(), y = 0.5 * val.imag();
    if (x != 0.0) {
      bc.ri.push_back(r);
      bc.ci.push_back(c);
      bc.v.push_back(x);
      bc.ri.push_back(vdim + r);
      bc.ci.push_back(vdim + c);
      bc.v.push_back(x);
      maxabs = std::max(maxabs, std::abs(x));
    }
    if (y != 0.0) {
      bc.ri.push_back(r);
      bc.ci.push_back(vdim + c);
      bc.v.push_back(-y);
      bc.ri.push_back(vdim + r);
      bc.ci.push_back(c);
      bc.v.push_back(y);
      maxabs = std::max(maxabs, std::abs(y));
    }
  }
  if (!bc.v.empty()) sink.push_back(std::move(bc));
}

struct Probe {
  std::vector<std::pair<long, Complex>> vec;  // column-major vec entries of E
  double rhs_value = 0.0;
};

CompiledSdp compile(const ConicProblem& p) {
  CompiledSdp c;
  c.n_vars = static_cast<int>(p.vars.size());
  for (const auto& v : p.vars) c.block_dim.push_back(2 * v.dim);
  for (const auto& ineq : p.psd_inequalities) c.block_dim.push_back(2 * ineq.expr.dim);
  c.block_rows.resize(c.block_dim.size());

  // objective (internal sense: minimize)
  const double sign = p.maximize ? -1.0 : 1.0;
  for (size_t b = 0; b < c.block_dim.size(); ++b)
    c.cost.emplace_back(RealMatrix::Zero(c.block_dim[b], c.block_dim[b]));
  for (const auto& [v, a] : p.objective_terms) c.cost[v] += sign * 0.5 * realify(a);

  // scalarize constraints, one Hermitian probe per scalar row
  std::vector<double> bvals;
  auto add_constraint = [&](const MatrixExpr& expr, const Matrix& rhs, int slack_block) {
    const int m = expr.dim;
    std::vector<SuperOp> adjoints;
    adjoints.reserve(expr.terms.size());
    for (const auto& t : expr.terms) adjoints.push_back(t.map.adjoint());

    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        for (int part = 0; part < (a == b ? 1 : 2); ++part) {
          Probe probe;
          if (a == b) {
            probe.vec = {{a + static_cast<long>(m) * a, Complex(1, 0)}};
            probe.rhs_value = rhs(a, a).real();
          } else if (part == 0) {
            probe.vec = {{a + static_cast<long>(m) * b, Complex(0.5, 0)},
                         {b + static_cast<long>(m) * a, Complex(0.5, 0)}};
            probe.rhs_value = rhs(a, b).real();
          } else {
            probe.vec = {{a + static_cast<long>(m) * b, Complex(0, 0.5)},
                         {b + static_cast<long>(m) * a, Complex(0, -0.5)}};
            probe.rhs_value = rhs(a, b).imag();
          }
          int row = c.n_rows++;
          bvals.push_back(probe.rhs_value);
          // terms hitting the same variable are merged into one coefficient
          std::map<int, std::map<std::pair<int, int>, Complex>> per_var;
          for (size_t t = 0; t < expr.terms.size(); ++t)
            accumulate_coeff(adjoints[t], probe.vec, p.vars[expr.terms[t].var].dim,
                             per_var[expr.terms[t].var]);
          for (const auto& [v, entries] : per_var)
            emit_block_coeff(entries, p.vars[v].dim, row, c.block_rows[v], c.maxabs_coeff);
          if (slack_block >= 0) {
            std::map<std::pair<int, int>, Complex> entries;
            for (const auto& [idx, w] : probe.vec)
              entries[{static_cast<int>(idx % m), static_cast<int>(idx / m)}] += w;
            emit_block_coeff(entries, m, row, c.block_rows[slack_block], c.maxabs_coeff);
          }
        }
      }
    }
  };

  for (const auto& eq : p.equalities) add_constraint(eq.expr, eq.rhs, -1);
  for (size_t i = 0; i < p.psd_inequalities.size(); ++i)
    add_constraint(p.psd_inequalities[i].expr, p.psd_inequalities[i].rhs,
                   c.n_vars + static_cast<int>(i));

  c.b = Eigen::Map<Eigen::VectorXd>(bvals.data(), bvals.size());
  return c;
}

// <A_k, M> with full symmetric triplets
double coeff_dot(const BlockCoeff& a, const RealMatrix& m) {
  double acc = 0.0;
  for (size_t u = 0; u < a.v.size(); ++u) acc += a.v[u] * m(a.ri[u], a.ci[u]);
  return acc;
}

// <A_k, W A_l W> = sum_{u,v} a_u b_v W(j_u, i_v) W(j_v, i_u)
double coeff_pair(const BlockCoeff& a, const BlockCoeff& b, const RealMatrix& w) {
  double acc = 0.0;
  for (size_t u = 0; u < a.v.size(); ++u) {
    const double au = a.v[u];
    const int iu = a.ri[u], ju = a.ci[u];
    double inner = 0.0;
    for (size_t t = 0; t < b.v.size(); ++t) inner += b.v[t] * w(ju, b.ri[t]) * w(b.ci[t], iu);
    acc += au * inner;
  }
  return acc;
}

void scatter_add(const BlockCoeff& a, double y, RealMatrix& m) {
  for (size_t u = 0; u < a.v.size(); ++u) m(a.ri[u], a.ci[u]) += y * a.v[u];
}

// Pivoted Cholesky rank detection on the constraint Gram matrix; returns the
// kept (independent) row set in pivot order.
std::vector<int> independent_rows(const CompiledSdp& c) {
  const int m = c.n_rows;
  RealMatrix gram = RealMatrix::Zero(m, m);
  for (size_t blk = 0; blk < c.block_rows.size(); ++blk) {
    const auto& rows = c.block_rows[blk];
    const int nr = static_cast<int>(rows.size());
    for (int x = 0; x < nr; ++x) {
      for (int y = 0; y <= x; ++y) {
        double dot = 0.0;
        const BlockCoeff& a = rows[x];
        const BlockCoeff& b = rows[y];
        for (size_t u = 0; u < a.v.size(); ++u)
          for (size_t t = 0; t < b.v.size(); ++t)
            if (a.ri[u] == b.ri[t] && a.ci[u] == b.ci[t]) dot += a.v[u] * b.v[t];
        gram(a.row, b.row) += dot;
        if (a.row != b.row) gram(b.row, a.row) += dot;
      }
    }
  }

  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  Eigen::VectorXd d = gram.diagonal();
  RealMatrix l = RealMatrix::Zero(m, m);
  const double tol_pivot = 1e-10 * std::max(1.0, d.maxCoeff());
  std::vector<int> kept;
  for (int step = 0; step < m; ++step) {
    int piv = step;
    for (int i = step; i < m; ++i)
      if (d(perm[i]) > d(perm[piv])) piv = i;
    if (d(perm[piv]) <= tol_pivot) break;
    std::swap(perm[step], perm[piv]);
    const int pr = perm[step];
    kept.push_back(pr);
    double root = std::sqrt(d(pr));
    l(pr, step) = root;
    for (int i = step + 1; i < m; ++i) {
      const int r = perm[i];
      double val = gram(r, pr);
      for (int k = 0; k < step; ++k) val -= l(r, k) * l(pr, k);
      l(r, step) = val / root;
      d(r) -= l(r, step) * l(r, step);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

struct NtScaling {
  RealMatrix g, gi, w;
  Eigen::VectorXd d;
};

bool nt_scaling(const RealMatrix& x, const RealMatrix& s, NtScaling& out) {
  Eigen::LLT<RealMatrix> lx(x), ls(s);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  RealMatrix lxm = lx.matrixL();
  RealMatrix lsm = ls.matrixL();
  Eigen::JacobiSVD<RealMatrix> svd(lsm.transpose() * lxm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd sv = svd.singularValues();
  if (sv.minCoeff() <= 0) return false;
  Eigen::VectorXd isqrt = sv.array().sqrt().inverse();
  out.g = lxm * svd.matrixV() * isqrt.asDiagonal();
  out.gi = isqrt.asDiagonal() * svd.matrixU().transpose() * lsm.transpose();
  out.w = out.g * out.g.transpose();
  out.d = sv;
  return true;
}

// largest step alpha with D + alpha * M >= 0, for diagonal D > 0
double max_step_scaled(const Eigen::VectorXd& d, const RealMatrix& m) {
  Eigen::VectorXd di = d.array().sqrt().inverse();
  RealMatrix scaled = di.asDiagonal() * m * di.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(scaled, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

}  // namespace

// ---------------------------------------------------------------------------
// interior-point solver (NT scaling, Mehrotra predictor-corrector)
// ---------------------------------------------------------------------------

SolveReport solve(const ConicProblem& p, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve(p, opts);
}

SolveReport solve(const ConicProblem& p, const SolverOptions& opts) {
  if (opts.tol < 1e-10 || opts.tol > 1e-4)
    throw std::invalid_argument("solve: tol must lie in [1e-10, 1e-4]");
  CompiledSdp c = compile(p);
  const int nb = static_cast<int>(c.block_dim.size());

  std::vector<int> kept = independent_rows(c);
  std::vector<int> row_map(c.n_rows, -1);
  for (size_t k = 0; k < kept.size(); ++k) row_map[kept[k]] = static_cast<int>(k);
  const int m = static_cast<int>(kept.size());
  Eigen::VectorXd b(m);
  for (int k = 0; k < m; ++k) b(k) = c.b(kept[k]);

  // per-block coefficient lists restricted to kept rows
  std::vector<std::vector<BlockCoeff>> rows(nb);
  for (int blk = 0; blk < nb; ++blk)
    for (const auto& bc : c.block_rows[blk])
      if (row_map[bc.row] >= 0) {
        BlockCoeff copy = bc;
        copy.row = row_map[bc.row];
        rows[blk].push_back(std::move(copy));
      }

  double nu = 0.0;
  for (int d : c.block_dim) nu += d;
  double bnorm = 1.0 + b.norm();
  double cnorm = 1.0;
  for (const auto& cb : c.cost) cnorm += cb.squaredNorm();
  cnorm = std::sqrt(cnorm);

  // starting point
  double xi_p = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  double xi_d = std::max(1.0, c.maxabs_coeff);
  std::vector<RealMatrix> x, s, rd, wrw, rmat, dxa, dsa, dx, ds;
  for (int blk = 0; blk < nb; ++blk) {
    x.emplace_back(xi_p * RealMatrix::Identity(c.block_dim[blk], c.block_dim[blk]));
    s.emplace_back(xi_d * RealMatrix::Identity(c.block_dim[blk], c.block_dim[blk]));
    rd.emplace_back(RealMatrix::Zero(c.block_dim[blk], c.block_dim[blk]));
    wrw.emplace_back(rd.back());
    rmat.emplace_back(rd.back());
    dxa.emplace_back(rd.back());
    dsa.emplace_back(rd.back());
    dx.emplace_back(rd.back());
    ds.emplace_back(rd.back());
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  SolveReport report;
  report.assignments.resize(p.vars.size());
  report.slack_assignments.resize(p.psd_inequalities.size());
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<RealMatrix> best_x = x;
  Eigen::VectorXd best_y = y;
  double best_pobj = 0.0, best_dobj = 0.0, best_pres = 1.0, best_dres = 1.0, best_gapn = 1.0;

  std::vector<NtScaling> nt(nb);
  RealMatrix schur(m, m);
  const double eta = 0.99;
  int iter = 0;
  SolveStatus status = SolveStatus::numerical_trouble;

  for (iter = 0; iter < opts.max_iterations; ++iter) {
    // residuals
    Eigen::VectorXd rp = b;
    double pobj = 0.0, mu = 0.0;
    for (int blk = 0; blk < nb; ++blk) {
      for (const auto& bc : rows[blk]) rp(bc.row) -= coeff_dot(bc, x[blk]);
      pobj += (c.cost[blk].array() * x[blk].array()).sum();
      mu += (x[blk].array() * s[blk].array()).sum();
    }
    mu /= nu;
    double dobj = b.dot(y);
    for (int blk = 0; blk < nb; ++blk) {
      rd[blk] = c.cost[blk] - s[blk];
      for (const auto& bc : rows[blk]) scatter_add(bc, -y(bc.row), rd[blk]);
    }

    double pres = rp.norm() / bnorm;
    double dres = 0.0;
    for (int blk = 0; blk < nb; ++blk) dres += rd[blk].squaredNorm();
    dres = std::sqrt(dres) / cnorm;
    double gapn = std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
    double compl_gap = mu * nu / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));

    double err = std::max({pres, dres, gapn});
    if (err < best_err) {
      best_err = err;
      best_x = x;
      best_y = y;
      best_pobj = pobj;
      best_dobj = dobj;
      best_pres = pres;
      best_dres = dres;
      best_gapn = gapn;
    }
    if (opts.verbosity > 0)
      std::fprintf(stderr, "it %2d  pobj % .8e dobj % .8e  pres %.2e dres %.2e gap %.2e mu %.2e\n",
                   iter, pobj, dobj, pres, dres, gapn, mu);

    if (pres <= opts.tol && dres <= opts.tol && (gapn <= opts.tol || compl_gap <= opts.tol)) {
      status = SolveStatus::optimal;
      break;
    }

    // Farkas-type primal infeasibility test: A*(y) <= 0 with b'y > 0.
    // Only meaningful while the primal residual refuses to converge.
    if (dobj > 1e-8 * bnorm && pres > 10 * opts.tol && iter > 5) {
      double viol = 0.0;
      for (int blk = 0; blk < nb; ++blk) {
        RealMatrix z = RealMatrix::Zero(c.block_dim[blk], c.block_dim[blk]);
        for (const auto& bc : rows[blk]) scatter_add(bc, y(bc.row), z);
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(z, Eigen::EigenvaluesOnly);
        viol = std::max(viol, es.eigenvalues().maxCoeff());
      }
      if (viol * 10.0 < opts.tol * dobj) {
        status = SolveStatus::infeasible;
        break;
      }
    }

    // NT scaling
    bool ok = true;
    for (int blk = 0; blk < nb && ok; ++blk) ok = nt_scaling(x[blk], s[blk], nt[blk]);
    if (!ok) break;

    // Schur complement, lower triangle
    schur.setZero();
    for (int blk = 0; blk < nb; ++blk) {
      const auto& rb = rows[blk];
      const int nr = static_cast<int>(rb.size());
      const RealMatrix& w = nt[blk].w;
      const bool par = parallel_enabled() && nr > 64;
#ifdef COMB_ENERGY_HAS_OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (par)
#endif
      for (int a = 0; a < nr; ++a) {
        for (int d2 = 0; d2 <= a; ++d2) {
          double v = coeff_pair(rb[a], rb[d2], w);
          int ra = rb[a].row, rb2 = rb[d2].row;
          if (ra >= rb2)
            schur(ra, rb2) += v;
          else
            schur(rb2, ra) += v;
        }
      }
      (void)par;
    }
    schur = schur.selfadjointView<Eigen::Lower>();

    Eigen::LLT<RealMatrix> llt(schur);
    RealMatrix schur_reg;
    Eigen::LDLT<RealMatrix> ldlt;
    bool use_ldlt = false;
    if (llt.info() != Eigen::Success) {
      schur_reg = schur + 1e-12 * std::max(1.0, schur.diagonal().maxCoeff()) *
                              RealMatrix::Identity(m, m);
      ldlt.compute(schur_reg);
      use_ldlt = true;
    }
    auto solve_schur = [&](const Eigen::VectorXd& rhs) {
      return use_ldlt ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd(llt.solve(rhs));
    };

    for (int blk = 0; blk < nb; ++blk) wrw[blk] = nt[blk].w * rd[blk] * nt[blk].w;

    auto assemble_rhs = [&](const std::vector<RealMatrix>& r) {
      Eigen::VectorXd rhs = rp;
      for (int blk = 0; blk < nb; ++blk)
        for (const auto& bc : rows[blk]) rhs(bc.row) += coeff_dot(bc, wrw[blk]) - coeff_dot(bc, r[blk]);
      return rhs;
    };
    auto recover_direction = [&](const Eigen::VectorXd& dy, const std::vector<RealMatrix>& r,
                                 std::vector<RealMatrix>& dxo, std::vector<RealMatrix>& dso) {
      for (int blk = 0; blk < nb; ++blk) {
        dso[blk] = rd[blk];
        for (const auto& bc : rows[blk]) scatter_add(bc, -dy(bc.row), dso[blk]);
        dso[blk] = 0.5 * (dso[blk] + dso[blk].transpose()).eval();
        dxo[blk] = r[blk] - nt[blk].w * dso[blk] * nt[blk].w;
        dxo[blk] = 0.5 * (dxo[blk] + dxo[blk].transpose()).eval();
      }
    };

    // predictor
    for (int blk = 0; blk < nb; ++blk) rmat[blk] = -x[blk];
    Eigen::VectorXd dy_a = solve_schur(assemble_rhs(rmat));
    recover_direction(dy_a, rmat, dxa, dsa);

    double ap = 1.0, ad = 1.0;
    std::vector<RealMatrix> dxh(nb), dsh(nb);
    for (int blk = 0; blk < nb; ++blk) {
      dxh[blk] = nt[blk].gi * dxa[blk] * nt[blk].gi.transpose();
      dsh[blk] = nt[blk].g.transpose() * dsa[blk] * nt[blk].g;
      ap = std::min(ap, max_step_scaled(nt[blk].d, dxh[blk]));
      ad = std::min(ad, max_step_scaled(nt[blk].d, dsh[blk]));
    }
    double mu_aff = 0.0;
    for (int blk = 0; blk < nb; ++blk) {
      Eigen::VectorXd d = nt[blk].d;
      RealMatrix xa = d.asDiagonal();
      mu_aff += ((xa + ap * dxh[blk]).array() * (xa + ad * dsh[blk]).transpose().array()).sum();
    }
    mu_aff = std::max(mu_aff / nu, 0.0);
    double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-10, 1.0);

    // corrector
    for (int blk = 0; blk < nb; ++blk) {
      const Eigen::VectorXd& d = nt[blk].d;
      RealMatrix rc = -0.5 * (dxh[blk] * dsh[blk] + dsh[blk] * dxh[blk]);
      rc.diagonal().array() += sigma * mu;
      rc.diagonal() -= d.cwiseProduct(d);
      // K_ij = 2 rc_ij / (d_i + d_j), then back to the unscaled frame
      for (int i = 0; i < rc.rows(); ++i)
        for (int j = 0; j < rc.cols(); ++j) rc(i, j) = 2.0 * rc(i, j) / (d(i) + d(j));
      rmat[blk] = nt[blk].g * rc * nt[blk].g.transpose();
    }
    Eigen::VectorXd dy = solve_schur(assemble_rhs(rmat));
    recover_direction(dy, rmat, dx, ds);

    ap = ad = 1.0 / eta;
    for (int blk = 0; blk < nb; ++blk) {
      RealMatrix dxs = nt[blk].gi * dx[blk] * nt[blk].gi.transpose();
      RealMatrix dss = nt[blk].g.transpose() * ds[blk] * nt[blk].g;
      ap = std::min(ap, max_step_scaled(nt[blk].d, dxs));
      ad = std::min(ad, max_step_scaled(nt[blk].d, dss));
    }
    ap = std::min(1.0, eta * ap);
    ad = std::min(1.0, eta * ad);

    for (int blk = 0; blk < nb; ++blk) {
      x[blk] += ap * dx[blk];
      s[blk] += ad * ds[blk];
    }
    y += ad * dy;
    if (mu < 1e-15 && status != SolveStatus::optimal) break;
  }

  // report from the best iterate
  const double sign = p.maximize ? -1.0 : 1.0;
  report.status = status;
  report.iterations = iter;
  report.primal_residual = best_pres;
  report.dual_residual = best_dres;
  report.duality_gap = best_gapn;
  report.value = sign * best_pobj + p.objective_constant;
  report.dual_value = sign * best_dobj + p.objective_constant;
  for (size_t v = 0; v < p.vars.size(); ++v) report.assignments[v] = unrealify(best_x[v]);
  for (size_t i = 0; i < p.psd_inequalities.size(); ++i)
    report.slack_assignments[i] = unrealify(best_x[c.n_vars + i]);
  return report;
}

// ---------------------------------------------------------------------------
// certification and dump
// ---------------------------------------------------------------------------

namespace {

Matrix eval_expr(const MatrixExpr& expr, const std::vector<Matrix>& assignment) {
  Matrix out = Matrix::Zero(expr.dim, expr.dim);
  for (const auto& t : expr.terms) {
    const Matrix& xv = assignment.at(t.var);
    Eigen::Map<const CVector> vx(xv.data(), xv.size());
    CVector vout = t.map * vx;
    out += Eigen::Map<const Matrix>(vout.data(), expr.dim, expr.dim);
  }
  return out;
}

}  // namespace

Certificate certify(const SolveReport& report, const ConicProblem& p, double tol) {
  Certificate cert;
  double eqres = 0.0;
  for (const auto& eq : p.equalities)
    eqres = std::max(eqres, (eval_expr(eq.expr, report.assignments) - eq.rhs).norm() /
                                (1.0 + eq.rhs.norm()));
  double psd = 0.0;
  for (size_t v = 0; v < p.vars.size(); ++v)
    psd = std::min(psd, lambda_min(report.assignments[v]));
  for (const auto& ineq : p.psd_inequalities)
    psd = std::min(psd, lambda_min(Matrix(ineq.rhs - eval_expr(ineq.expr, report.assignments))));

  double primal = p.objective_constant;
  for (const auto& [v, a] : p.objective_terms)
    primal += (a * report.assignments[v]).trace().real();
  double gap = std::abs(primal - report.dual_value) /
               (1.0 + std::max(std::abs(primal), std::abs(report.dual_value)));

  cert.equality_residual = eqres;
  cert.psd_violation = psd;
  cert.gap = gap;
  cert.ok = report.status == SolveStatus::optimal && eqres <= 100 * tol && psd >= -100 * tol &&
            gap <= 10 * tol;
  return cert;
}

void dump_sdp(const ConicProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_sdp: cannot open '" + path + "'");
  out << "# conic problem dump: <section> <row> <var> <i> <j> <re> <im>\n";
  out << "# sections: o = objective (row is 0), e = equality, q = psd upper bound\n";
  out << "# var = -1 addresses the right-hand side\n";
  out.precision(17);
  for (const auto& [v, a] : p.objective_terms)
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        if (a(i, j) != Complex(0, 0))
          out << "o 0 " << v << ' ' << i << ' ' << j << ' ' << a(i, j).real() << ' '
              << a(i, j).imag() << '\n';

  auto dump_constraints = [&](const char* tag, const auto& list) {
    int row = 0;
    for (const auto& con : list) {
      for (const auto& t : con.expr.terms) {
        const int vd = p.vars[t.var].dim;
        for (int k = 0; k < t.map.outerSize(); ++k)
          for (SuperOp::InnerIterator it(t.map, k); it; ++it) {
            // dump the superoperator entry indexed by output (i,j) pair
            long oi = it.row() % con.expr.dim, oj = it.row() / con.expr.dim;
            long ii = it.col() % vd, ij = it.col() / vd;
            out << tag << ' ' << row << ' ' << t.var << ' ' << oi << ',' << ii << ' ' << oj << ','
                << ij << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
          }
      }
      for (int i = 0; i < con.rhs.rows(); ++i)
        for (int j = 0; j < con.rhs.cols(); ++j)
          if (con.rhs(i, j) != Complex(0, 0))
            out << tag << ' ' << row << " -1 " << i << ' ' << j << ' ' << con.rhs(i, j).real()
                << ' ' << con.rhs(i, j).imag() << '\n';
      ++row;
    }
  };
  dump_constraints("e", p.equalities);
  dump_constraints("q", p.psd_inequalities);
}

}  // namespace combenergy
