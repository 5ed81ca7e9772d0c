// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "combenergy/tensor.hpp"

namespace combenergy {

/// Hermitian PSD decision variable.
struct HermVar {
  std::string id;
  int dim = 1;
  std::string role;
};

/// Linear map on a Hermitian variable, as a sparse superoperator acting on
/// the column-major vectorization: vec(X) in C^{d^2} -> vec(M) in C^{m^2}.
using SuperOp = Eigen::SparseMatrix<Complex>;

SuperOp so_identity(int d);
SuperOp so_scale(Complex s, int d);
/// X -> L X R for fixed matrices (L: m x d, R: d x m).
SuperOp so_left_right(const Matrix& l, const Matrix& r);
/// X -> M X M^dag.
SuperOp so_sandwich(const Matrix& m);
/// X on factors `dims` -> Tr over the positions in `traced`.
SuperOp so_partial_trace(const std::vector<int>& dims, const std::vector<int>& traced);
/// X -> X^{T_subset} on factors `dims`.
SuperOp so_partial_transpose(const std::vector<int>& dims, const std::vector<int>& subset);
/// Embed X (living on the factors of `out_dims` listed in `var_positions`,
/// in that order) into the full space, with fixed matrices on the remaining
/// positions (identity when a position is absent from `fixed`).
SuperOp so_embed(const std::vector<int>& out_dims, const std::vector<int>& var_positions,
                 const std::vector<std::pair<int, Matrix>>& fixed = {});
/// Permute the factors of X from `dims` order into the order given by `perm`
/// (perm[r] = source position of result factor r).
SuperOp so_permute(const std::vector<int>& dims, const std::vector<int>& perm);
/// outer after inner.
SuperOp so_compose(const SuperOp& outer, const SuperOp& inner);

struct LinTerm {
  int var = -1;
  SuperOp map;
};

/// Sum of linear maps of variables, Hermitian-valued on Hermitian inputs.
struct MatrixExpr {
  int dim = 1;
  std::vector<LinTerm> terms;
};

MatrixExpr expr_of(int var, SuperOp map, int out_dim);
MatrixExpr& operator+=(MatrixExpr& e, const MatrixExpr& other);

struct EqConstraint {
  MatrixExpr expr;
  Matrix rhs;
  std::string name;
};

struct PsdConstraint {  // expr <= rhs in the PSD order
  MatrixExpr expr;
  Matrix rhs;
  std::string name;
};

/// Linear objective sum_i Re Tr[A_i X_i] + constant over Hermitian PSD
/// variables with affine equality and PSD-inequality constraints.
struct ConicProblem {
  std::vector<HermVar> vars;
  std::vector<EqConstraint> equalities;
  std::vector<PsdConstraint> psd_inequalities;
  bool maximize = true;
  std::vector<std::pair<int, Matrix>> objective_terms;
  double objective_constant = 0.0;

  int add_var(const std::string& id, int dim, const std::string& role);
  const HermVar& var(int v) const { return vars.at(v); }
  void add_equality(MatrixExpr expr, Matrix rhs, const std::string& name);
  void add_psd_upper_bound(MatrixExpr expr, Matrix rhs, const std::string& name);
  void add_objective(int var, const Matrix& a);  // accumulates
};

enum class SolveStatus { optimal, infeasible, numerical_trouble };

std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_trouble;
  double value = 0.0;  // objective in the problem's sense, constant included
  std::vector<Matrix> assignments;       // per variable, Hermitian
  std::vector<Matrix> slack_assignments; // per PSD inequality, rhs - expr
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;  // relative
  int iterations = 0;
  double dual_value = 0.0;   // in the problem's sense
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 120;
  int verbosity = 0;
};

SolveReport solve(const ConicProblem& p, double tol = 1e-7);
SolveReport solve(const ConicProblem& p, const SolverOptions& opts);

/// Independent post-check of a report: recomputes feasibility residuals and
/// the objective from the problem data, and bounds the gap against the
/// solver-reported dual value.
struct Certificate {
  bool ok = false;
  double equality_residual = 0.0;   // max Frobenius residual over equalities
  double psd_violation = 0.0;       // most negative eigenvalue over vars/slacks
  double gap = 0.0;                 // |recomputed primal - dual| (relative)
};

Certificate certify(const SolveReport& report, const ConicProblem& p, double tol);

/// Complex -> real symmetric embedding M -> [[Re M, -Im M], [Im M, Re M]].
/// Tr doubles under the embedding; solver-side coefficients are pre-divided
/// by 2 so reported values match the complex formulation.
RealMatrix realify(const Matrix& herm);
Matrix unrealify(const RealMatrix& sym);

/// Plain-text sparse triplet dump (`section row var i j re im`) of the
/// objective, equality and PSD-inequality data, for external cross-checking.
void dump_sdp(const ConicProblem& p, const std::string& path);

}  // namespace combenergy
