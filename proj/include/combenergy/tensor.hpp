// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace combenergy {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Global hermiticity tolerance (max-abs entry deviation).
inline constexpr double kHermTol = 1e-10;

/// One labeled Hilbert-space factor: identifier, dimension and Hamiltonian.
/// Hamiltonians are Hermitian with ground energy 0.
struct SpaceLabel {
  std::string id;
  int dim = 1;
  Matrix hamiltonian;  // dim x dim

  SpaceLabel() = default;
  SpaceLabel(std::string id_, int dim_, Matrix h);

  // dim-1 factor with zero Hamiltonian (the trivial space)
  static SpaceLabel trivial(std::string id);
  // zero Hamiltonian in dimension d
  static SpaceLabel degenerate(std::string id, int d);
  // equal-spaced spectrum diag(0, 1, ..., d-1)
  static SpaceLabel number(std::string id, int d);
};

/// Throws std::invalid_argument if dim < 1, the Hamiltonian is not Hermitian
/// within 1e-12, or its minimum eigenvalue is not 0 within 1e-9.
void check_label(const SpaceLabel& l);

/// Dense complex square matrix attached to an ordered list of labeled factors.
/// The factor order of `labels` is the storage order of the matrix indices
/// (first label most significant, matching the Kronecker product convention).
struct LabeledOperator {
  std::vector<SpaceLabel> labels;
  Matrix matrix;

  LabeledOperator() = default;
  LabeledOperator(std::vector<SpaceLabel> labels_, Matrix matrix_);

  int dim() const { return static_cast<int>(matrix.rows()); }
  std::vector<int> dims() const;
  int index_of(const std::string& id) const;  // -1 if absent
  bool has(const std::string& id) const { return index_of(id) >= 0; }
  const SpaceLabel& label(const std::string& id) const;

  bool is_canonical() const;
  // Same operator with labels sorted ascending by id.
  LabeledOperator canonical() const;
};

std::vector<std::string> label_ids(const std::vector<SpaceLabel>& labels);

/// Kronecker product; result labels = a.labels ++ b.labels. Label ids must be
/// disjoint.
LabeledOperator tensor_product(const LabeledOperator& a, const LabeledOperator& b);

/// Trace over the factors in `subset`; remaining labels keep their order.
/// Tracing out everything yields a 1x1 operator with no labels.
LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<std::string>& subset);

/// Transpose on the listed factors only. Involution.
LabeledOperator partial_transpose(const LabeledOperator& a, const std::vector<std::string>& subset);

/// Reindex the matrix so the factors appear in the requested order.
/// `order` must be a permutation of a's label ids.
LabeledOperator permute_spaces(const LabeledOperator& a, const std::vector<std::string>& order);

/// a (on a subset of `full`) tensored with identity on the missing factors,
/// reindexed to the factor order of `full`.
LabeledOperator embed_with_identity(const LabeledOperator& a, const std::vector<SpaceLabel>& full);

/// Replace the factor group `ids` (brought together, in the listed order, at
/// the position of the first id) by one fused label: dims multiply and
/// Hamiltonians add (H1 (x) I + I (x) H2 + ...).
LabeledOperator fuse_labels(const LabeledOperator& a, const std::vector<std::string>& ids,
                            const std::string& fused_id);

struct EigResult {
  RealVector values;  // ascending
  Matrix vectors;     // columns; a = vectors * values.asDiagonal() * vectors.adjoint()
};

/// Eigendecomposition of a Hermitian matrix. Throws if the input deviates
/// from Hermiticity by more than `tol` in max-abs entry.
EigResult eig_hermitian(const Matrix& a, double tol = kHermTol);
EigResult eig_hermitian(const LabeledOperator& a, double tol = kHermTol);

double lambda_max(const Matrix& hermitian);
double lambda_min(const Matrix& hermitian);

/// Choi operator of the channel with the given Kraus operators, on factors
/// (in, out) in that order: C = sum_k (I (x) K_k) |I>><<I| (I (x) K_k)^dag.
/// Checks sum K^dag K = I within 1e-10 unless sub_normalized is set.
LabeledOperator choi_of_kraus(const std::vector<Matrix>& kraus, const SpaceLabel& in,
                              const SpaceLabel& out, bool sub_normalized = false);

// Small dense helpers.
Matrix kron(const Matrix& a, const Matrix& b);
Matrix dagger(const Matrix& a);
Matrix herm_part(const Matrix& a);  // (a + a^dag)/2
bool is_hermitian(const Matrix& a, double tol = kHermTol);
double max_abs(const Matrix& a);
Matrix cidentity(int n);

/// Unnormalized maximally entangled vector sum_j |jj> in dimension d*d.
CVector omega_vector(int d);

/// Discrete Fourier transform matrix F[j,k] = exp(2 pi i j k / d)/sqrt(d).
Matrix fourier_matrix(int d);

}  // namespace combenergy
