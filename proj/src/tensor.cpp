// SPDX-License-Identifier: Apache-2.0
#include "combenergy/tensor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace combenergy {

SpaceLabel::SpaceLabel(std::string id_, int dim_, Matrix h)
    : id(std::move(id_)), dim(dim_), hamiltonian(std::move(h)) {}

SpaceLabel SpaceLabel::trivial(std::string id) {
  return SpaceLabel(std::move(id), 1, Matrix::Zero(1, 1));
}

SpaceLabel SpaceLabel::degenerate(std::string id, int d) {
  return SpaceLabel(std::move(id), d, Matrix::Zero(d, d));
}

SpaceLabel SpaceLabel::number(std::string id, int d) {
  Matrix h = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) h(n, n) = Complex(n, 0.0);
  return SpaceLabel(std::move(id), d, std::move(h));
}

void check_label(const SpaceLabel& l) {
  if (l.dim < 1) throw std::invalid_argument("SpaceLabel '" + l.id + "': dim must be >= 1");
  if (l.hamiltonian.rows() != l.dim || l.hamiltonian.cols() != l.dim)
    throw std::invalid_argument("SpaceLabel '" + l.id + "': Hamiltonian shape mismatch");
  if (!is_hermitian(l.hamiltonian, 1e-12))
    throw std::invalid_argument("SpaceLabel '" + l.id + "': Hamiltonian not Hermitian");
  double ground = lambda_min(herm_part(l.hamiltonian));
  if (std::abs(ground) > 1e-9)
    throw std::invalid_argument("SpaceLabel '" + l.id + "': ground energy must be 0");
}

LabeledOperator::LabeledOperator(std::vector<SpaceLabel> labels_, Matrix matrix_)
    : labels(std::move(labels_)), matrix(std::move(matrix_)) {
  long prod = 1;
  std::set<std::string> seen;
  for (const auto& l : labels) {
    prod *= l.dim;
    if (!seen.insert(l.id).second)
      throw std::invalid_argument("duplicate label id '" + l.id + "'");
  }
  if (matrix.rows() != matrix.cols() || matrix.rows() != prod)
    throw std::invalid_argument("operator matrix size does not match label dims");
}

std::vector<int> LabeledOperator::dims() const {
  std::vector<int> d;
  d.reserve(labels.size());
  for (const auto& l : labels) d.push_back(l.dim);
  return d;
}

int LabeledOperator::index_of(const std::string& id) const {
  for (size_t k = 0; k < labels.size(); ++k)
    if (labels[k].id == id) return static_cast<int>(k);
  return -1;
}

const SpaceLabel& LabeledOperator::label(const std::string& id) const {
  int k = index_of(id);
  if (k < 0) throw std::invalid_argument("unknown label '" + id + "'");
  return labels[k];
}

bool LabeledOperator::is_canonical() const {
  for (size_t k = 1; k < labels.size(); ++k)
    if (labels[k - 1].id >= labels[k].id) return false;
  return true;
}

LabeledOperator LabeledOperator::canonical() const {
  if (is_canonical()) return *this;
  std::vector<std::string> order = label_ids(labels);
  std::sort(order.begin(), order.end());
  return permute_spaces(*this, order);
}

std::vector<std::string> label_ids(const std::vector<SpaceLabel>& labels) {
  std::vector<std::string> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) ids.push_back(l.id);
  return ids;
}

namespace {

// Flat index -> per-factor digits, first factor most significant.
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

std::vector<int> positions_of(const LabeledOperator& a, const std::vector<std::string>& subset) {
  std::vector<int> pos;
  pos.reserve(subset.size());
  std::set<std::string> seen;
  for (const auto& id : subset) {
    if (!seen.insert(id).second) throw std::invalid_argument("repeated label '" + id + "' in subset");
    int k = a.index_of(id);
    if (k < 0) throw std::invalid_argument("unknown label '" + id + "'");
    pos.push_back(k);
  }
  return pos;
}

}  // namespace

LabeledOperator tensor_product(const LabeledOperator& a, const LabeledOperator& b) {
  for (const auto& l : b.labels)
    if (a.has(l.id)) throw std::invalid_argument("tensor_product: duplicate label id '" + l.id + "'");
  std::vector<SpaceLabel> labels = a.labels;
  labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  return LabeledOperator(std::move(labels), kron(a.matrix, b.matrix));
}

LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<std::string>& subset) {
  std::vector<int> drop = positions_of(a, subset);
  std::vector<bool> dropped(a.labels.size(), false);
  for (int p : drop) dropped[p] = true;

  std::vector<SpaceLabel> kept;
  std::vector<int> kept_pos, drop_pos;
  for (size_t k = 0; k < a.labels.size(); ++k) {
    if (dropped[k]) drop_pos.push_back(static_cast<int>(k));
    else {
      kept.push_back(a.labels[k]);
      kept_pos.push_back(static_cast<int>(k));
    }
  }

  std::vector<int> dims = a.dims();
  long dk = 1, dt = 1;
  for (int p : kept_pos) dk *= dims[p];
  for (int p : drop_pos) dt *= dims[p];

  Matrix out = Matrix::Zero(dk, dk);
  std::vector<int> row(dims.size()), col(dims.size());
  std::vector<int> kd, td;
  for (int p : kept_pos) kd.push_back(dims[p]);
  for (int p : drop_pos) td.push_back(dims[p]);
  std::vector<int> ki(kd.size()), kj(kd.size()), ti(td.size());

  for (long i = 0; i < dk; ++i) {
    unflatten(i, kd, ki);
    for (long j = 0; j < dk; ++j) {
      unflatten(j, kd, kj);
      Complex acc(0.0, 0.0);
      for (long t = 0; t < dt; ++t) {
        unflatten(t, td, ti);
        for (size_t k = 0; k < kept_pos.size(); ++k) {
          row[kept_pos[k]] = ki[k];
          col[kept_pos[k]] = kj[k];
        }
        for (size_t k = 0; k < drop_pos.size(); ++k) {
          row[drop_pos[k]] = ti[k];
          col[drop_pos[k]] = ti[k];
        }
        acc += a.matrix(flatten(row, dims), flatten(col, dims));
      }
      out(i, j) = acc;
    }
  }
  return LabeledOperator(std::move(kept), std::move(out));
}

LabeledOperator partial_transpose(const LabeledOperator& a, const std::vector<std::string>& subset) {
  std::vector<int> pos = positions_of(a, subset);
  std::vector<bool> swap_pos(a.labels.size(), false);
  for (int p : pos) swap_pos[p] = true;

  std::vector<int> dims = a.dims();
  long n = a.dim();
  Matrix out(n, n);
  std::vector<int> ri(dims.size()), ci(dims.size()), ro(dims.size()), co(dims.size());
  for (long i = 0; i < n; ++i) {
    unflatten(i, dims, ri);
    for (long j = 0; j < n; ++j) {
      unflatten(j, dims, ci);
      for (size_t k = 0; k < dims.size(); ++k) {
        ro[k] = swap_pos[k] ? ci[k] : ri[k];
        co[k] = swap_pos[k] ? ri[k] : ci[k];
      }
      out(flatten(ro, dims), flatten(co, dims)) = a.matrix(i, j);
    }
  }
  return LabeledOperator(a.labels, std::move(out));
}

LabeledOperator permute_spaces(const LabeledOperator& a, const std::vector<std::string>& order) {
  if (order.size() != a.labels.size())
    throw std::invalid_argument("permute_spaces: order is not a permutation of the labels");
  std::vector<int> src = positions_of(a, order);

  std::vector<SpaceLabel> labels;
  std::vector<int> new_dims;
  labels.reserve(order.size());
  for (int p : src) {
    labels.push_back(a.labels[p]);
    new_dims.push_back(a.labels[p].dim);
  }

  std::vector<int> dims = a.dims();
  long n = a.dim();
  std::vector<long> map_new_to_old(n);
  std::vector<int> nd(order.size()), od(order.size());
  for (long i = 0; i < n; ++i) {
    unflatten(i, new_dims, nd);
    for (size_t k = 0; k < src.size(); ++k) od[src[k]] = nd[k];
    map_new_to_old[i] = flatten(od, dims);
  }

  Matrix out(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) out(i, j) = a.matrix(map_new_to_old[i], map_new_to_old[j]);
  return LabeledOperator(std::move(labels), std::move(out));
}

LabeledOperator embed_with_identity(const LabeledOperator& a, const std::vector<SpaceLabel>& full) {
  LabeledOperator ext = a;
  for (const auto& l : full) {
    if (ext.has(l.id)) {
      if (ext.label(l.id).dim != l.dim)
        throw std::invalid_argument("embed_with_identity: dim mismatch on '" + l.id + "'");
      continue;
    }
    ext = tensor_product(ext, LabeledOperator({l}, cidentity(l.dim)));
  }
  if (ext.labels.size() != full.size())
    throw std::invalid_argument("embed_with_identity: operator has labels outside the target set");
  return permute_spaces(ext, label_ids(full));
}

LabeledOperator fuse_labels(const LabeledOperator& a, const std::vector<std::string>& ids,
                            const std::string& fused_id) {
  if (ids.empty()) throw std::invalid_argument("fuse_labels: empty group");
  std::vector<int> group = positions_of(a, ids);
  std::set<int> in_group(group.begin(), group.end());

  std::vector<std::string> order;
  for (size_t k = 0; k < a.labels.size(); ++k) {
    if (static_cast<int>(k) == group[0]) {
      for (const auto& id : ids) order.push_back(id);
    } else if (!in_group.count(static_cast<int>(k))) {
      order.push_back(a.labels[k].id);
    }
  }
  LabeledOperator arranged = permute_spaces(a, order);

  int at = arranged.index_of(ids[0]);
  long fdim = 1;
  for (const auto& id : ids) fdim *= arranged.label(id).dim;
  Matrix fham = Matrix::Zero(fdim, fdim);
  {
    long left = 1, right = fdim;
    for (const auto& id : ids) {
      const SpaceLabel& l = arranged.label(id);
      right /= l.dim;
      fham += kron(kron(Matrix::Identity(left, left), l.hamiltonian), Matrix::Identity(right, right));
      left *= l.dim;
    }
  }

  std::vector<SpaceLabel> labels;
  for (int k = 0; k < at; ++k) labels.push_back(arranged.labels[k]);
  labels.emplace_back(fused_id, static_cast<int>(fdim), fham);
  for (size_t k = at + ids.size(); k < arranged.labels.size(); ++k) labels.push_back(arranged.labels[k]);
  return LabeledOperator(std::move(labels), std::move(arranged.matrix));
}

EigResult eig_hermitian(const Matrix& a, double tol) {
  if (!is_hermitian(a, tol)) throw std::invalid_argument("eig_hermitian: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(a));
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: eigensolver failed");
  return EigResult{es.eigenvalues(), es.eigenvectors()};
}

EigResult eig_hermitian(const LabeledOperator& a, double tol) { return eig_hermitian(a.matrix, tol); }

double lambda_max(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(hermitian), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(hermitian), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

LabeledOperator choi_of_kraus(const std::vector<Matrix>& kraus, const SpaceLabel& in,
                              const SpaceLabel& out, bool sub_normalized) {
  if (kraus.empty()) throw std::invalid_argument("choi_of_kraus: empty Kraus list");
  const long din = in.dim, dout = out.dim;
  for (const auto& k : kraus)
    if (k.rows() != dout || k.cols() != din)
      throw std::invalid_argument("choi_of_kraus: inconsistent Kraus shapes");

  if (!sub_normalized) {
    Matrix s = Matrix::Zero(din, din);
    for (const auto& k : kraus) s += dagger(k) * k;
    if (max_abs(s - cidentity(din)) > 1e-10)
      throw std::invalid_argument("choi_of_kraus: Kraus set is not trace preserving");
  }

  Matrix c = Matrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    CVector v(din * dout);  // sum_i |i> (x) K|i>
    for (long i = 0; i < din; ++i) v.segment(i * dout, dout) = k.col(i);
    c += v * v.adjoint();
  }
  return LabeledOperator({in, out}, std::move(c));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix dagger(const Matrix& a) { return a.adjoint(); }

Matrix herm_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol;
}

double max_abs(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

Matrix cidentity(int n) { return Matrix::Identity(n, n); }

CVector omega_vector(int d) {
  CVector v = CVector::Zero(static_cast<long>(d) * d);
  for (int j = 0; j < d; ++j) v(static_cast<long>(j) * d + j) = Complex(1.0, 0.0);
  return v;
}

Matrix fourier_matrix(int d) {
  Matrix f(d, d);
  const double w = 2.0 * M_PI / d;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) f(j, k) = std::polar(1.0 / std::sqrt(double(d)), w * j * k);
  return f;
}

}  // namespace combenergy
