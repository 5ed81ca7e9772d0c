// Shared helpers for the test suites.
#pragma once

#include <random>
#include <vector>

#include "combenergy/comb.hpp"
#include "combenergy/tensor.hpp"

namespace test_util {

using combenergy::Complex;
using combenergy::Matrix;

inline Matrix random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return combenergy::herm_part(a);
}

inline Matrix random_density(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix rho = a * a.adjoint();
  rho /= rho.trace();
  return rho;
}

// Trace-preserving Kraus set from a random Stinespring isometry; K_j = (I (x) <j|) V.
inline std::vector<Matrix> random_tp_kraus(std::mt19937_64& rng, int din, int dout, int n_kraus) {
  Matrix v = combenergy::random_isometry(rng, dout * n_kraus, din);
  std::vector<Matrix> kraus(n_kraus, Matrix::Zero(dout, din));
  for (int j = 0; j < n_kraus; ++j)
    for (int o = 0; o < dout; ++o) kraus[j].row(o) = v.row(o * n_kraus + j);
  return kraus;
}

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix hadamard() {
  Matrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}

}  // namespace test_util
