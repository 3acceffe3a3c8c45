#pragma once

#include <Eigen/Dense>
#include <random>

#include "qude/matrix.hpp"

namespace qt {

using qude::ComplexMatrix;
using qude::cplx;

inline ComplexMatrix ginibre(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  ComplexMatrix z(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  return z;
}

/// Random full-rank density matrix Z Z^dag / Tr(Z Z^dag).
inline ComplexMatrix random_state(std::mt19937_64& rng, int n) {
  const ComplexMatrix z = ginibre(rng, n);
  ComplexMatrix rho = z * z.adjoint();
  rho *= 1.0 / rho.trace().real();
  return rho;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, int n) {
  const ComplexMatrix z = ginibre(rng, n);
  ComplexMatrix h = z + z.adjoint();
  h *= 0.5;
  return h;
}

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd e(m.dim(), m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

/// Reference trace distance from the singular values of an SVD.
inline double svd_trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(a) - to_eigen(b));
  return 0.5 * svd.singularValues().sum();
}

}  // namespace qt
