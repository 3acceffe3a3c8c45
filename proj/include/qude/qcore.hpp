#pragma once

#include <span>
#include <vector>

#include "qude/matrix.hpp"

namespace qude {

/// Validated quantum state: Hermitian (1e-12 entrywise) with unit trace (1e-10).
/// Positivity is not checked here; spectral_filter is the place that enforces it.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix basis_state(int n, int k);
  static DensityMatrix ground(int n) { return basis_state(n, 0); }
  static DensityMatrix maximally_mixed(int n);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  int dim() const noexcept { return m_.dim(); }
  const cplx& operator()(int i, int j) const noexcept { return m_(i, j); }

 private:
  ComplexMatrix m_;
};

/// Eigen-decomposition of a Hermitian matrix: values ascending, eigenvectors
/// stored as the columns of `vectors`.
struct HermitianEigen {
  std::vector<double> values;
  ComplexMatrix vectors;
};

/// Closed form for N = 2; tridiagonalisation + implicit QL (via Eigen) otherwise.
HermitianEigen eigh(const ComplexMatrix& h);

/// Trace-orthogonal Hermitian basis H_jk (diagonal projectors, half-weighted
/// symmetric and antisymmetric off-diagonal pairs), multi-index (j,k) flattened
/// row-major so element j*N+k lines up with vec() ordering.
struct HermitianBasis {
  int dim = 0;
  std::vector<ComplexMatrix> elements;
  /// Tr(H_i H_i): 1 on the diagonal elements, 1/2 off the diagonal.
  std::vector<double> gram_norms;

  std::size_t size() const noexcept { return elements.size(); }
};

/// Generalized Gell-Mann matrices, grouped as symmetric off-diagonal,
/// antisymmetric off-diagonal, then diagonal. `uppers` holds the upper
/// triangular part (diagonal included) of each element.
struct GellMannBasis {
  int dim = 0;
  std::vector<ComplexMatrix> elements;
  std::vector<ComplexMatrix> uppers;

  std::size_t size() const noexcept { return elements.size(); }
};

GellMannBasis gell_mann_basis(int n);
HermitianBasis hermitian_basis(int n);

/// Lowering operator a with a|k> = sqrt(k)|k-1>.
ComplexMatrix lowering_operator(int n);
ComplexMatrix number_operator(int n);

/// Coefficients c_i = Tr(H_i h) / gram_norms[i]. Throws ContractViolation if
/// h is not Hermitian to 1e-10.
std::vector<double> expand(const ComplexMatrix& h, const HermitianBasis& basis);

/// Same as expand without the Hermiticity check (used on integrator stages).
void expand_into(const ComplexMatrix& h, const HermitianBasis& basis, std::span<double> out);

/// sum_i coeffs_i H_i, exactly Hermitian.
ComplexMatrix reconstruct(std::span<const double> coeffs, const HermitianBasis& basis);

/// 1/2 sum of singular values of (a - b).
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Heaviside clip of the spectrum followed by renormalisation to unit trace.
DensityMatrix spectral_filter(const ComplexMatrix& rho);

}  // namespace qude
