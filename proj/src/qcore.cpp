#include "qude/qcore.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace qude {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ContractViolation: return "contract-violation";
    case ErrorCode::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::InvalidConfiguration: return "invalid-configuration";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::UnphysicalRate: return "unphysical-rate";
    case ErrorCode::GradientFailure: return "gradient-failure";
    case ErrorCode::UnsupportedAnsatz: return "unsupported-ansatz";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-10;

void require_dim(int n, const char* who) {
  if (n < 2 || n > kMaxDim) {
    std::ostringstream os;
    os << who << ": N = " << n << " outside supported range [2, " << kMaxDim << "]";
    fail(ErrorCode::InvalidDimension, os.str());
  }
}

ComplexMatrix symmetrized(const ComplexMatrix& h) {
  ComplexMatrix s = hermitian_sum(h);
  s *= 0.5;
  return s;
}

HermitianEigen eigh2(const ComplexMatrix& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const cplx b = h(0, 1);
  const double mean = 0.5 * (a + d);
  const double half_gap = 0.5 * (a - d);
  const double r = std::hypot(half_gap, std::abs(b));

  HermitianEigen out;
  out.values = {mean - r, mean + r};
  out.vectors = ComplexMatrix(2);
  if (std::abs(b) == 0.0) {
    // already diagonal; order columns to match ascending values
    if (a <= d) {
      out.vectors(0, 0) = 1.0;
      out.vectors(1, 1) = 1.0;
    } else {
      out.vectors(1, 0) = 1.0;
      out.vectors(0, 1) = 1.0;
    }
    out.values = {std::min(a, d), std::max(a, d)};
    return out;
  }
  // Pick the row of (H - lambda) whose null vector has the larger components.
  cplx lo0, lo1, hi0, hi1;
  if (a >= d) {
    lo0 = b;
    lo1 = cplx(-(half_gap + r), 0.0);
    hi0 = cplx(half_gap + r, 0.0);
    hi1 = std::conj(b);
  } else {
    lo0 = cplx(half_gap - r, 0.0);
    lo1 = std::conj(b);
    hi0 = b;
    hi1 = cplx(r - half_gap, 0.0);
  }
  const double nlo = std::sqrt(std::norm(lo0) + std::norm(lo1));
  const double nhi = std::sqrt(std::norm(hi0) + std::norm(hi1));
  out.vectors(0, 0) = lo0 / nlo;
  out.vectors(1, 0) = lo1 / nlo;
  out.vectors(0, 1) = hi0 / nhi;
  out.vectors(1, 1) = hi1 / nhi;
  return out;
}

HermitianEigen eigh_general(const ComplexMatrix& h) {
  const int n = h.dim();
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = h(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::DegenerateSpectrum, "eigh: eigensolver did not converge");
  }
  HermitianEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = ComplexMatrix(n);
  for (int i = 0; i < n; ++i) {
    out.values[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    for (int j = 0; j < n; ++j) out.vectors(j, i) = solver.eigenvectors()(j, i);
  }
  return out;
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(m) {
  if (m_.hermiticity_error() > kHermitianTol) {
    fail(ErrorCode::InvalidState, "DensityMatrix: input is not Hermitian");
  }
  if (std::abs(m_.trace() - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << m_.trace().real() << " differs from 1";
    fail(ErrorCode::InvalidState, os.str());
  }
}

DensityMatrix DensityMatrix::basis_state(int n, int k) {
  if (k < 0 || k >= n) fail(ErrorCode::InvalidArgument, "basis_state: level out of range");
  return DensityMatrix(ComplexMatrix::unit(n, k, k));
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  return DensityMatrix(ComplexMatrix::identity(n) * (1.0 / n));
}

HermitianEigen eigh(const ComplexMatrix& h) {
  const ComplexMatrix s = symmetrized(h);
  return s.dim() == 2 ? eigh2(s) : eigh_general(s);
}

GellMannBasis gell_mann_basis(int n) {
  require_dim(n, "gell_mann_basis");
  GellMannBasis g;
  g.dim = n;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      g.elements.push_back(ComplexMatrix::unit(n, j, k) + ComplexMatrix::unit(n, k, j));
  const cplx i1(0.0, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      g.elements.push_back(-i1 * ComplexMatrix::unit(n, j, k) + i1 * ComplexMatrix::unit(n, k, j));
  for (int l = 1; l < n; ++l) {
    const double f = std::sqrt(2.0 / (l * (l + 1.0)));
    ComplexMatrix d(n);
    for (int j = 0; j < l; ++j) d(j, j) = f;
    d(l, l) = -f * l;
    g.elements.push_back(d);
  }
  for (const auto& e : g.elements) {
    ComplexMatrix u(n);
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) u(r, c) = e(r, c);
    g.uppers.push_back(u);
  }
  return g;
}

HermitianBasis hermitian_basis(int n) {
  require_dim(n, "hermitian_basis");
  HermitianBasis b;
  b.dim = n;
  const cplx i1(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) {
        b.elements.push_back(ComplexMatrix::unit(n, j, j));
        b.gram_norms.push_back(1.0);
      } else if (j < k) {
        b.elements.push_back(0.5 * (ComplexMatrix::unit(n, j, k) + ComplexMatrix::unit(n, k, j)));
        b.gram_norms.push_back(0.5);
      } else {
        b.elements.push_back((0.5 * i1) * (ComplexMatrix::unit(n, j, k) - ComplexMatrix::unit(n, k, j)));
        b.gram_norms.push_back(0.5);
      }
    }
  }
  return b;
}

ComplexMatrix lowering_operator(int n) {
  ComplexMatrix a(n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

ComplexMatrix number_operator(int n) {
  ComplexMatrix m(n);
  for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return m;
}

void expand_into(const ComplexMatrix& h, const HermitianBasis& basis, std::span<double> out) {
  // Tr(H_i h) = sum_{rc} H_i(r,c) h(c,r); every H_i has at most two nonzeros,
  // but the generic contraction keeps this independent of the basis layout.
  const int n = h.dim();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const ComplexMatrix& e = basis.elements[i];
    double t = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const cplx ev = e(r, c);
        if (ev != 0.0) t += (ev * h(c, r)).real();
      }
    out[i] = t / basis.gram_norms[i];
  }
}

std::vector<double> expand(const ComplexMatrix& h, const HermitianBasis& basis) {
  if (h.dim() != basis.dim) fail(ErrorCode::InvalidArgument, "expand: dimension mismatch");
  if (h.hermiticity_error() > 1e-10) {
    fail(ErrorCode::ContractViolation, "expand: input matrix is not Hermitian");
  }
  std::vector<double> c(basis.size());
  expand_into(h, basis, c);
  return c;
}

ComplexMatrix reconstruct(std::span<const double> coeffs, const HermitianBasis& basis) {
  if (coeffs.size() != basis.size()) {
    fail(ErrorCode::InvalidArgument, "reconstruct: expected " + std::to_string(basis.size()) +
                                         " coefficients, got " + std::to_string(coeffs.size()));
  }
  ComplexMatrix m(basis.dim);
  for (std::size_t i = 0; i < coeffs.size(); ++i) m.add_scaled(basis.elements[i], coeffs[i]);
  // Off-diagonal pairs are conjugate by construction; clear any rounding on the diagonal.
  for (int k = 0; k < basis.dim; ++k) m(k, k) = m(k, k).real();
  return m;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::InvalidArgument, "trace_distance: dimension mismatch");
  const ComplexMatrix d = a - b;
  double sum = 0.0;
  if (d.hermiticity_error() <= 1e-14 * std::max(1.0, d.max_abs())) {
    for (double v : eigh(d).values) sum += std::abs(v);
  } else {
    for (double v : eigh(d.adjoint() * d).values) sum += std::sqrt(std::max(v, 0.0));
  }
  return 0.5 * sum;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

DensityMatrix spectral_filter(const ComplexMatrix& rho) {
  if (rho.hermiticity_error() > kHermitianTol * std::max(1.0, rho.max_abs())) {
    fail(ErrorCode::ContractViolation, "spectral_filter: input is not Hermitian");
  }
  const HermitianEigen eig = eigh(rho);
  double kept = 0.0;
  for (double v : eig.values)
    if (v > 0.0) kept += v;
  if (!(kept > 0.0)) {
    fail(ErrorCode::DegenerateSpectrum, "spectral_filter: no positive eigenvalue to renormalise");
  }
  const int n = rho.dim();
  ComplexMatrix out(n);
  for (int k = 0; k < n; ++k) {
    const double e = eig.values[static_cast<std::size_t>(k)];
    if (e <= 0.0) continue;
    const double w = e / kept;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out(i, j) += w * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
  }
  out = symmetrized(out);
  // Trace is 1 up to rounding of the outer products; fold the residue into the diagonal.
  const double t = out.trace().real();
  out *= 1.0 / t;
  return DensityMatrix(out);
}

}  // namespace qude
