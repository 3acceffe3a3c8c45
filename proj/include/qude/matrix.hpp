#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "qude/error.hpp"

namespace qude {

using cplx = std::complex<double>;

/// Largest level count a ComplexMatrix can hold. Storage is inline so the
/// integrator's inner loop never touches the heap.
inline constexpr int kMaxDim = 4;

/// Dense N x N complex matrix with fixed inline capacity (N <= kMaxDim).
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) {
      fail(ErrorCode::InvalidDimension,
           "ComplexMatrix: dimension " + std::to_string(n) + " outside [1, " +
               std::to_string(kMaxDim) + "]");
    }
  }

  /// Row-by-row construction; every row must have the same length.
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
      : ComplexMatrix(static_cast<int>(rows.size())) {
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n_) {
        fail(ErrorCode::InvalidArgument, "ComplexMatrix: ragged initializer");
      }
      int j = 0;
      for (const auto& v : row) (*this)(i, j++) = v;
      ++i;
    }
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// |j><k|
  static ComplexMatrix unit(int n, int j, int k) {
    ComplexMatrix m(n);
    m(j, k) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
  }

  /// Inverse of vec(): row-major (rho00, rho01, ..., rho_{N-1,N-1}).
  static ComplexMatrix from_vec(std::span<const cplx> v) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != static_cast<int>(v.size())) {
      fail(ErrorCode::InvalidArgument, "ComplexMatrix::from_vec: length is not a square");
    }
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
    return m;
  }

  int dim() const noexcept { return n_; }

  cplx& operator()(int i, int j) noexcept { return a_[i * kMaxDim + j]; }
  const cplx& operator()(int i, int j) const noexcept { return a_[i * kMaxDim + j]; }

  std::vector<cplx> vec() const {
    std::vector<cplx> v;
    v.reserve(static_cast<std::size_t>(n_ * n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) v.push_back((*this)(i, j));
    return v;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  cplx trace() const noexcept {
    cplx t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

  /// Sum of squared moduli.
  double frobenius_norm2() const noexcept {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += std::norm((*this)(i, j));
    return s;
  }

  /// max |A - A^dagger| entrywise.
  double hermiticity_error() const noexcept {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  bool all_finite() const noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!std::isfinite((*this)(i, j).real()) || !std::isfinite((*this)(i, j).imag()))
          return false;
    return true;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
    return *this;
  }
  ComplexMatrix& operator*=(double s) noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
    return *this;
  }

  /// this += s * o
  ComplexMatrix& add_scaled(const ComplexMatrix& o, double s) noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) += s * o(i, j);
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) noexcept { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) noexcept { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) noexcept { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) noexcept { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, double s) noexcept { return a *= s; }
  friend ComplexMatrix operator*(double s, ComplexMatrix a) noexcept { return a *= s; }
  friend ComplexMatrix operator-(ComplexMatrix a) noexcept { return a *= -1.0; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) noexcept {
    const int n = a.n_;
    ComplexMatrix r;
    r.n_ = n;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const cplx aik = a(i, k);
        for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) noexcept {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j)
        if (a(i, j) != b(i, j)) return false;
    return true;
  }

 private:
  int n_ = 0;
  std::array<cplx, kMaxDim * kMaxDim> a_{};
};

/// Real inner product Re Tr(A^dagger B) on complex matrices.
inline double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) noexcept {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      s += a(i, j).real() * b(i, j).real() + a(i, j).imag() * b(i, j).imag();
  return s;
}

/// A + A^dagger, exactly Hermitian regardless of rounding in A.
inline ComplexMatrix hermitian_sum(const ComplexMatrix& a) {
  ComplexMatrix r(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) r(i, j) = a(i, j) + std::conj(a(j, i));
  return r;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

inline ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).max_abs();
}

}  // namespace qude
