#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "qude/qcore.hpp"
#include "support.hpp"

using namespace qude;

namespace {

const cplx I1(0.0, 1.0);

// Hand-written standard Gell-Mann matrices lambda_1..lambda_8.
std::vector<ComplexMatrix> standard_gell_mann3() {
  const double s3 = 1.0 / std::sqrt(3.0);
  return {
      {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}},
      {{0, -I1, 0}, {I1, 0, 0}, {0, 0, 0}},
      {{1, 0, 0}, {0, -1, 0}, {0, 0, 0}},
      {{0, 0, 1}, {0, 0, 0}, {1, 0, 0}},
      {{0, 0, -I1}, {0, 0, 0}, {I1, 0, 0}},
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{0, 0, 0}, {0, 0, -I1}, {0, I1, 0}},
      {{s3, 0, 0}, {0, s3, 0}, {0, 0, -2 * s3}},
  };
}

}  // namespace

TEST_CASE("gell-mann basis for a qubit is the Pauli set") {
  const auto b = gell_mann_basis(2);
  REQUIRE(b.size() == 3);
  CHECK(b.elements[0] == ComplexMatrix{{0, 1}, {1, 0}});
  CHECK(b.elements[1] == ComplexMatrix{{0, -I1}, {I1, 0}});
  CHECK(b.elements[2] == ComplexMatrix{{1, 0}, {0, -1}});
  CHECK(b.uppers[0] == ComplexMatrix{{0, 1}, {0, 0}});
  CHECK(b.uppers[0] == lowering_operator(2));
  CHECK(b.uppers[2] == ComplexMatrix{{1, 0}, {0, -1}});
  ComplexMatrix i_upper2 = b.uppers[1];
  i_upper2 *= I1;
  CHECK(b.uppers[0] == i_upper2);
}

TEST_CASE("gell-mann basis for a qutrit matches the standard set") {
  const auto b = gell_mann_basis(3);
  REQUIRE(b.size() == 8);
  const auto ref = standard_gell_mann3();
  for (const auto& g : b.elements) {
    CHECK(g.hermiticity_error() < 1e-15);
    CHECK(std::abs(g.trace()) < 1e-15);
    CHECK(std::abs((g * g).trace() - 2.0) < 1e-14);
  }
  // the diagonal pair spans the same plane as lambda_3, lambda_8; the off-diagonal ones match one-to-one
  for (std::size_t r = 0; r < ref.size(); ++r) {
    if (r == 2 || r == 7) continue;
    int hits = 0;
    for (const auto& g : b.elements) hits += max_abs_diff(g, ref[r]) < 1e-15;
    CHECK(hits == 1);
  }
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j) CHECK(std::abs((b.elements[i] * b.elements[j]).trace()) < 1e-14);
}

TEST_CASE("basis constructors reject small dimensions") {
  CHECK_THROWS_AS(gell_mann_basis(1), Error);
  CHECK_THROWS_AS(hermitian_basis(1), Error);
  try {
    gell_mann_basis(0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidDimension);
  }
}

TEST_CASE("hermitian basis elements and gram norms") {
  const auto b = hermitian_basis(2);
  REQUIRE(b.size() == 4);
  CHECK(b.elements[0] == ComplexMatrix{{1, 0}, {0, 0}});
  CHECK(b.elements[1] == ComplexMatrix{{0, 0.5}, {0.5, 0}});
  CHECK(std::abs((b.elements[1] * b.elements[1]).trace() - 0.5) < 1e-15);
  CHECK(b.gram_norms == std::vector<double>{1.0, 0.5, 0.5, 1.0});
  for (int n = 2; n <= 4; ++n) {
    const auto bn = hermitian_basis(n);
    REQUIRE(bn.size() == static_cast<std::size_t>(n * n));
    for (std::size_t i = 0; i < bn.size(); ++i) {
      CHECK(bn.elements[i].hermiticity_error() == 0.0);
      CHECK(std::abs((bn.elements[i] * bn.elements[i]).trace() - bn.gram_norms[i]) < 1e-15);
      for (std::size_t j = i + 1; j < bn.size(); ++j) {
        CHECK(std::abs((bn.elements[i] * bn.elements[j]).trace()) < 1e-12);
      }
    }
  }
}

TEST_CASE("expand and reconstruct") {
  const auto b = hermitian_basis(2);
  CHECK(expand(ComplexMatrix(2), b) == std::vector<double>(4, 0.0));
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto c = expand(b.elements[k], b);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-15));
    CHECK(reconstruct(c, b) == b.elements[k]);
  }
  const auto d = expand(ComplexMatrix{{0.3, 0}, {0, 0.7}}, b);
  CHECK(d[0] == doctest::Approx(0.3));
  CHECK(d[3] == doctest::Approx(0.7));
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 0.0);

  std::mt19937_64 rng(11);
  for (int n = 2; n <= 4; ++n) {
    const auto bn = hermitian_basis(n);
    for (int rep = 0; rep < 50; ++rep) {
      const ComplexMatrix h = qt::random_hermitian(rng, n);
      CHECK(max_abs_diff(reconstruct(expand(h, bn), bn), h) < 1e-12);
    }
  }
  CHECK_THROWS_AS(expand(ComplexMatrix{{0, 1}, {0, 0}}, b), Error);
  const std::vector<double> short_coeffs(3, 0.0);
  CHECK_THROWS_AS(reconstruct(short_coeffs, b), Error);
}

TEST_CASE("vec ordering is row-major") {
  const ComplexMatrix m{{1, 2}, {3, 4}};
  const auto v = m.vec();
  CHECK(v == std::vector<cplx>{1, 2, 3, 4});
}

TEST_CASE("trace distance examples and metric properties") {
  const auto g = DensityMatrix::ground(2);
  const auto e = DensityMatrix::basis_state(2, 1);
  CHECK(trace_distance(g, g) == 0.0);
  CHECK(trace_distance(g, e) == doctest::Approx(1.0).epsilon(1e-15));
  const DensityMatrix a(ComplexMatrix{{0.75, 0}, {0, 0.25}});
  CHECK(trace_distance(a, DensityMatrix::maximally_mixed(2)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(trace_distance(ComplexMatrix(2), ComplexMatrix(3)), Error);

  std::mt19937_64 rng(5);
  for (int n = 2; n <= 4; ++n) {
    for (int rep = 0; rep < 30; ++rep) {
      const auto x = qt::random_state(rng, n);
      const auto y = qt::random_state(rng, n);
      const auto z = qt::random_state(rng, n);
      const double xy = trace_distance(x, y);
      CHECK(xy == doctest::Approx(qt::svd_trace_distance(x, y)).epsilon(1e-12));
      CHECK(xy >= 0.0);
      CHECK(xy <= 1.0 + 1e-12);
      CHECK(xy == doctest::Approx(trace_distance(y, x)).epsilon(1e-13));
      CHECK(trace_distance(x, z) <= xy + trace_distance(y, z) + 1e-10);
    }
  }
}

TEST_CASE("hermitian eigensolver agrees with a reference solver") {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const ComplexMatrix h = qt::random_hermitian(rng, n);
      const auto eig = eigh(h);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(qt::to_eigen(h));
      for (int k = 0; k < n; ++k) CHECK(eig.values[static_cast<std::size_t>(k)] == doctest::Approx(ref.eigenvalues()(k)).epsilon(1e-12));
      // H v = lambda v
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
          cplx hv = 0.0;
          for (int j = 0; j < n; ++j) hv += h(i, j) * eig.vectors(j, k);
          CHECK(std::abs(hv - eig.values[static_cast<std::size_t>(k)] * eig.vectors(i, k)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("spectral filter") {
  std::mt19937_64 rng(9);
  SUBCASE("identity on valid states and idempotent") {
    for (int n = 2; n <= 4; ++n) {
      for (int rep = 0; rep < 30; ++rep) {
        const auto rho = qt::random_state(rng, n);
        const auto f = spectral_filter(rho);
        CHECK(max_abs_diff(f.matrix(), rho) < 1e-12);
        CHECK(max_abs_diff(spectral_filter(f.matrix()).matrix(), f.matrix()) < 1e-12);
      }
    }
  }
  SUBCASE("clips a negative eigenvalue") {
    // eigenvalues (1.1, -0.1) in a rotated frame
    const double c = std::cos(0.4), s = std::sin(0.4);
    const ComplexMatrix u{{c, -s}, {s, c}};
    const ComplexMatrix d{{1.1, 0}, {0, -0.1}};
    const ComplexMatrix h = u * d * u.adjoint();
    const auto f = spectral_filter(h);
    const ComplexMatrix expect = u * ComplexMatrix{{1, 0}, {0, 0}} * u.adjoint();
    CHECK(max_abs_diff(f.matrix(), expect) < 1e-12);
  }
  SUBCASE("mixed spectra against a brute-force eigensolve") {
    for (int n = 2; n <= 4; ++n) {
      for (int rep = 0; rep < 30; ++rep) {
        ComplexMatrix h = qt::random_hermitian(rng, n);
        h.add_scaled(ComplexMatrix::identity(n), 0.5);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(qt::to_eigen(h));
        double kept = 0.0;
        for (int k = 0; k < n; ++k) kept += std::max(ref.eigenvalues()(k), 0.0);
        if (kept <= 0.0) continue;
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(n, n);
        for (int k = 0; k < n; ++k) {
          if (ref.eigenvalues()(k) > 0.0) {
            expect += ref.eigenvalues()(k) / kept * ref.eigenvectors().col(k) * ref.eigenvectors().col(k).adjoint();
          }
        }
        const auto f = spectral_filter(h);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) CHECK(std::abs(f(i, j) - expect(i, j)) < 1e-12);
        CHECK(std::abs(f.matrix().trace() - 1.0) < 1e-12);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> out(qt::to_eigen(f.matrix()));
        CHECK(out.eigenvalues().minCoeff() >= -1e-12);
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(spectral_filter(ComplexMatrix{{-1, 0}, {0, -0.5}}), Error);
    try {
      spectral_filter(ComplexMatrix{{-1, 0}, {0, 0}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateSpectrum);
    }
    try {
      spectral_filter(ComplexMatrix{{1, 1}, {0, 0}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ContractViolation);
    }
  }
}

TEST_CASE("density matrix invariants are enforced") {
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix{{0.5, 0.1}, {0.2, 0.5}}), Error);
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix{{0.6, 0}, {0, 0.5}}), Error);
  CHECK_NOTHROW(DensityMatrix(ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(DensityMatrix::maximally_mixed(4)(3, 3) == cplx(0.25));
  CHECK_THROWS_AS(ComplexMatrix(5), Error);
}
