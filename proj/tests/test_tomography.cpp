#include <cmath>

#include "doctest.h"
#include "qude/tomography.hpp"
#include "support.hpp"

using namespace qude;

namespace {
const cplx I1(0.0, 1.0);
}

TEST_CASE("inversion matrix as printed") {
  const auto& inv = inversion_matrix();
  const std::array<std::array<cplx, 4>, 4> m{{{1, 0, 0, 1}, {0, -1, -1, 0}, {0, I1, -I1, 0}, {-1, 0, 0, 1}}};
  CHECK(inv.m == m);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += inv.m[i][k] * inv.m_inv[k][j];
      CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("forward measurement model") {
  const auto mixed = measurement_probs(DensityMatrix::maximally_mixed(2).matrix());
  CHECK(mixed.px == doctest::Approx(0.5));
  CHECK(mixed.py == doctest::Approx(0.5));
  CHECK(mixed.pz == doctest::Approx(0.5));
  const auto g = measurement_probs(DensityMatrix::ground(2).matrix());
  CHECK(g.px == doctest::Approx(0.5));
  CHECK(g.py == doctest::Approx(0.5));
  CHECK(g.pz == 0.0);
  CHECK(measurement_probs(DensityMatrix::basis_state(2, 1).matrix()).pz == 1.0);
  try {
    measurement_probs(ComplexMatrix{{-0.5, 0}, {0, 1.5}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidState);
  }
}

TEST_CASE("linear inversion round trip") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const ComplexMatrix rho = qt::random_state(rng, 2);
    const auto back = lie_reconstruct(measurement_probs(rho));
    CHECK(trace_distance(back.matrix(), rho) <= 1e-12);
  }
  const auto mixed = lie_reconstruct({0.5, 0.5, 0.5});
  CHECK(max_abs_diff(mixed.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
}

TEST_CASE("noisy estimates are filtered into valid states") {
  std::mt19937_64 rng(1);
  // near a pure state the raw inversion has a negative eigenvalue for many draws
  const ComplexMatrix pure = DensityMatrix::basis_state(2, 1).matrix();
  const auto probs = measurement_probs(pure);
  int indefinite = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto counts = sample_shots(probs, 100, rng);
    const auto rec = record_from_counts(0.1, 100, counts);
    const double bx = 2 * rec.probs_hat.px - 1, by = 2 * rec.probs_hat.py - 1, bz = 2 * rec.probs_hat.pz - 1;
    indefinite += bx * bx + by * by + bz * bz > 1.0;
    const auto& m = rec.rho_hat.matrix();
    CHECK(std::abs(m.trace() - 1.0) < 1e-12);
    const auto eig = eigh(m);
    CHECK(eig.values.front() >= -1e-12);
  }
  CHECK(indefinite > 10);
}

TEST_CASE("binomial shot sampling") {
  std::mt19937_64 rng(77);
  const auto edge = sample_shots({0.0, 1.0, 0.0}, 5000, rng);
  CHECK(edge == std::array<int, 3>{0, 5000, 0});
  // Hoeffding: P(|k/n - 1/2| >= 0.05) <= 2 exp(-2 n 0.05^2) = 2 e^-25 < 1e-10
  for (int rep = 0; rep < 200; ++rep) {
    const auto k = sample_shots({0.5, 0.5, 0.5}, 5000, rng);
    for (int c : k) CHECK(std::abs(c / 5000.0 - 0.5) < 0.05);
  }
  std::mt19937_64 a(9), b(9);
  CHECK(sample_shots({0.3, 0.6, 0.9}, 5000, a) == sample_shots({0.3, 0.6, 0.9}, 5000, b));
  CHECK(shots_per_axis(5000, ShotMode::PerAxis) == 5000);
  CHECK(shots_per_axis(5000, ShotMode::Split) == 1666);
}

TEST_CASE("reconstruction error shrinks like shots^-1/2") {
  std::mt19937_64 rng(123);
  const ComplexMatrix rho{{0.7, cplx(0.1, 0.2)}, {cplx(0.1, -0.2), 0.3}};
  const auto probs = measurement_probs(rho);
  auto mean_error = [&](int shots) {
    double acc = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
      const auto rec = record_from_counts(0.0, shots, sample_shots(probs, shots, rng));
      acc += trace_distance(rec.rho_hat.matrix(), rho);
    }
    return acc / reps;
  };
  const double e5 = mean_error(100000), e6 = mean_error(1000000);
  const double slope = std::log10(e6 / e5);
  MESSAGE("log-log slope " << slope);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("expected energy") {
  CHECK(expected_energy(DensityMatrix::ground(2).matrix()) == 0.0);
  CHECK(expected_energy(DensityMatrix::basis_state(2, 1).matrix()) == 1.0);
  CHECK(expected_energy(ComplexMatrix{{0.3, 0}, {0, 0.7}}) == doctest::Approx(0.7));
}

TEST_CASE("records") {
  std::mt19937_64 rng(5);
  const ComplexMatrix rho = DensityMatrix::maximally_mixed(2).matrix();
  const auto exact = make_record(0.004, rho, 0, nullptr);
  CHECK(exact.shots == 0);
  CHECK(max_abs_diff(exact.rho_hat.matrix(), rho) < 1e-15);
  const auto noisy = make_record(0.004, rho, 5000, &rng);
  CHECK(noisy.shots == 5000);
  for (int i = 0; i < 3; ++i) CHECK((noisy.counts[static_cast<std::size_t>(i)] >= 0 && noisy.counts[static_cast<std::size_t>(i)] <= 5000));
  CHECK(noisy.probs_hat.px == doctest::Approx(noisy.counts[0] / 5000.0));
}
