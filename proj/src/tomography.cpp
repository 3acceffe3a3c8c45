#include "qude/tomography.hpp"

#include <Eigen/Dense>

#include <sstream>

namespace qude {

namespace {

constexpr double kProbTol = 1e-10;

void require_qubit(int n, const char* who) {
  if (n != 2) fail(ErrorCode::InvalidDimension, std::string(who) + ": single-qubit (N = 2) only");
}

InversionMatrix build_inversion() {
  const cplx i1(0.0, 1.0);
  InversionMatrix inv;
  inv.m = {{{1.0, 0.0, 0.0, 1.0},
            {0.0, -1.0, -1.0, 0.0},
            {0.0, i1, -i1, 0.0},
            {-1.0, 0.0, 0.0, 1.0}}};
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = inv.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  const Eigen::Matrix4cd mi = m.inverse();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) inv.m_inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = mi(r, c);
  return inv;
}

}  // namespace

const InversionMatrix& inversion_matrix() {
  static const InversionMatrix inv = build_inversion();
  return inv;
}

const char* to_string(ShotMode mode) { return mode == ShotMode::PerAxis ? "per_axis" : "split"; }

ShotMode parse_shot_mode(const std::string& s) {
  if (s == "per_axis" || s == "per-axis") return ShotMode::PerAxis;
  if (s == "split") return ShotMode::Split;
  fail(ErrorCode::InvalidArgument, "unknown shot mode '" + s + "' (expected per_axis|split)");
}

int shots_per_axis(int budget, ShotMode mode) {
  return mode == ShotMode::PerAxis ? budget : budget / 3;
}

MeasurementProbs measurement_probs(const ComplexMatrix& rho) {
  require_qubit(rho.dim(), "measurement_probs");
  const auto& m = inversion_matrix().m;
  const auto v = rho.vec();
  std::array<double, 4> p{};
  for (std::size_t r = 0; r < 4; ++r) {
    cplx acc = 0.0;
    for (std::size_t c = 0; c < 4; ++c) acc += m[r][c] * v[c];
    p[r] = acc.real();
  }
  std::array<double, 3> probs{};
  for (std::size_t k = 0; k < 3; ++k) {
    const double pk = 0.5 * (p[k + 1] + 1.0);
    if (pk < -kProbTol || pk > 1.0 + kProbTol) {
      std::ostringstream os;
      os << "measurement_probs: probability " << pk << " on axis " << "xyz"[k] << " outside [0, 1]";
      fail(ErrorCode::InvalidState, os.str());
    }
    probs[k] = std::clamp(pk, 0.0, 1.0);
  }
  return {probs[0], probs[1], probs[2]};
}

std::array<int, 3> sample_shots(const MeasurementProbs& probs, int shots, std::mt19937_64& rng) {
  if (shots < 1) fail(ErrorCode::InvalidArgument, "sample_shots: need at least one shot");
  std::array<int, 3> k{};
  const std::array<double, 3> p{probs.px, probs.py, probs.pz};
  for (std::size_t a = 0; a < 3; ++a) {
    std::binomial_distribution<int> draw(shots, std::clamp(p[a], 0.0, 1.0));
    k[a] = draw(rng);
  }
  return k;
}

DensityMatrix lie_reconstruct(const MeasurementProbs& probs_hat, double time_us) {
  for (double p : {probs_hat.px, probs_hat.py, probs_hat.pz}) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "lie_reconstruct: probability outside [0, 1]");
  }
  const std::array<double, 4> p{1.0, 2.0 * probs_hat.px - 1.0, 2.0 * probs_hat.py - 1.0,
                                2.0 * probs_hat.pz - 1.0};
  const auto& mi = inversion_matrix().m_inv;
  std::array<cplx, 4> v{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) v[r] += mi[r][c] * p[c];
  ComplexMatrix raw = ComplexMatrix::from_vec(v);
  raw = hermitian_sum(raw) * 0.5;
  try {
    return spectral_filter(raw);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSpectrum) throw;
    std::ostringstream os;
    os << e.what() << " (tomography record at t = " << time_us << " us)";
    fail(ErrorCode::DegenerateSpectrum, os.str());
  }
}

TomographyRecord record_from_counts(double time_us, int shots, const std::array<int, 3>& counts) {
  if (shots < 1) fail(ErrorCode::InvalidArgument, "record_from_counts: shots must be positive");
  for (int k : counts) {
    if (k < 0 || k > shots) fail(ErrorCode::InvalidArgument, "record_from_counts: count outside [0, shots]");
  }
  TomographyRecord rec;
  rec.time_us = time_us;
  rec.shots = shots;
  rec.counts = counts;
  const double s = shots;
  rec.probs_hat = {counts[0] / s, counts[1] / s, counts[2] / s};
  rec.rho_hat = lie_reconstruct(rec.probs_hat, time_us);
  return rec;
}

TomographyRecord record_from_probs(double time_us, const MeasurementProbs& probs) {
  TomographyRecord rec;
  rec.time_us = time_us;
  rec.shots = 0;
  rec.probs_hat = probs;
  rec.rho_hat = lie_reconstruct(probs, time_us);
  return rec;
}

TomographyRecord make_record(double time_us, const ComplexMatrix& rho, int shots, std::mt19937_64* rng) {
  const MeasurementProbs p = measurement_probs(rho);
  if (shots <= 0) return record_from_probs(time_us, p);
  return record_from_counts(time_us, shots, sample_shots(p, shots, *rng));
}

double expected_energy(const ComplexMatrix& rho) {
  return (number_operator(rho.dim()) * rho).trace().real();
}

}  // namespace qude
