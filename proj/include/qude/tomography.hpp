#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "qude/qcore.hpp"

namespace qude {

/// Outcome probabilities of the x, y and z projective measurements.
struct MeasurementProbs {
  double px = 0.5;
  double py = 0.5;
  double pz = 0.5;
};

/// p = M vec(rho) with p = (1, 2P(x)-1, 2P(y)-1, 2P(z)-1) and vec row-major.
struct InversionMatrix {
  std::array<std::array<cplx, 4>, 4> m;
  std::array<std::array<cplx, 4>, 4> m_inv;
};

/// The fixed single-qubit tomography matrix and its numerically computed inverse.
const InversionMatrix& inversion_matrix();

enum class ShotMode {
  PerAxis,  // every axis gets the full shot budget
  Split,    // floor(budget / 3) per axis
};

const char* to_string(ShotMode mode);
ShotMode parse_shot_mode(const std::string& s);
int shots_per_axis(int budget, ShotMode mode);

struct TomographyRecord {
  double time_us = 0.0;
  /// Shots per axis; 0 marks an exact (noise-free) record whose probabilities
  /// are stored directly in probs_hat.
  int shots = 0;
  std::array<int, 3> counts{0, 0, 0};  // k_x, k_y, k_z
  MeasurementProbs probs_hat;
  DensityMatrix rho_hat = DensityMatrix::maximally_mixed(2);
};

/// Forward measurement model; throws InvalidState if a probability leaves
/// [-1e-10, 1 + 1e-10]. Results are clamped to [0, 1].
MeasurementProbs measurement_probs(const ComplexMatrix& rho);

/// Binomial draws in axis order x, y, z from the given stream.
std::array<int, 3> sample_shots(const MeasurementProbs& probs, int shots, std::mt19937_64& rng);

/// Linear inversion, Hermitisation and spectral filtering. time_us only tags
/// the error message of a degenerate spectrum.
DensityMatrix lie_reconstruct(const MeasurementProbs& probs_hat, double time_us = -1.0);

/// Builds a record from either sampled counts (shots > 0) or exact probabilities.
TomographyRecord make_record(double time_us, const ComplexMatrix& rho, int shots, std::mt19937_64* rng);
TomographyRecord record_from_counts(double time_us, int shots, const std::array<int, 3>& counts);
TomographyRecord record_from_probs(double time_us, const MeasurementProbs& probs);

/// Tr(rho a^dag a): population of the first excited state for a qubit.
double expected_energy(const ComplexMatrix& rho);

}  // namespace qude
