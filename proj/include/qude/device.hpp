#pragma once

#include <numbers>
#include <optional>
#include <string>

#include "qude/qcore.hpp"

namespace qude {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Ordinary frequency in MHz to angular frequency in rad/us.
inline constexpr double mhz_to_rad_per_us(double mhz) { return kTwoPi * mhz; }
inline constexpr double khz_to_rad_per_us(double khz) { return kTwoPi * khz * 1e-3; }
inline constexpr double rad_per_us_to_khz(double w) { return w / kTwoPi * 1e3; }

enum class BaseKind { LvN, Lindblad };

const char* to_string(BaseKind kind);
BaseKind parse_base_kind(const std::string& s);

/// Baseline physics of one qubit (or qudit). Frequencies are ordinary (GHz),
/// times in microseconds.
struct DeviceModel {
  double omega01_ghz = 3.448;
  double omega_rot_ghz = 3.448;
  double t1_us = 214.0;
  double t2_us = 32.0;
  BaseKind base = BaseKind::Lindblad;
  int dim = 2;

  double tau1() const { return 1.0 / t1_us; }
  double tau2() const { return 1.0 / t2_us; }

  /// Throws InvalidConfiguration if T1/T2 are not positive for a Lindblad base.
  void validate() const;

  /// Reference devices with a resonant rotating frame.
  static DeviceModel dev1(BaseKind base = BaseKind::Lindblad);
  static DeviceModel dev2(BaseKind base = BaseKind::Lindblad);
};

/// One control setting: a constant square pulse in the rotating frame.
struct Experiment {
  std::string id = "exp000";
  double amplitude_p_mhz = 0.0;
  double amplitude_q_mhz = 0.0;
  double duration_us = 50.0;
  double sample_dt_ns = 4.0;
  std::optional<DensityMatrix> initial_state;  // ground state when empty

  /// Number of output samples, duration / sample_dt (must be integral).
  long sample_count() const;
  double sample_time_us(long j) const { return static_cast<double>(j) * sample_dt_ns / 1000.0; }
  DensityMatrix initial(int dim) const;
  void validate() const;
};

}  // namespace qude
