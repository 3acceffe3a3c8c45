#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qude/device.hpp"
#include "qude/qcore.hpp"

namespace qude {

enum class AnsatzKind { StructurePreserving, Affine, Nonlinear };
enum class Activation { Identity, Tanh };

/// Squared: gamma_j = raw_j^2 >= 0 (Lindblad form). Signed: gamma_j = raw_j,
/// diagnostics only; the generator is no longer guaranteed CPTP.
enum class GammaMode { Squared, Signed };

const char* to_string(AnsatzKind kind);
AnsatzKind parse_ansatz_kind(const std::string& s);
const char* to_string(GammaMode mode);
GammaMode parse_gamma_mode(const std::string& s);

/// Hamiltonian correction sum_j alpha_j (Lambda_j - <0|Lambda_j|0> I) plus a
/// dissipator over the upper-triangular Gell-Mann parts with rates gamma_j.
struct StructurePreservingSource {
  GellMannBasis basis;
  /// Ground-energy-shifted generators Lambda_j - <0|Lambda_j|0> I.
  std::vector<ComplexMatrix> shifted;
  std::vector<double> alpha;      // rad/us
  std::vector<double> gamma_raw;  // see GammaMode
  GammaMode gamma_mode = GammaMode::Squared;

  static StructurePreservingSource zero(int n, GammaMode mode = GammaMode::Squared);

  /// alpha in ordinary kHz, rates given as inverse times gamma_j^-1 in us
  /// (infinity switches a channel off).
  static StructurePreservingSource from_physical(std::span<const double> alpha_khz,
                                                 std::span<const double> gamma_inv_us,
                                                 GammaMode mode = GammaMode::Squared);

  int dim() const noexcept { return basis.dim; }
  std::size_t channels() const noexcept { return alpha.size(); }
  double gamma(std::size_t j) const noexcept {
    return gamma_mode == GammaMode::Squared ? gamma_raw[j] * gamma_raw[j] : gamma_raw[j];
  }
  /// d gamma_j / d raw_j
  double gamma_slope(std::size_t j) const noexcept {
    return gamma_mode == GammaMode::Squared ? 2.0 * gamma_raw[j] : 1.0;
  }
};

struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;
};

/// Feed-forward map on Hermitian-basis coefficients: rho -> expand -> layers
/// -> reconstruct. The activation acts on every layer but the last.
struct NetworkSource {
  HermitianBasis basis;
  std::vector<DenseLayer> layers;
  Activation activation = Activation::Identity;

  /// All weights and biases zero.
  static NetworkSource zero(int n, int layer_count, Activation act);
  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) * scale, zero biases.
  static NetworkSource initialized(int n, int layer_count, Activation act, std::uint64_t seed,
                                   double scale = 0.01);

  int dim() const noexcept { return basis.dim; }
};

using SourceModel = std::variant<StructurePreservingSource, NetworkSource>;

AnsatzKind ansatz_of(const SourceModel& src);
int source_dim(const SourceModel& src);

struct SourceOptions {
  int layers = 0;  // 0: ansatz default (affine 1, nonlinear 3)
  GammaMode gamma_mode = GammaMode::Squared;
  /// Starting value of every gamma_raw_j. A squared rate has zero gradient at
  /// raw = 0, so training cannot start exactly there.
  double gamma_raw_init = 1e-2;
  std::uint64_t seed = 0;
};

/// Training start point for an ansatz.
SourceModel make_source(AnsatzKind kind, int n, const SourceOptions& opts = {});

ComplexMatrix sp_hermitian(const StructurePreservingSource& src);

/// D[L](rho) = L rho L^dagger - 1/2 {L^dagger L, rho}
ComplexMatrix dissipator(const ComplexMatrix& jump, const ComplexMatrix& rho);

ComplexMatrix sp_dissipator(const StructurePreservingSource& src, const ComplexMatrix& rho);

/// Accumulates d<mu, S(rho)>/d theta for the structure-preserving source into
/// grad (alpha block then gamma_raw block). Pure parameter part; the state
/// adjoint of this source is folded into the compiled generator.
void sp_pullback_params(const StructurePreservingSource& src, const ComplexMatrix& rho,
                        const ComplexMatrix& mu, std::span<double> grad);

struct EffectiveTimes {
  double t1_eff_us = 0.0;
  double t2_eff_us = 0.0;
  /// gamma_1^-1 and gamma_3^-1 in us (gamma_2 mirrors gamma_1 for a qubit).
  std::vector<double> per_channel;
};

/// T1 = (tau1 + gamma1 + gamma2)^-1, T2 = (tau2 + 4 gamma3)^-1, with the base
/// rates tau_i zero for a Liouville-von Neumann baseline. Qubits only.
EffectiveTimes effective_times(const DeviceModel& dev, const StructurePreservingSource& src);

ComplexMatrix net_forward(const NetworkSource& src, const ComplexMatrix& rho);

/// Backpropagates mu through the network at rho: adds the parameter gradient
/// into grad (layer-major: weights then bias) and returns the state adjoint.
ComplexMatrix net_pullback(const NetworkSource& src, const ComplexMatrix& rho,
                           const ComplexMatrix& mu, std::span<double> grad);

std::size_t param_count(const SourceModel& src);
std::vector<double> pack_params(const SourceModel& src);
/// Same architecture as `shape`, parameters taken from theta.
SourceModel unpack_params(const SourceModel& shape, std::span<const double> theta);

}  // namespace qude
