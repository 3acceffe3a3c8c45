#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qude/device.hpp"
#include "qude/models.hpp"

namespace qude {

struct Trajectory {
  std::vector<double> times;          // us
  std::vector<ComplexMatrix> states;  // unfiltered model states
};

/// Rotating-frame drive Hamiltonian in rad/us:
/// 2pi (w - w_rot) a^dag a + 2pi p (a + a^dag) + 2pi q i (a - a^dag).
ComplexMatrix hamiltonian(const DeviceModel& dev, const Experiment& exp);

/// tau1 D[a](rho) + tau2 D[a^dag a](rho); zero for a Liouville-von Neumann base.
ComplexMatrix lindblad_dissipator(const DeviceModel& dev, const ComplexMatrix& rho);

/// Right-hand side of the augmented master equation. A structure-preserving
/// source enters as -i[H + S_H, rho] + L(rho) + S_L(rho); a network source is
/// added as -i[H, rho] + L(rho) + N(rho). The system is autonomous, so t only
/// documents the evaluation point.
ComplexMatrix rhs(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                  const ComplexMatrix& rho, double t_us = 0.0);

/// Compiled form of rhs() for one (device, experiment, source) triple. Every
/// linear part is folded into rho -> D rho + rho D^dag + sum_k r_k L_k rho L_k^dag,
/// with D = -i H_total - 1/2 sum_k r_k L_k^dag L_k.
class Generator {
 public:
  Generator(const DeviceModel& dev, const Experiment& exp, const SourceModel* source);

  int dim() const noexcept { return drift_.dim(); }
  std::size_t param_count() const noexcept { return params_; }
  const std::optional<SourceModel>& source() const noexcept { return source_; }

  /// Exactly Hermitian output for Hermitian rho.
  ComplexMatrix operator()(const ComplexMatrix& rho) const;

  /// Vector-Jacobian product at rho: returns (d f / d rho)^T mu and adds
  /// (d f / d theta)^T mu into grad (length param_count()).
  ComplexMatrix pullback(const ComplexMatrix& rho, const ComplexMatrix& mu,
                         std::span<double> grad) const;

 private:
  struct Jump {
    ComplexMatrix op;
    ComplexMatrix op_adj;
    double rate;
  };
  const NetworkSource* network() const noexcept {
    return source_ ? std::get_if<NetworkSource>(&*source_) : nullptr;
  }

  ComplexMatrix drift_;
  ComplexMatrix drift_adj_;
  std::vector<Jump> jumps_;
  std::optional<SourceModel> source_;
  std::size_t params_ = 0;
};

/// One classical four-stage Runge-Kutta step of size h (us).
ComplexMatrix rk4_step(const Generator& f, const ComplexMatrix& rho, double h);

/// Adjoint of rk4_step at rho: given d loss / d rho_next, returns
/// d loss / d rho and adds the parameter gradient of the step into grad.
ComplexMatrix rk4_pullback(const Generator& f, const ComplexMatrix& rho, const ComplexMatrix& adj_next,
                           double h, std::span<double> grad);

/// All internal states rho_0 .. rho_steps. Throws Divergence on a non-finite state.
std::vector<ComplexMatrix> integrate_steps(const Generator& f, const ComplexMatrix& rho0, double h,
                                           long steps);

/// Internal steps per output sample, or InvalidConfiguration when dt_internal
/// does not divide sample_dt.
long steps_per_sample(double sample_dt_ns, double dt_internal_ns);

/// Fixed-step RK4 from t = 0 with rho(0) = the experiment's initial state;
/// records every sample_dt (t = 0 included only on request).
Trajectory integrate_rk4(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                         double dt_internal_ns = 4.0, bool include_t0 = false);

}  // namespace qude
