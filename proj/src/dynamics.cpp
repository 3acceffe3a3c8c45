#include "qude/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace qude {

ComplexMatrix hamiltonian(const DeviceModel& dev, const Experiment& exp) {
  const int n = dev.dim;
  const ComplexMatrix a = lowering_operator(n);
  const ComplexMatrix ad = a.adjoint();
  const double detuning = mhz_to_rad_per_us((dev.omega01_ghz - dev.omega_rot_ghz) * 1000.0);
  ComplexMatrix h = number_operator(n) * detuning;
  h.add_scaled(a + ad, mhz_to_rad_per_us(exp.amplitude_p_mhz));
  h += cplx(0.0, mhz_to_rad_per_us(exp.amplitude_q_mhz)) * (a - ad);
  return h;
}

ComplexMatrix lindblad_dissipator(const DeviceModel& dev, const ComplexMatrix& rho) {
  ComplexMatrix out(rho.dim());
  if (dev.base == BaseKind::LvN) return out;
  out.add_scaled(dissipator(lowering_operator(rho.dim()), rho), dev.tau1());
  out.add_scaled(dissipator(number_operator(rho.dim()), rho), dev.tau2());
  return out;
}

ComplexMatrix rhs(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                  const ComplexMatrix& rho, double /*t_us*/) {
  const cplx minus_i(0.0, -1.0);
  ComplexMatrix h = hamiltonian(dev, exp);
  const auto* sp = source ? std::get_if<StructurePreservingSource>(source) : nullptr;
  if (sp) h += sp_hermitian(*sp);
  ComplexMatrix out = minus_i * commutator(h, rho);
  out += lindblad_dissipator(dev, rho);
  if (sp) {
    out += sp_dissipator(*sp, rho);
  } else if (source) {
    out += net_forward(std::get<NetworkSource>(*source), rho);
  }
  return out;
}

Generator::Generator(const DeviceModel& dev, const Experiment& exp, const SourceModel* source) {
  dev.validate();
  const int n = dev.dim;
  ComplexMatrix h = hamiltonian(dev, exp);
  if (dev.base == BaseKind::Lindblad) {
    jumps_.push_back({lowering_operator(n), lowering_operator(n).adjoint(), dev.tau1()});
    jumps_.push_back({number_operator(n), number_operator(n), dev.tau2()});
  }
  if (source) {
    if (source_dim(*source) != n) {
      fail(ErrorCode::InvalidArgument, "Generator: source dimension does not match device");
    }
    source_ = *source;
    params_ = qude::param_count(*source_);
    if (const auto* sp = std::get_if<StructurePreservingSource>(&*source_)) {
      h += sp_hermitian(*sp);
      for (std::size_t j = 0; j < sp->channels(); ++j) {
        const double g = sp->gamma(j);
        if (g != 0.0) jumps_.push_back({sp->basis.uppers[j], sp->basis.uppers[j].adjoint(), g});
      }
    }
  }
  drift_ = cplx(0.0, -1.0) * h;
  for (const auto& j : jumps_) drift_.add_scaled(j.op_adj * j.op, -0.5 * j.rate);
  drift_adj_ = drift_.adjoint();
}

ComplexMatrix Generator::operator()(const ComplexMatrix& rho) const {
  ComplexMatrix x = drift_ * rho;
  for (const auto& j : jumps_) x.add_scaled(j.op * rho * j.op_adj, 0.5 * j.rate);
  ComplexMatrix out = hermitian_sum(x);
  if (const auto* net = network()) out += net_forward(*net, rho);
  return out;
}

ComplexMatrix Generator::pullback(const ComplexMatrix& rho, const ComplexMatrix& mu,
                                  std::span<double> grad) const {
  ComplexMatrix y = drift_adj_ * mu;
  for (const auto& j : jumps_) y.add_scaled(j.op_adj * mu * j.op, 0.5 * j.rate);
  ComplexMatrix out = hermitian_sum(y);
  if (const auto* net = network()) {
    out += net_pullback(*net, rho, mu, grad);
  } else if (source_) {
    sp_pullback_params(std::get<StructurePreservingSource>(*source_), rho, mu, grad);
  }
  return out;
}

ComplexMatrix rk4_step(const Generator& f, const ComplexMatrix& rho, double h) {
  const ComplexMatrix k1 = f(rho);
  const ComplexMatrix k2 = f(rho + (0.5 * h) * k1);
  const ComplexMatrix k3 = f(rho + (0.5 * h) * k2);
  const ComplexMatrix k4 = f(rho + h * k3);
  ComplexMatrix next = rho;
  next.add_scaled(k1, h / 6.0);
  next.add_scaled(k2, h / 3.0);
  next.add_scaled(k3, h / 3.0);
  next.add_scaled(k4, h / 6.0);
  return next;
}

ComplexMatrix rk4_pullback(const Generator& f, const ComplexMatrix& rho, const ComplexMatrix& adj_next,
                           double h, std::span<double> grad) {
  // recompute the stage points of the forward step
  const ComplexMatrix& y1 = rho;
  const ComplexMatrix k1 = f(y1);
  const ComplexMatrix y2 = rho + (0.5 * h) * k1;
  const ComplexMatrix k2 = f(y2);
  const ComplexMatrix y3 = rho + (0.5 * h) * k2;
  const ComplexMatrix k3 = f(y3);
  const ComplexMatrix y4 = rho + h * k3;

  ComplexMatrix adj = adj_next;
  const ComplexMatrix a4 = f.pullback(y4, (h / 6.0) * adj_next, grad);
  adj += a4;
  ComplexMatrix k3_bar = (h / 3.0) * adj_next;
  k3_bar.add_scaled(a4, h);
  const ComplexMatrix a3 = f.pullback(y3, k3_bar, grad);
  adj += a3;
  ComplexMatrix k2_bar = (h / 3.0) * adj_next;
  k2_bar.add_scaled(a3, 0.5 * h);
  const ComplexMatrix a2 = f.pullback(y2, k2_bar, grad);
  adj += a2;
  ComplexMatrix k1_bar = (h / 6.0) * adj_next;
  k1_bar.add_scaled(a2, 0.5 * h);
  adj += f.pullback(y1, k1_bar, grad);
  return adj;
}

namespace {

[[noreturn]] void diverged(double t_us) {
  std::ostringstream os;
  os << "integration diverged: non-finite state at t = " << t_us << " us";
  fail(ErrorCode::Divergence, os.str());
}

}  // namespace

std::vector<ComplexMatrix> integrate_steps(const Generator& f, const ComplexMatrix& rho0, double h,
                                           long steps) {
  std::vector<ComplexMatrix> states;
  states.reserve(static_cast<std::size_t>(steps + 1));
  states.push_back(rho0);
  for (long s = 0; s < steps; ++s) {
    states.push_back(rk4_step(f, states.back(), h));
    if (!states.back().all_finite()) diverged(static_cast<double>(s + 1) * h);
  }
  return states;
}

long steps_per_sample(double sample_dt_ns, double dt_internal_ns) {
  if (!(dt_internal_ns > 0.0)) {
    fail(ErrorCode::InvalidConfiguration, "dt_internal must be positive");
  }
  const double ratio = sample_dt_ns / dt_internal_ns;
  const long k = std::lround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "dt_internal " << dt_internal_ns << " ns does not divide sample_dt " << sample_dt_ns << " ns";
    fail(ErrorCode::InvalidConfiguration, os.str());
  }
  return k;
}

Trajectory integrate_rk4(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                         double dt_internal_ns, bool include_t0) {
  exp.validate();
  const long per_sample = steps_per_sample(exp.sample_dt_ns, dt_internal_ns);
  const long samples = exp.sample_count();
  const Generator f(dev, exp, source);
  const double h = dt_internal_ns / 1000.0;

  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(samples + 1));
  traj.states.reserve(static_cast<std::size_t>(samples + 1));
  ComplexMatrix rho = exp.initial(dev.dim).matrix();
  if (include_t0) {
    traj.times.push_back(0.0);
    traj.states.push_back(rho);
  }
  for (long j = 1; j <= samples; ++j) {
    for (long s = 0; s < per_sample; ++s) rho = rk4_step(f, rho, h);
    if (!rho.all_finite()) diverged(exp.sample_time_us(j));
    traj.times.push_back(exp.sample_time_us(j));
    traj.states.push_back(rho);
  }
  return traj;
}

}  // namespace qude
