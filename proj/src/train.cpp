#include "qude/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "qude/parallel.hpp"

namespace qude {

std::size_t Dataset::record_count() const {
  std::size_t n = 0;
  for (const auto& e : experiments) n += e.records.size();
  return n;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double t_train_us) {
  if (!(t_train_us > 0.0 && t_train_us < data.total_horizon_us)) {
    std::ostringstream os;
    os << "split: training horizon " << t_train_us << " us outside (0, " << data.total_horizon_us << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  Dataset train, valid;
  train.train_horizon_us = valid.train_horizon_us = t_train_us;
  train.total_horizon_us = valid.total_horizon_us = data.total_horizon_us;
  for (const auto& e : data.experiments) {
    ExperimentData a{e.experiment, {}}, b{e.experiment, {}};
    for (const auto& r : e.records) (r.time_us <= t_train_us + 1e-12 ? a : b).records.push_back(r);
    train.experiments.push_back(std::move(a));
    valid.experiments.push_back(std::move(b));
  }
  return {std::move(train), std::move(valid)};
}

const char* to_string(TrainMode mode) {
  return mode == TrainMode::ExperimentGeneralized ? "exp-gen" : "exp-spec";
}

TrainMode parse_train_mode(const std::string& s) {
  if (s == "exp-gen") return TrainMode::ExperimentGeneralized;
  if (s == "exp-spec") return TrainMode::ExperimentSpecific;
  fail(ErrorCode::InvalidArgument, "unknown training mode '" + s + "' (expected exp-gen|exp-spec)");
}

const char* to_string(GradMethod m) {
  return m == GradMethod::DiscreteAdjoint ? "discrete_adjoint" : "finite_difference";
}

GradMethod parse_grad_method(const std::string& s) {
  if (s == "discrete_adjoint" || s == "adjoint") return GradMethod::DiscreteAdjoint;
  if (s == "finite_difference" || s == "fd") return GradMethod::FiniteDifference;
  fail(ErrorCode::InvalidArgument, "unknown gradient method '" + s + "'");
}

void TrainConfig::validate(std::size_t experiment_count) const {
  if (experiment_count == 0) fail(ErrorCode::InvalidConfiguration, "training needs at least one experiment");
  if (!(adam.learning_rate > 0.0)) fail(ErrorCode::InvalidConfiguration, "learning rate must be positive");
  if (adam.epochs < 0 || lbfgs.max_iterations < 0) {
    fail(ErrorCode::InvalidConfiguration, "iteration counts must be non-negative");
  }
  if (lbfgs.memory < 1) fail(ErrorCode::InvalidConfiguration, "L-BFGS memory must be at least 1");
  if (mode == TrainMode::ExperimentGeneralized &&
      (adam.batch_size < 1 || static_cast<std::size_t>(adam.batch_size) > experiment_count)) {
    fail(ErrorCode::InvalidConfiguration, "batch size must be in [1, experiment count]");
  }
  if (mode == TrainMode::ExperimentSpecific && experiment_index >= experiment_count) {
    fail(ErrorCode::InvalidConfiguration, "experiment index out of range");
  }
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd coords(const std::vector<ComplexMatrix>& frame, const ComplexMatrix& h) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(frame.size()));
  for (std::size_t i = 0; i < frame.size(); ++i) r(static_cast<Eigen::Index>(i)) = real_inner(frame[i], h);
  return r;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// Matrix of the generator and the RK4 step P(hL) = 1 + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24.
struct Propagator {
  Eigen::MatrixXd a;  // hL
  Eigen::MatrixXd step;
};

Propagator propagator(const Generator& f, const std::vector<ComplexMatrix>& frame, double h) {
  const auto n = static_cast<Eigen::Index>(frame.size());
  Propagator p;
  p.a.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) p.a.col(j) = h * coords(frame, f(frame[static_cast<std::size_t>(j)]));
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  p.step = id + p.a * (id + p.a * (id + p.a * (id + p.a / 4.0) / 3.0) / 2.0);
  return p;
}

[[noreturn]] void diverged_at(double t_us) {
  std::ostringstream os;
  os << "integration diverged: non-finite state at t = " << t_us << " us";
  fail(ErrorCode::Divergence, os.str());
}

}  // namespace

Objective::Objective(const Dataset& data, const DeviceModel& dev, std::optional<SourceModel> shape,
                     double dt_internal_ns, int threads)
    : dev_(dev), shape_(std::move(shape)), h_us_(dt_internal_ns / 1000.0), threads_(threads) {
  dev_.validate();
  if (!(dt_internal_ns > 0.0)) fail(ErrorCode::InvalidConfiguration, "dt_internal must be positive");
  if (shape_ && source_dim(*shape_) != dev_.dim) {
    fail(ErrorCode::InvalidArgument, "Objective: model dimension does not match device");
  }
  params_ = shape_ ? qude::param_count(*shape_) : 0;
  linear_ = !shape_ || std::holds_alternative<StructurePreservingSource>(*shape_);
  const HermitianBasis basis = hermitian_basis(dev_.dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    frame_.push_back((1.0 / std::sqrt(basis.gram_norms[i])) * basis.elements[i]);
  }
  for (const auto& e : data.experiments) {
    ExperimentTargets t{e.experiment, {}, 0};
    for (const auto& r : e.records) {
      if (r.time_us > data.train_horizon_us + 1e-12) continue;
      const long step = std::lround(r.time_us * 1000.0 / dt_internal_ns);
      if (std::abs(static_cast<double>(step) * h_us_ - r.time_us) > 1e-9 || step < 0) {
        std::ostringstream os;
        os << "record at t = " << r.time_us << " us of " << e.experiment.id
           << " is not on the integration grid";
        fail(ErrorCode::InvalidArgument, os.str());
      }
      if (r.rho_hat.dim() != dev_.dim) fail(ErrorCode::InvalidArgument, "record dimension mismatch");
      const Eigen::VectorXd x = coords(frame_, r.rho_hat.matrix());
      t.targets.push_back({step, r.rho_hat.matrix(), std::vector<double>(x.begin(), x.end())});
    }
    std::stable_sort(t.targets.begin(), t.targets.end(),
                     [](const Target& a, const Target& b) { return a.step < b.step; });
    t.last_step = t.targets.empty() ? 0 : t.targets.back().step;
    targets_.push_back(std::move(t));
  }
}

std::optional<SourceModel> Objective::model_at(std::span<const double> theta) const {
  if (theta.size() != params_) {
    fail(ErrorCode::InvalidArgument, "Objective: expected " + std::to_string(params_) + " parameters, got " +
                                         std::to_string(theta.size()));
  }
  if (!shape_) return std::nullopt;
  return unpack_params(*shape_, theta);
}

namespace {

[[noreturn]] void rethrow_with_context(const Error& e, const Experiment& exp, std::span<const double> theta) {
  std::ostringstream os;
  os << e.what() << " [experiment " << exp.id << ", theta = (";
  for (std::size_t i = 0; i < theta.size() && i < 8; ++i) os << (i ? ", " : "") << theta[i];
  if (theta.size() > 8) os << ", ...";
  os << ")]";
  throw Error(e.code(), os.str());
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

double Objective::linear_value(const ExperimentTargets& e, const std::optional<SourceModel>& src) const {
  const Generator f(dev_, e.experiment, src ? &*src : nullptr);
  const Propagator p = propagator(f, frame_, h_us_);
  Eigen::VectorXd r = coords(frame_, e.experiment.initial(dev_.dim).matrix());
  double total = 0.0;
  std::size_t next = 0;
  for (long step = 0; step <= e.last_step; ++step) {
    if (step > 0) r = p.step * r;
    while (next < e.targets.size() && e.targets[next].step == step) {
      if (!r.allFinite()) diverged_at(static_cast<double>(step) * h_us_);
      total += (r - as_vector(e.targets[next].coords)).squaredNorm();
      ++next;
    }
  }
  return total;
}

double Objective::linear_gradient(const ExperimentTargets& e, const std::optional<SourceModel>& src,
                                  std::span<double> grad) const {
  const Generator f(dev_, e.experiment, src ? &*src : nullptr);
  const Propagator p = propagator(f, frame_, h_us_);
  const auto n = static_cast<Eigen::Index>(frame_.size());
  Eigen::MatrixXd states(n, e.last_step + 1);
  states.col(0) = coords(frame_, e.experiment.initial(dev_.dim).matrix());
  for (long step = 1; step <= e.last_step; ++step) states.col(step) = p.step * states.col(step - 1);
  if (!states.allFinite()) {
    long bad = 0;
    while (states.col(bad).allFinite()) ++bad;
    diverged_at(static_cast<double>(bad) * h_us_);
  }

  // adjoint sweep; c accumulates sum_k r_{k-1} a_k^T so that d loss = Tr(dP c)
  double total = 0.0;
  Eigen::VectorXd adj = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  std::size_t idx = e.targets.size();
  for (long step = e.last_step; step >= 1; --step) {
    while (idx > 0 && e.targets[idx - 1].step == step) {
      const Eigen::VectorXd diff = states.col(step) - as_vector(e.targets[idx - 1].coords);
      total += diff.squaredNorm();
      adj += 2.0 * diff;
      --idx;
    }
    c.noalias() += states.col(step - 1) * adj.transpose();
    adj = p.step.transpose() * adj;
  }
  while (idx > 0) {
    total += (states.col(0) - as_vector(e.targets[idx - 1].coords)).squaredNorm();
    --idx;
  }
  if (params_ == 0) return total;

  // dP = sum_m 1/m! sum_{a+b=m-1} A^a dA A^b, so Tr(dP c) = Tr(dL m) with
  // m = h sum_m 1/m! sum_{a+b=m-1} A^b c A^a
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::MatrixXd> pow{id, p.a, p.a * p.a, p.a * p.a * p.a};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  double factorial = 1.0;
  for (int order = 1; order <= 4; ++order) {
    factorial *= order;
    for (int a = 0; a < order; ++a) {
      m += pow[static_cast<std::size_t>(order - 1 - a)] * c * pow[static_cast<std::size_t>(a)] / factorial;
    }
  }
  m *= h_us_;
  // Tr(dL m) = sum_ij dL_ij m_ji; column j of dL is the generator derivative at frame_j
  for (Eigen::Index j = 0; j < n; ++j) {
    ComplexMatrix mu(dev_.dim);
    for (Eigen::Index i = 0; i < n; ++i) mu.add_scaled(frame_[static_cast<std::size_t>(i)], m(j, i));
    f.pullback(frame_[static_cast<std::size_t>(j)], mu, grad);
  }
  return total;
}

double Objective::experiment_value(const ExperimentTargets& e, const std::optional<SourceModel>& src) const {
  if (e.targets.empty()) return 0.0;
  if (linear_) return linear_value(e, src);
  const Generator f(dev_, e.experiment, src ? &*src : nullptr);
  ComplexMatrix rho = e.experiment.initial(dev_.dim).matrix();
  double total = 0.0;
  std::size_t next = 0;
  for (long step = 0; step <= e.last_step; ++step) {
    if (step > 0) {
      rho = rk4_step(f, rho, h_us_);
      if (!rho.all_finite()) {
        std::ostringstream os;
        os << "integration diverged: non-finite state at t = " << static_cast<double>(step) * h_us_ << " us";
        fail(ErrorCode::Divergence, os.str());
      }
    }
    while (next < e.targets.size() && e.targets[next].step == step) {
      total += (rho - e.targets[next].rho).frobenius_norm2();
      ++next;
    }
  }
  return total;
}

double Objective::experiment_gradient(const ExperimentTargets& e, const std::optional<SourceModel>& src,
                                      std::span<double> grad) const {
  if (e.targets.empty()) return 0.0;
  if (linear_) return linear_gradient(e, src, grad);
  const Generator f(dev_, e.experiment, src ? &*src : nullptr);
  const auto states = integrate_steps(f, e.experiment.initial(dev_.dim).matrix(), h_us_, e.last_step);

  double total = 0.0;
  ComplexMatrix adj(dev_.dim);
  std::size_t idx = e.targets.size();
  for (long step = e.last_step; step >= 1; --step) {
    while (idx > 0 && e.targets[idx - 1].step == step) {
      const ComplexMatrix diff = states[static_cast<std::size_t>(step)] - e.targets[idx - 1].rho;
      total += diff.frobenius_norm2();
      adj.add_scaled(diff, 2.0);
      --idx;
    }
    adj = rk4_pullback(f, states[static_cast<std::size_t>(step - 1)], adj, h_us_, grad);
  }
  // targets at t = 0 add to the loss but not to the gradient
  while (idx > 0) {
    total += (states[0] - e.targets[idx - 1].rho).frobenius_norm2();
    --idx;
  }
  return total;
}

double Objective::value(std::span<const double> theta) const {
  const auto idx = all_indices(targets_.size());
  return value(theta, idx);
}

double Objective::value(std::span<const double> theta, std::span<const std::size_t> subset) const {
  const auto src = model_at(theta);
  std::vector<double> parts(subset.size(), 0.0);
  parallel_for(subset.size(), threads_, [&](std::size_t i) {
    const auto& e = targets_.at(subset[i]);
    try {
      parts[i] = experiment_value(e, src);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::Divergence) throw;
      rethrow_with_context(err, e.experiment, theta);
    }
  });
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

double Objective::value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
  const auto idx = all_indices(targets_.size());
  return value_and_gradient(theta, idx, grad);
}

double Objective::value_and_gradient(std::span<const double> theta, std::span<const std::size_t> subset,
                                     std::span<double> grad) const {
  const auto src = model_at(theta);
  std::vector<double> parts(subset.size(), 0.0);
  std::vector<std::vector<double>> grads(subset.size(), std::vector<double>(params_, 0.0));
  parallel_for(subset.size(), threads_, [&](std::size_t i) {
    const auto& e = targets_.at(subset[i]);
    try {
      parts[i] = experiment_gradient(e, src, grads[i]);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::Divergence) throw;
      rethrow_with_context(err, e.experiment, theta);
    }
  });
  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    total += parts[i];
    for (std::size_t p = 0; p < params_; ++p) grad[p] += grads[i][p];
  }
  for (double g : grad) {
    if (!std::isfinite(g)) fail(ErrorCode::GradientFailure, "gradient has non-finite components");
  }
  return total;
}

double Objective::value_and_fd_gradient(std::span<const double> theta, std::span<double> grad) const {
  std::vector<double> x(theta.begin(), theta.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(std::abs(theta[i]), 1.0);
    x[i] = theta[i] + h;
    const double up = value(x);
    x[i] = theta[i] - h;
    const double down = value(x);
    x[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
    if (!std::isfinite(grad[i])) fail(ErrorCode::GradientFailure, "finite-difference gradient is not finite");
  }
  return value(theta);
}

double loss(std::span<const double> theta, const Dataset& data, const DeviceModel& dev,
            const std::optional<SourceModel>& shape, double dt_internal_ns) {
  return Objective(data, dev, shape, dt_internal_ns).value(theta);
}

std::vector<double> gradient(std::span<const double> theta, const Dataset& data, const DeviceModel& dev,
                             const std::optional<SourceModel>& shape, double dt_internal_ns,
                             GradMethod method) {
  const Objective obj(data, dev, shape, dt_internal_ns);
  std::vector<double> g(obj.param_count(), 0.0);
  if (method == GradMethod::DiscreteAdjoint) {
    obj.value_and_gradient(theta, g);
  } else {
    obj.value_and_fd_gradient(theta, g);
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

FitResult fit(const Dataset& data, const DeviceModel& dev, const SourceModel& initial, const TrainConfig& cfg) {
  cfg.validate(data.experiments.size());
  Dataset working = data;
  if (cfg.mode == TrainMode::ExperimentSpecific) {
    working.experiments = {data.experiments[cfg.experiment_index]};
  }
  const Objective obj(working, dev, initial, cfg.dt_internal_ns, cfg.threads);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  FitResult res;
  std::vector<double> theta = pack_params(initial);
  std::vector<double> grad(theta.size(), 0.0);
  auto record = [&](long it, const char* phase, double f, std::span<const double> g) {
    const double gn = norm2(g);
    res.history.push_back({it, phase, f, gn, elapsed()});
    res.loss_history.push_back(f);
    res.grad_norm_history.push_back(gn);
  };

  const std::size_t n_exp = obj.experiment_count();
  const bool full_batch = cfg.mode == TrainMode::ExperimentSpecific ||
                          static_cast<std::size_t>(cfg.adam.batch_size) >= n_exp;
  const std::size_t batch = full_batch ? n_exp : static_cast<std::size_t>(cfg.adam.batch_size);

  auto batch_value_grad = [&](std::span<const std::size_t> subset, std::span<const double> x,
                              std::span<double> g) {
    if (cfg.grad_method == GradMethod::DiscreteAdjoint) return obj.value_and_gradient(x, subset, g);
    // central differences restricted to the batch
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double h = 1e-6 * std::max(std::abs(x[i]), 1.0);
      xp[i] = x[i] + h;
      const double up = obj.value(xp, subset);
      xp[i] = x[i] - h;
      const double down = obj.value(xp, subset);
      xp[i] = x[i];
      g[i] = (up - down) / (2.0 * h);
    }
    return obj.value(x, subset);
  };

  Adam adam(theta.size(), cfg.adam);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = all_indices(n_exp);
  long iteration = 0;
  for (int epoch = 0; epoch < cfg.adam.epochs && !theta.empty(); ++epoch) {
    if (!full_batch) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n_exp; start += batch) {
      const std::size_t stop = std::min(n_exp, start + batch);
      const std::span<const std::size_t> subset(order.data() + start, stop - start);
      const double f = batch_value_grad(subset, theta, grad);
      record(++iteration, "adam", f, grad);
      adam.step(theta, grad);
    }
  }

  const auto all = all_indices(n_exp);
  res.adam_final_loss = batch_value_grad(all, theta, grad);
  record(iteration, "adam-final", res.adam_final_loss, grad);

  const ValueAndGradient fg = [&](std::span<const double> x, std::span<double> g) {
    return batch_value_grad(all, x, g);
  };
  const auto lb = lbfgs_minimize(fg, theta, cfg.lbfgs, [&](int it, double f, std::span<const double> g) {
    record(iteration + it, "lbfgs", f, g);
  });

  res.theta_star = lb.x;
  res.final_loss = lb.f;
  res.stalled = lb.stalled;
  res.model = unpack_params(initial, res.theta_star);
  res.wall_time_s = elapsed();
  return res;
}

FitResult fit(const Dataset& data, const DeviceModel& dev, AnsatzKind kind, const TrainConfig& cfg) {
  SourceOptions opts = cfg.source;
  opts.seed = cfg.seed;
  return fit(data, dev, make_source(kind, dev.dim, opts), cfg);
}

}  // namespace qude
