#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qude/pipeline.hpp"
#include "support.hpp"

using namespace qude;

namespace {

Experiment pulse(std::string id, double p_mhz, double duration_us) {
  Experiment e;
  e.id = std::move(id);
  e.amplitude_p_mhz = p_mhz;
  e.duration_us = duration_us;
  e.sample_dt_ns = 4.0;
  return e;
}

SourceModel planted_sp() {
  return StructurePreservingSource::from_physical(std::vector<double>{40, -60, 80}, std::vector<double>{4, 6, 3});
}

Dataset twin(const SourceModel* planted, double duration_us, double horizon_us, int shots = 0,
             std::vector<double> amps = {1.2, 3.0}) {
  Dataset d;
  d.train_horizon_us = horizon_us;
  d.total_horizon_us = duration_us;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    d.experiments.push_back(simulate_experiment(DeviceModel::dev1(), pulse("e" + std::to_string(i), amps[i], duration_us),
                                                planted, shots, 100 + i));
  }
  return d;
}

std::vector<double> random_theta(const SourceModel& shape, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> t(param_count(shape));
  for (double& x : t) x = u(rng);
  return t;
}

// Componentwise relative error. Components below floor * max|b| are measured
// against that floor: central differences with a 1e-6 step carry ~1e-8
// absolute round-off here, which swamps a 1e-5 relative check on them.
double max_rel_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-3) {
  double scale = 0.0;
  for (double x : b) scale = std::max(scale, std::abs(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor * scale));
  }
  return worst;
}

}  // namespace

TEST_CASE("time split") {
  const Dataset d = twin(nullptr, 50.0, 10.0, 0, {1.0});
  REQUIRE(d.record_count() == 12500);
  const auto [train, val] = split(d, 10.0);
  CHECK(train.experiments[0].records.size() == 2500);
  CHECK(val.experiments[0].records.size() == 10000);
  CHECK(train.experiments[0].records.back().time_us == doctest::Approx(10.0));
  CHECK(val.experiments[0].records.front().time_us > 10.0);
  CHECK_THROWS_AS(split(d, 60.0), Error);
  CHECK_THROWS_AS(split(d, -1.0), Error);
}

TEST_CASE("loss vanishes on exact bare data") {
  const Dataset d = twin(nullptr, 1.0, 1.0);
  const SourceModel zeros[] = {StructurePreservingSource::zero(2), NetworkSource::zero(2, 1, Activation::Identity),
                               NetworkSource::zero(2, 3, Activation::Tanh)};
  for (const auto& zero : zeros) CHECK(loss(pack_params(zero), d, DeviceModel::dev1(), zero) < 1e-24);
  CHECK(loss(std::vector<double>{}, d, DeviceModel::dev1(), std::nullopt) < 1e-24);
}

TEST_CASE("adjoint gradient agrees with central differences") {
  const SourceModel planted = planted_sp();
  const Dataset d = twin(&planted, 0.5, 0.5, 0, {2.5});
  struct Case {
    AnsatzKind kind;
    double scale;
  };
  for (const Case c : {Case{AnsatzKind::StructurePreserving, 0.5}, Case{AnsatzKind::Affine, 0.05},
                       Case{AnsatzKind::Nonlinear, 0.3}}) {
    const SourceModel shape = make_source(c.kind, 2);
    const auto theta = random_theta(shape, 7, c.scale);
    const auto an = gradient(theta, d, DeviceModel::dev1(), shape);
    const auto fd = gradient(theta, d, DeviceModel::dev1(), shape, 4.0, GradMethod::FiniteDifference);
    const double err = max_rel_error(an, fd);
    MESSAGE(std::string(to_string(c.kind)) << " max relative error " << err << " (floor 1e-6: "
                                           << max_rel_error(an, fd, 1e-6) << ")");
    CHECK(err < 1e-5);
    // a coarser step is limited by truncation instead and resolves every component
    std::vector<double> coarse(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto up = theta, down = theta;
      const double h = 1e-4 * std::max(std::abs(theta[i]), 1.0);
      up[i] += h;
      down[i] -= h;
      coarse[i] = (loss(up, d, DeviceModel::dev1(), shape) - loss(down, d, DeviceModel::dev1(), shape)) / (2 * h);
    }
    CHECK(max_rel_error(an, coarse, 1e-6) < 1e-5);
  }
}

TEST_CASE("linear models match stage-wise RK4 and its pullback") {
  const SourceModel planted = planted_sp();
  const DeviceModel dev = DeviceModel::dev1();
  const Dataset d = twin(&planted, 1.0, 1.0, 500, {2.0});
  const SourceModel shape = make_source(AnsatzKind::StructurePreserving, 2);
  const auto theta = random_theta(shape, 9, 0.5);
  const SourceModel model = unpack_params(shape, theta);

  const auto& exp = d.experiments[0];
  const Generator f(dev, exp.experiment, &model);
  const long steps = std::lround(exp.records.back().time_us / 0.004);
  const auto states = integrate_steps(f, exp.experiment.initial(2).matrix(), 0.004, steps);
  double ref_loss = 0.0;
  std::vector<double> ref_grad(theta.size(), 0.0);
  ComplexMatrix adj(2);
  std::size_t idx = exp.records.size();
  for (long step = steps; step >= 0; --step) {
    while (idx > 0 && std::lround(exp.records[idx - 1].time_us / 0.004) == step) {
      const ComplexMatrix diff = states[static_cast<std::size_t>(step)] - exp.records[idx - 1].rho_hat.matrix();
      ref_loss += diff.frobenius_norm2();
      adj.add_scaled(diff, 2.0);
      --idx;
    }
    if (step > 0) adj = rk4_pullback(f, states[static_cast<std::size_t>(step - 1)], adj, 0.004, ref_grad);
  }

  std::vector<double> g(theta.size());
  const double value = Objective(d, dev, shape).value_and_gradient(theta, g);
  CHECK(value == doctest::Approx(ref_loss).epsilon(1e-12));
  CHECK(loss(theta, d, dev, shape) == doctest::Approx(ref_loss).epsilon(1e-12));
  CHECK(max_rel_error(g, ref_grad, 1e-9) < 1e-9);
}

TEST_CASE("gradient properties") {
  const SourceModel planted = planted_sp();
  const DeviceModel dev = DeviceModel::dev1();
  const Dataset d = twin(&planted, 1.0, 1.0);
  const SourceModel shape = make_source(AnsatzKind::StructurePreserving, 2);

  SUBCASE("zero at the planted optimum") {
    const auto g = gradient(pack_params(planted), d, dev, shape);
    for (double x : g) CHECK(std::abs(x) < 1e-12);
    CHECK(loss(pack_params(planted), d, dev, shape) < 1e-24);
  }
  SUBCASE("duplicating an experiment doubles its contribution") {
    Dataset one = d;
    one.experiments.resize(1);
    Dataset two = one;
    two.experiments.push_back(one.experiments[0]);
    const auto theta = random_theta(shape, 3, 0.5);
    const auto g1 = gradient(theta, one, dev, shape);
    const auto g2 = gradient(theta, two, dev, shape);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(2 * g1[i]).epsilon(1e-12));
    CHECK(loss(theta, two, dev, shape) == doctest::Approx(2 * loss(theta, one, dev, shape)).epsilon(1e-12));
  }
  SUBCASE("experiment order does not matter") {
    Dataset rev = d;
    std::reverse(rev.experiments.begin(), rev.experiments.end());
    const auto theta = random_theta(shape, 4, 0.5);
    CHECK(loss(theta, rev, dev, shape) == doctest::Approx(loss(theta, d, dev, shape)).epsilon(1e-13));
    const auto a = gradient(theta, d, dev, shape), b = gradient(theta, rev, dev, shape);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  SUBCASE("records past the horizon are ignored") {
    Dataset longer = twin(&planted, 2.0, 1.0);
    const auto theta = random_theta(shape, 5, 0.5);
    CHECK(loss(theta, longer, dev, shape) == doctest::Approx(loss(theta, d, dev, shape)).epsilon(1e-13));
  }
  SUBCASE("threaded evaluation matches serial bit for bit") {
    const auto theta = random_theta(shape, 6, 0.5);
    const Objective serial(d, dev, shape, 4.0, 1), threaded(d, dev, shape, 4.0, 2);
    std::vector<double> ga(param_count(shape)), gb(ga.size());
    CHECK(serial.value_and_gradient(theta, ga) == threaded.value_and_gradient(theta, gb));
    CHECK(ga == gb);
  }
}

TEST_CASE("objective rejects off-grid records") {
  Dataset d = twin(nullptr, 0.5, 0.5);
  d.experiments[0].records[3].time_us += 1e-4;
  CHECK_THROWS_AS(Objective(d, DeviceModel::dev1(), std::nullopt), Error);
}

TEST_CASE("fit") {
  const SourceModel planted = planted_sp();
  const DeviceModel dev = DeviceModel::dev1();
  const Dataset d = twin(&planted, 1.0, 1.0, 0, {0.8, 1.6, 2.4});
  TrainConfig cfg;
  cfg.adam.epochs = 20;
  cfg.lbfgs.max_iterations = 30;
  cfg.seed = 11;

  const FitResult a = fit(d, dev, AnsatzKind::StructurePreserving, cfg);
  const FitResult b = fit(d, dev, AnsatzKind::StructurePreserving, cfg);
  CHECK(a.theta_star == b.theta_star);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.final_loss <= a.adam_final_loss);
  CHECK(a.final_loss == doctest::Approx(loss(a.theta_star, d, dev, a.model)).epsilon(1e-12));
  CHECK(a.history.front().phase == "adam");
  CHECK(a.history.back().phase == "lbfgs");
  CHECK(a.final_loss < a.history.front().loss);

  SUBCASE("experiment-specific mode only sees one experiment") {
    TrainConfig spec = cfg;
    spec.mode = TrainMode::ExperimentSpecific;
    spec.experiment_index = 1;
    const FitResult s = fit(d, dev, AnsatzKind::StructurePreserving, spec);
    Dataset only = d;
    only.experiments = {d.experiments[1]};
    CHECK(s.final_loss == doctest::Approx(loss(s.theta_star, only, dev, s.model)).epsilon(1e-12));
  }
  SUBCASE("invalid configurations") {
    TrainConfig bad = cfg;
    bad.adam.batch_size = 0;
    CHECK_THROWS_AS(fit(d, dev, AnsatzKind::StructurePreserving, bad), Error);
    bad = cfg;
    bad.mode = TrainMode::ExperimentSpecific;
    bad.experiment_index = 3;
    CHECK_THROWS_AS(fit(d, dev, AnsatzKind::StructurePreserving, bad), Error);
    bad = cfg;
    bad.adam.learning_rate = 0.0;
    CHECK_THROWS_AS(fit(d, dev, AnsatzKind::StructurePreserving, bad), Error);
  }
}

TEST_CASE("mode and gradient names") {
  CHECK(parse_train_mode("exp-spec") == TrainMode::ExperimentSpecific);
  CHECK(std::string(to_string(TrainMode::ExperimentGeneralized)) == "exp-gen");
  CHECK(parse_grad_method("fd") == GradMethod::FiniteDifference);
  CHECK(parse_grad_method("adjoint") == GradMethod::DiscreteAdjoint);
  CHECK_THROWS_AS(parse_grad_method("autodiff"), Error);
}
