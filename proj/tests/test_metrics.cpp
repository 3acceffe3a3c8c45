#include <cmath>
#include <numeric>

#include "doctest.h"
#include "qude/pipeline.hpp"
#include "support.hpp"

using namespace qude;

namespace {

TomographyRecord exact_record(double t, const ComplexMatrix& rho) { return make_record(t, rho, 0, nullptr); }

ExperimentSource lindblad_twin(double dt_ns = 4.0) {
  return [dt_ns](const Experiment& e) {
    return simulate_experiment(DeviceModel::dev1(), e, nullptr, 0, 0, dt_ns);
  };
}

}  // namespace

TEST_CASE("trace distance series") {
  const ComplexMatrix half = DensityMatrix::maximally_mixed(2).matrix();
  const ComplexMatrix skew{{0.75, 0}, {0, 0.25}};
  Trajectory pred{{0.004, 0.008}, {skew, half}};
  const std::vector<TomographyRecord> targets{exact_record(0.004, half), exact_record(0.008, half)};
  const auto s = trace_distance_series(pred, targets);
  REQUIRE(s.size() == 2);
  CHECK(s[0].value == doctest::Approx(0.25));
  CHECK(s[1].value == doctest::Approx(0.0));

  // predictions are filtered before comparison
  pred.states[0] = ComplexMatrix{{1.1, 0}, {0, -0.1}};
  CHECK(trace_distance_series(pred, targets)[0].value == doctest::Approx(0.5));

  const std::vector<TomographyRecord> off{exact_record(0.006, half)};
  CHECK_THROWS_AS(trace_distance_series(pred, off), Error);
}

TEST_CASE("moments and moment table") {
  const std::vector<double> one{0.25};
  CHECK(moments(one).mean == 0.25);
  CHECK(moments(one).stddev == 0.0);
  const std::vector<double> two{0.1, 0.3};
  CHECK(moments(two).mean == doctest::Approx(0.2));
  CHECK(moments(two).stddev == doctest::Approx(0.1));
  CHECK_THROWS_AS(moments(std::vector<double>{}), Error);

  const std::vector<SplitValues> series{{"sp", "interpolation", {0.1, 0.3}},
                                        {"base", "extrapolation", {0.5}},
                                        {"sp", "extrapolation", {}},
                                        {"base", "interpolation", {0.2}}};
  const MomentTable table = moment_table(series);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].model == "base");
  CHECK(table.rows[0].split == "extrapolation");
  CHECK(table.rows[1].split == "interpolation");
  CHECK(table.rows[2].model == "sp");
  CHECK(table.rows[2].stddev == doctest::Approx(0.1));
  REQUIRE(table.omitted.size() == 1);
  CHECK(table.omitted[0] == std::pair<std::string, std::string>{"sp", "extrapolation"});
}

TEST_CASE("histogram density") {
  auto mass = [](const std::vector<HistogramBin>& h) {
    double m = 0.0;
    for (const auto& b : h) m += b.density * (b.hi - b.lo);
    return m;
  };
  SUBCASE("identical values fill one bin") {
    for (double v : {0.0, 0.3}) {
      const std::vector<double> vals(10, v);
      const auto h = histogram_density(vals, 5);
      REQUIRE(h.size() == 5);
      int occupied = 0;
      for (const auto& b : h) occupied += b.density > 0.0;
      CHECK(occupied == 1);
      CHECK(mass(h) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("uniform values give a flat density") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> vals(20000);
    for (double& v : vals) v = u(rng);
    const int bins = 20;
    const auto h = histogram_density(vals, bins);
    CHECK(mass(h) == doctest::Approx(1.0).epsilon(1e-9));
    double chi2 = 0.0;
    for (const auto& b : h) {
      const double observed = b.density * (b.hi - b.lo) * static_cast<double>(vals.size());
      const double expected = (b.hi - b.lo) / h.back().hi * static_cast<double>(vals.size());
      chi2 += (observed - expected) * (observed - expected) / expected;
    }
    // 95th percentile of chi-square with 19 degrees of freedom
    CHECK(chi2 < 30.14);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(histogram_density(std::vector<double>{}), Error);
    CHECK_THROWS_AS(histogram_density(std::vector<double>{0.1}, 1), Error);
    CHECK_THROWS_AS(histogram_density(std::vector<double>{1.5}), Error);
  }
}

TEST_CASE("expected trace distance") {
  SamplingPlan plan;
  plan.duration_us = 2.0;
  SUBCASE("the generating model scores zero") {
    const auto r = expected_trace_distance(nullptr, DeviceModel::dev1(), lindblad_twin(), 4, 9, plan);
    CHECK(r.mean < 1e-12);
    CHECK(r.n_samples == 4);
    for (double a : r.amplitudes_mhz) CHECK((a > 0.0 && a <= 3.47));
  }
  SUBCASE("deterministic in the seed") {
    const auto lvn = DeviceModel::dev1(BaseKind::LvN);
    const auto a = expected_trace_distance(nullptr, lvn, lindblad_twin(), 3, 5, plan);
    const auto b = expected_trace_distance(nullptr, lvn, lindblad_twin(), 3, 5, plan);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.amplitudes_mhz == b.amplitudes_mhz);
    const auto c = expected_trace_distance(nullptr, lvn, lindblad_twin(), 3, 6, plan);
    CHECK(a.amplitudes_mhz != c.amplitudes_mhz);
  }
  SUBCASE("standard error shrinks like 1/sqrt(n)") {
    // a model missing fast decay channels; the spread of the estimate is measured over seeds
    const SourceModel fast =
        StructurePreservingSource::from_physical(std::vector<double>{0, 0, 0}, std::vector<double>{2, 2, 1});
    const ExperimentSource truth = [&](const Experiment& e) {
      return simulate_experiment(DeviceModel::dev1(), e, &fast, 0, 0);
    };
    plan.duration_us = 0.5;
    const int seeds = 120;
    std::vector<double> small, large;
    double reported = 0.0;
    for (int s = 0; s < seeds; ++s) {
      small.push_back(expected_trace_distance(nullptr, DeviceModel::dev1(), truth, 16, 1000 + s, plan).mean);
      const auto r = expected_trace_distance(nullptr, DeviceModel::dev1(), truth, 32, 5000 + s, plan);
      large.push_back(r.mean);
      reported += r.std_error / seeds;
    }
    const double ratio = moments(large).stddev / moments(small).stddev;
    MESSAGE("spread ratio " << ratio << ", reported " << reported << " vs spread " << moments(large).stddev);
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
    CHECK(reported == doctest::Approx(moments(large).stddev).epsilon(0.3));
  }
}

TEST_CASE("unitary base model falls behind the dissipative one") {
  SamplingPlan plan;
  plan.duration_us = 12.0;
  const auto lvn = expected_trace_distance(nullptr, DeviceModel::dev1(BaseKind::LvN), lindblad_twin(), 6, 3, plan);
  // the series grows as decoherence accumulates: compare successive 2 us window means
  std::vector<double> windows(6, 0.0);
  std::vector<int> counts(6, 0);
  for (const auto& p : lvn.series) {
    const auto w = std::min<std::size_t>(5, static_cast<std::size_t>((p.time_us - 1e-9) / 2.0));
    windows[w] += p.value;
    ++counts[w];
  }
  for (std::size_t w = 0; w < windows.size(); ++w) windows[w] /= counts[w];
  for (std::size_t w = 1; w < windows.size(); ++w) CHECK(windows[w] > windows[w - 1]);

  plan.t_from_us = 6.0;
  const auto late_lvn =
      expected_trace_distance(nullptr, DeviceModel::dev1(BaseKind::LvN), lindblad_twin(), 6, 3, plan);
  const auto late_lindblad = expected_trace_distance(nullptr, DeviceModel::dev1(), lindblad_twin(), 6, 3, plan);
  CHECK(late_lindblad.mean < late_lvn.mean);
}

TEST_CASE("energy series and evaluation") {
  const SourceModel planted =
      StructurePreservingSource::from_physical(std::vector<double>{50, 20, 90}, std::vector<double>{5, 5, 4});
  Dataset d;
  d.train_horizon_us = 1.0;
  d.total_horizon_us = 3.0;
  for (double p : {1.0, 2.0}) {
    Experiment e;
    e.id = "p" + std::to_string(static_cast<int>(p));
    e.amplitude_p_mhz = p;
    e.duration_us = 3.0;
    e.sample_dt_ns = 4.0;
    d.experiments.push_back(simulate_experiment(DeviceModel::dev1(), e, &planted, 0, 0));
  }
  const auto tr = predict(DeviceModel::dev1(), d.experiments[0].experiment, &planted);
  const auto energy = energy_series(tr, d.experiments[0].records);
  REQUIRE(energy.size() == 750);
  for (const auto& p : energy) CHECK(std::abs(p.energy_pred - p.energy_target) < 1e-12);

  const EvalReport perfect = evaluate("sp", &planted, DeviceModel::dev1(), d);
  const EvalReport base = evaluate("base", nullptr, DeviceModel::dev1(), d);
  REQUIRE(perfect.per_experiment.size() == 4);
  CHECK(perfect.per_experiment[0].split == "interpolation");
  CHECK(perfect.per_experiment[0].count == 250);
  CHECK(perfect.per_experiment[1].count == 500);
  for (const auto& row : perfect.moments.rows) CHECK(row.mean < 1e-12);
  REQUIRE(base.moments.rows.size() == 2);
  for (const auto& row : base.moments.rows) {
    CHECK(row.mean > 1e-3);
    CHECK(row.mean <= 1.0);
  }
  REQUIRE(base.histograms.size() == 2);
}
