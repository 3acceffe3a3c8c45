#include "qude/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qude/parallel.hpp"

namespace qude {

namespace {

constexpr double kTimeTol = 1e-9;

std::size_t find_time(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t - kTimeTol);
  if (it == times.end() || std::abs(*it - t) > kTimeTol) {
    std::ostringstream os;
    os << "no prediction at record time t = " << t << " us";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

std::vector<TracePoint> trace_distance_series(const Trajectory& prediction,
                                              std::span<const TomographyRecord> targets) {
  if (prediction.times.size() != prediction.states.size()) {
    fail(ErrorCode::InvalidArgument, "trajectory has mismatched times and states");
  }
  std::vector<TracePoint> out;
  out.reserve(targets.size());
  for (const auto& r : targets) {
    const std::size_t i = find_time(prediction.times, r.time_us);
    const DensityMatrix filtered = spectral_filter(prediction.states[i]);
    out.push_back({r.time_us, trace_distance(filtered, r.rho_hat)});
  }
  return out;
}

Trajectory predict(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                   double dt_internal_ns) {
  return integrate_rk4(dev, exp, source, dt_internal_ns, true);
}

Moments moments(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "moments of an empty sample");
  Moments m;
  m.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(m.count);
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(m.count));
  return m;
}

MomentTable moment_table(std::span<const SplitValues> series) {
  MomentTable table;
  for (const auto& s : series) {
    if (s.values.empty()) {
      table.omitted.emplace_back(s.model, s.split);
      continue;
    }
    const Moments m = moments(s.values);
    table.rows.push_back({s.model, s.split, m.mean, m.stddev, m.count});
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const MomentRow& a, const MomentRow& b) {
    return a.model != b.model ? a.model < b.model : a.split < b.split;
  });
  std::sort(table.omitted.begin(), table.omitted.end());
  return table;
}

std::vector<HistogramBin> histogram_density(std::span<const double> values, int bin_count) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "histogram of an empty sample");
  if (bin_count < 2) fail(ErrorCode::InvalidArgument, "histogram needs at least 2 bins");
  double hi = 0.0;
  for (double v : values) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) {
      fail(ErrorCode::InvalidArgument, "histogram values must lie in [0, 1]");
    }
    hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;
  const double width = hi / bin_count;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bin_count), 0);
  for (double v : values) {
    auto b = static_cast<long>(std::floor(std::max(v, 0.0) / width));
    b = std::clamp(b, 0L, static_cast<long>(bin_count) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  std::vector<HistogramBin> bins;
  bins.reserve(counts.size());
  const double norm = 1.0 / (static_cast<double>(values.size()) * width);
  for (int b = 0; b < bin_count; ++b) {
    bins.push_back({b * width, b + 1 == bin_count ? hi : (b + 1) * width,
                    static_cast<double>(counts[static_cast<std::size_t>(b)]) * norm});
  }
  return bins;
}

ExpectedTraceDistance expected_trace_distance(const SourceModel* model, const DeviceModel& dev,
                                              const ExperimentSource& truth, int n_samples,
                                              std::uint64_t seed, const SamplingPlan& plan,
                                              double dt_internal_ns, int threads) {
  if (n_samples < 1) fail(ErrorCode::InvalidArgument, "expected trace distance needs n_samples >= 1");
  if (!(plan.p_max_mhz > 0.0)) fail(ErrorCode::InvalidArgument, "p_max must be positive");

  ExpectedTraceDistance res;
  res.n_samples = n_samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Experiment> draws;
  for (int i = 0; i < n_samples; ++i) {
    Experiment e;
    std::ostringstream id;
    id << "mc" << i;
    e.id = id.str();
    e.amplitude_p_mhz = plan.p_max_mhz * (1.0 - unit(rng));  // (0, p_max]
    e.duration_us = plan.duration_us;
    e.sample_dt_ns = plan.sample_dt_ns;
    res.amplitudes_mhz.push_back(e.amplitude_p_mhz);
    draws.push_back(std::move(e));
  }

  std::vector<std::vector<TracePoint>> series(draws.size());
  parallel_for(draws.size(), threads, [&](std::size_t i) {
    const ExperimentData data = truth(draws[i]);
    const Trajectory pred = predict(dev, draws[i], model, dt_internal_ns);
    series[i] = trace_distance_series(pred, data.records);
  });

  auto in_window = [&](double t) {
    return t > plan.t_from_us + kTimeTol && (plan.t_to_us <= 0.0 || t <= plan.t_to_us + kTimeTol);
  };
  std::vector<double> per_draw;
  std::vector<double> pooled;
  for (const auto& s : series) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : s) {
      if (!in_window(p.time_us)) continue;
      sum += p.value;
      ++n;
      pooled.push_back(p.value);
    }
    if (n == 0) fail(ErrorCode::InvalidArgument, "no records inside the evaluation window");
    per_draw.push_back(sum / static_cast<double>(n));
  }
  const Moments m = moments(plan.pooled ? std::span<const double>(pooled) : std::span<const double>(per_draw));
  res.mean = m.mean;
  res.std_error = m.stddev / std::sqrt(static_cast<double>(m.count));

  // per-time average across draws (all draws share the grid)
  const std::size_t len = series.front().size();
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (const auto& s : series) {
      if (s.size() != len) fail(ErrorCode::InvalidArgument, "draws have different record grids");
      sum += s[k].value;
    }
    res.series.push_back({series.front()[k].time_us, sum / static_cast<double>(series.size())});
  }
  return res;
}

std::vector<EnergyPoint> energy_series(const Trajectory& prediction, std::span<const TomographyRecord> targets) {
  std::vector<EnergyPoint> out;
  out.reserve(targets.size());
  for (const auto& r : targets) {
    const std::size_t i = find_time(prediction.times, r.time_us);
    const DensityMatrix filtered = spectral_filter(prediction.states[i]);
    out.push_back({r.time_us, expected_energy(filtered.matrix()), expected_energy(r.rho_hat.matrix())});
  }
  return out;
}

EvalReport evaluate(const std::string& model_name, const SourceModel* model, const DeviceModel& dev,
                    const Dataset& data, double dt_internal_ns, int bin_count, int threads) {
  EvalReport rep;
  rep.model = model_name;
  const std::size_t n = data.experiments.size();
  std::vector<std::vector<TracePoint>> series(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& e = data.experiments[i];
    const Trajectory pred = predict(dev, e.experiment, model, dt_internal_ns);
    series[i] = trace_distance_series(pred, e.records);
  });

  SplitValues interp{model_name, "interpolation", {}};
  SplitValues extrap{model_name, "extrapolation", {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> in, out;
    for (const auto& p : series[i]) {
      (p.time_us <= data.train_horizon_us + kTimeTol ? in : out).push_back(p.value);
    }
    const std::string& id = data.experiments[i].experiment.id;
    for (const auto& [tag, vals] : {std::pair{"interpolation", &in}, std::pair{"extrapolation", &out}}) {
      if (vals->empty()) continue;
      const Moments m = moments(*vals);
      rep.per_experiment.push_back({id, tag, m.mean, m.stddev, m.count});
    }
    interp.values.insert(interp.values.end(), in.begin(), in.end());
    extrap.values.insert(extrap.values.end(), out.begin(), out.end());
  }
  rep.values = {interp, extrap};
  rep.moments = moment_table(rep.values);
  for (const auto& v : rep.values) {
    if (!v.values.empty()) rep.histograms.emplace_back(v.split, histogram_density(v.values, bin_count));
  }
  return rep;
}

}  // namespace qude
