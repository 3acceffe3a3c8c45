#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qude/dynamics.hpp"
#include "qude/tomography.hpp"
#include "qude/train.hpp"

namespace qude {

struct TracePoint {
  double time_us;
  double value;
};

/// Trace distance between the spectrally filtered prediction and each target
/// record. Every record time must appear on the prediction grid (1e-9 us).
std::vector<TracePoint> trace_distance_series(const Trajectory& prediction,
                                              std::span<const TomographyRecord> targets);

/// Prediction of a model (nullptr = base model only) on the record grid of an experiment.
Trajectory predict(const DeviceModel& dev, const Experiment& exp, const SourceModel* source,
                   double dt_internal_ns = 4.0);

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

/// Throws InvalidArgument on empty input.
Moments moments(std::span<const double> values);

/// Trace-distance values of one model on one split ("interpolation" or "extrapolation").
struct SplitValues {
  std::string model;
  std::string split;
  std::vector<double> values;
};

struct MomentRow {
  std::string model;
  std::string split;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct MomentTable {
  std::vector<MomentRow> rows;                              // sorted by model, then split
  std::vector<std::pair<std::string, std::string>> omitted;  // empty (model, split) pairs
};

MomentTable moment_table(std::span<const SplitValues> series);

struct HistogramBin {
  double lo;
  double hi;
  double density;
};

/// Normalised densities on bin_count uniform bins over [0, max(values)]
/// (over [0, 1] when every value is zero). Values must lie in [0, 1].
std::vector<HistogramBin> histogram_density(std::span<const double> values, int bin_count = 50);

/// Produces the true records of an experiment (a twin simulation or a lookup).
using ExperimentSource = std::function<ExperimentData(const Experiment&)>;

struct SamplingPlan {
  double p_max_mhz = 3.47;
  double duration_us = 50.0;
  double sample_dt_ns = 4.0;
  /// Only records in (t_from, t_to] enter the average; t_to <= 0 means no upper bound.
  double t_from_us = -1.0;
  double t_to_us = 0.0;
  /// Average over all records of all draws instead of time-averaging each draw first.
  bool pooled = false;
};

struct ExpectedTraceDistance {
  double mean = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  std::vector<double> amplitudes_mhz;
  /// Mean over draws at every record time, for the whole horizon.
  std::vector<TracePoint> series;
};

/// Monte Carlo estimate of the expected trace distance over pulse amplitudes
/// drawn from U(0, p_max]. Standard error = population stddev / sqrt(n).
ExpectedTraceDistance expected_trace_distance(const SourceModel* model, const DeviceModel& dev,
                                              const ExperimentSource& truth, int n_samples,
                                              std::uint64_t seed, const SamplingPlan& plan = {},
                                              double dt_internal_ns = 4.0, int threads = 1);

struct EnergyPoint {
  double time_us;
  double energy_pred;
  double energy_target;
};

/// Expected energy of the filtered prediction against the record estimates.
std::vector<EnergyPoint> energy_series(const Trajectory& prediction, std::span<const TomographyRecord> targets);

struct ExperimentSummary {
  std::string experiment_id;
  std::string split;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::string model;
  std::vector<ExperimentSummary> per_experiment;
  MomentTable moments;
  std::vector<std::pair<std::string, std::vector<HistogramBin>>> histograms;  // keyed by split
  std::vector<SplitValues> values;                                            // raw pooled values
};

/// Interpolation (t <= train_horizon) and extrapolation (t > train_horizon)
/// statistics of one model over a dataset.
EvalReport evaluate(const std::string& model_name, const SourceModel* model, const DeviceModel& dev,
                    const Dataset& data, double dt_internal_ns = 4.0, int bin_count = 50, int threads = 1);

}  // namespace qude
