#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qude/dynamics.hpp"
#include "qude/models.hpp"
#include "qude/optim.hpp"
#include "qude/tomography.hpp"

namespace qude {

struct ExperimentData {
  Experiment experiment;
  std::vector<TomographyRecord> records;  // sorted by time
};

/// Tomography data for a set of experiments. Records with t <= train_horizon
/// form the training split, the rest (up to total_horizon) validation.
struct Dataset {
  std::vector<ExperimentData> experiments;
  double train_horizon_us = 10.0;
  double total_horizon_us = 50.0;

  std::size_t record_count() const;
};

/// Closed-on-the-left time split: t <= t_train goes to the first dataset.
std::pair<Dataset, Dataset> split(const Dataset& data, double t_train_us);

enum class TrainMode { ExperimentGeneralized, ExperimentSpecific };
enum class GradMethod { DiscreteAdjoint, FiniteDifference };

const char* to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);
const char* to_string(GradMethod m);
GradMethod parse_grad_method(const std::string& s);

struct TrainConfig {
  TrainMode mode = TrainMode::ExperimentGeneralized;
  AdamConfig adam;
  LbfgsConfig lbfgs;
  GradMethod grad_method = GradMethod::DiscreteAdjoint;
  double dt_internal_ns = 4.0;
  std::uint64_t seed = 0;
  /// Experiment used in ExperimentSpecific mode.
  std::size_t experiment_index = 0;
  int threads = 1;
  SourceOptions source;  // start point for fit(dataset, dev, kind, config)

  void validate(std::size_t experiment_count) const;
};

struct IterationLog {
  long iteration = 0;
  std::string phase;  // "adam", "adam-final", "lbfgs"
  double loss = 0.0;
  double grad_norm = 0.0;
  double elapsed_s = 0.0;
};

struct FitResult {
  std::vector<double> theta_star;
  SourceModel model;
  std::vector<IterationLog> history;
  std::vector<double> loss_history;
  std::vector<double> grad_norm_history;
  double adam_final_loss = 0.0;  // full batch, at the ADAM iterate handed to L-BFGS
  double final_loss = 0.0;       // full batch, at theta_star
  bool stalled = false;
  double wall_time_s = 0.0;
};

/// Sum of squared Frobenius distances between model states and record
/// targets rho_hat, over the training split of every experiment. Predictions
/// are not filtered. Built once per (dataset, device, architecture); the
/// shape argument only fixes the architecture, values come from theta.
class Objective {
 public:
  Objective(const Dataset& data, const DeviceModel& dev, std::optional<SourceModel> shape,
            double dt_internal_ns = 4.0, int threads = 1);

  std::size_t experiment_count() const noexcept { return targets_.size(); }
  std::size_t param_count() const noexcept { return params_; }

  double value(std::span<const double> theta) const;
  double value(std::span<const double> theta, std::span<const std::size_t> subset) const;

  /// Discrete adjoint of the RK4 recursion: exact gradient of the discrete loss.
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const;
  double value_and_gradient(std::span<const double> theta, std::span<const std::size_t> subset,
                            std::span<double> grad) const;

  /// Central differences with step 1e-6 * max(|theta_i|, 1).
  double value_and_fd_gradient(std::span<const double> theta, std::span<double> grad) const;

 private:
  struct Target {
    long step;
    ComplexMatrix rho;
    std::vector<double> coords;
  };
  struct ExperimentTargets {
    Experiment experiment;
    std::vector<Target> targets;
    long last_step = 0;
  };

  std::optional<SourceModel> model_at(std::span<const double> theta) const;
  double experiment_value(const ExperimentTargets& e, const std::optional<SourceModel>& src) const;
  double experiment_gradient(const ExperimentTargets& e, const std::optional<SourceModel>& src,
                             std::span<double> grad) const;
  // Generators linear in rho (base and sp models) step through the RK4 propagator
  // P(hL) in real coordinates over an orthonormal Hermitian basis.
  double linear_value(const ExperimentTargets& e, const std::optional<SourceModel>& src) const;
  double linear_gradient(const ExperimentTargets& e, const std::optional<SourceModel>& src,
                         std::span<double> grad) const;

  DeviceModel dev_;
  std::optional<SourceModel> shape_;
  std::vector<ExperimentTargets> targets_;
  double h_us_;
  int threads_;
  std::size_t params_ = 0;
  bool linear_ = false;
  std::vector<ComplexMatrix> frame_;
};

double loss(std::span<const double> theta, const Dataset& data, const DeviceModel& dev,
            const std::optional<SourceModel>& shape, double dt_internal_ns = 4.0);

std::vector<double> gradient(std::span<const double> theta, const Dataset& data, const DeviceModel& dev,
                             const std::optional<SourceModel>& shape, double dt_internal_ns = 4.0,
                             GradMethod method = GradMethod::DiscreteAdjoint);

/// ADAM over shuffled mini-batches of whole experiments, then full-batch
/// L-BFGS from ADAM's final iterate.
FitResult fit(const Dataset& data, const DeviceModel& dev, const SourceModel& initial,
              const TrainConfig& cfg);
FitResult fit(const Dataset& data, const DeviceModel& dev, AnsatzKind kind, const TrainConfig& cfg);

}  // namespace qude
