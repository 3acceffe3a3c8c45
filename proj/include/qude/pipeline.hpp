#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qude/io.hpp"

namespace qude {

/// Simulates one experiment under the device plus planted source and turns
/// every sample into a tomography record. shots_per_axis = 0 gives exact records.
ExperimentData simulate_experiment(const DeviceModel& dev, const Experiment& exp, const SourceModel* planted,
                                   int shots_per_axis, std::uint64_t seed, double dt_internal_ns = 4.0);

/// Pulse amplitudes ~ U(0, p_max] (or the configured list) and their experiments.
std::vector<Experiment> twin_experiments(const ExperimentsConfig& cfg);

/// The planted source of the latent section, or nothing for a bare twin.
std::optional<SourceModel> planted_model(const LatentConfig& cfg, int dim);

Dataset generate_dataset(const RunConfig& cfg);

/// Twin truth used by expected-trace-distance estimates.
ExperimentSource twin_source(const RunConfig& cfg);

struct TrainOutcome {
  FitResult fit;
  ModelFile model;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::filesystem::path model_path;
};

struct EvalOutcome {
  std::vector<EvalReport> reports;
  std::vector<ExpectedTraceDistance> expected;  // per report: interpolation window
  std::vector<ExpectedTraceDistance> expected_extrapolation;
};

std::filesystem::path cmd_generate(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

TrainOutcome cmd_train(const RunConfig& cfg, const std::filesystem::path& manifest,
                       const std::filesystem::path& out_dir, std::ostream& log);

/// Evaluates each model file; the literal path "base" selects the base model
/// of the config's training device.
EvalOutcome cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& models,
                         const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                         std::ostream& log);

/// Readout of a structure-preserving model: S_H in kHz, inverse rates and
/// effective T1/T2. Throws UnsupportedAnsatz for other models.
std::string characterize_text(const ModelFile& model, const DeviceModel& dev);
std::string cmd_characterize(const std::filesystem::path& model_path, const DeviceModel& dev,
                             const std::filesystem::path& out_dir, std::ostream& log);

/// generate, train, evaluate (model and base) and characterize in one go.
void cmd_report(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace qude
