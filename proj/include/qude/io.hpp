#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qude/metrics.hpp"
#include "qude/train.hpp"

namespace qude {

inline constexpr const char* kVersion = QUDE_VERSION;

struct ExperimentsConfig {
  int n_experiments = 5;
  double p_max_mhz = 3.47;
  double duration_us = 50.0;
  double sample_dt_ns = 4.0;
  int shots = 5000;  // budget per time step; 0 writes exact probabilities
  ShotMode shot_mode = ShotMode::PerAxis;
  std::uint64_t seed = 0;
  std::vector<double> amplitudes_mhz;  // overrides the random draw when set
};

/// Planted latent dynamics of a twin device.
struct LatentConfig {
  std::optional<AnsatzKind> kind;  // empty: the twin is the bare device
  std::vector<double> alpha_khz;
  std::vector<double> gamma_inv_us;
  GammaMode gamma_mode = GammaMode::Squared;
  int layers = 0;
  std::uint64_t seed = 0;
  double scale = 0.01;
};

struct EvaluationConfig {
  int mc_samples = 8;
  std::uint64_t seed = 0;
  int bins = 50;
  bool pooled = false;
  /// "twin": draw fresh amplitudes and simulate the latent twin;
  /// "dataset": use the dataset's own experiments as the sample.
  std::string truth = "twin";
};

struct OutputConfig {
  std::string directory = "qude_out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  DeviceModel device;
  ExperimentsConfig experiments;
  LatentConfig latent;
  AnsatzKind ansatz = AnsatzKind::StructurePreserving;
  BaseKind training_base = BaseKind::Lindblad;
  double train_horizon_us = 10.0;
  TrainConfig training;
  EvaluationConfig evaluation;
  OutputConfig output;
  std::uint64_t hash = 0;  // of the config text
  std::string origin;      // file name, for messages

  /// Device used by the trained model (the twin device with the training base).
  DeviceModel model_device() const;
  void validate() const;
};

/// Parses INI text with sections device, experiments, latent, training,
/// evaluation and output. Errors carry the origin, line and field.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Serialised trained model.
struct ModelFile {
  std::optional<SourceModel> source;  // empty: base model only
  DeviceModel device;
  TrainMode mode = TrainMode::ExperimentGeneralized;
  double train_horizon_us = 10.0;
  double final_loss = 0.0;
  std::vector<std::string> experiments;  // ids used for training
};

std::string model_name(const ModelFile& m);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

struct DatasetInfo {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  DeviceModel device;
  int shots_per_axis = 0;
  ShotMode shot_mode = ShotMode::PerAxis;
};

/// One JSONL file per experiment plus manifest.json; returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const Dataset& data,
                                    const DatasetInfo& info);
Dataset load_dataset(const std::filesystem::path& manifest, DatasetInfo* info = nullptr);

/// RFC-4180 CSV with '.' decimals and shortest round-trip numbers.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(const std::string& field);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long value);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

std::string format_double(double v);

void write_training_log(const std::filesystem::path& path, const FitResult& fit);
void write_moments(const std::filesystem::path& path, const MomentTable& table);
void write_histograms(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
void write_energy(const std::filesystem::path& path, const std::vector<EnergyPoint>& series);

/// Opens a file for writing or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);
void ensure_directory(const std::filesystem::path& dir);

}  // namespace qude
