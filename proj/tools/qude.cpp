// qude: twin generation, training, evaluation and characterization of
// augmented master-equation models.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "qude/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qude;

namespace {

struct Flags {
  std::string config;
  std::string dataset;
  std::vector<std::string> models;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string ansatz;
  std::string base;
  std::string mode;
  std::optional<double> train_horizon_us;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return 4;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidConfiguration:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidDimension:
    case ErrorCode::UnsupportedAnsatz: return 2;
    default: return 3;
  }
}

RunConfig load(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.config.empty()) cfg.origin = "<defaults>";
  if (f.seed) {
    cfg.experiments.seed = *f.seed;
    cfg.training.seed = *f.seed;
    cfg.evaluation.seed = *f.seed;
  }
  if (f.threads) cfg.training.threads = *f.threads;
  if (const char* env = std::getenv("QUDE_THREADS"); env && *env) {
    try {
      cfg.training.threads = std::stoi(env);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, std::string("QUDE_THREADS is not an integer: '") + env + "'");
    }
  }
  if (!f.ansatz.empty()) cfg.ansatz = parse_ansatz_kind(f.ansatz);
  if (!f.base.empty()) cfg.training_base = parse_base_kind(f.base);
  if (!f.mode.empty()) cfg.training.mode = parse_train_mode(f.mode);
  if (f.train_horizon_us) cfg.train_horizon_us = *f.train_horizon_us;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Flags& f, const RunConfig& cfg) { return f.out.empty() ? fs::path(cfg.output.directory) : fs::path(f.out); }

fs::path manifest_path(const Flags& f) {
  if (f.dataset.empty()) fail(ErrorCode::ConfigError, "--dataset is required");
  fs::path p(f.dataset);
  if (fs::is_directory(p)) p /= "manifest.json";
  if (!fs::exists(p)) fail(ErrorCode::IoError, "dataset manifest '" + p.string() + "' does not exist");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and evaluate source terms of open-qubit master equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI run configuration");
    sub->add_option("--out", f.out, "output directory (default: [output] directory)");
    sub->add_option("--seed", f.seed, "override every seed of the config");
    sub->add_option("--threads", f.threads, "worker threads (QUDE_THREADS takes precedence)");
  };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--ansatz", f.ansatz, "sp | affine | nonlinear");
    sub->add_option("--base", f.base, "lvn | lindblad");
    sub->add_option("--mode", f.mode, "exp-gen | exp-spec");
    sub->add_option("--train-horizon-us", f.train_horizon_us, "training horizon T_Tr in us");
  };

  auto* gen = app.add_subcommand("generate", "simulate a twin device and write a dataset");
  common(gen);
  gen->add_option("--train-horizon-us", f.train_horizon_us, "training horizon recorded in the manifest");

  auto* train = app.add_subcommand("train", "fit a source term to a dataset");
  common(train);
  training(train);
  train->add_option("--dataset", f.dataset, "dataset manifest or directory")->required();

  auto* eval = app.add_subcommand("evaluate", "trace-distance statistics of models on a dataset");
  common(eval);
  training(eval);
  eval->add_option("--dataset", f.dataset, "dataset manifest or directory")->required();
  eval->add_option("--model", f.models, "model file, or 'base' for the base model (repeatable)")->required();

  auto* chr = app.add_subcommand("characterize", "readout of a structure-preserving model");
  common(chr);
  chr->add_option("--model", f.models, "model file")->required()->expected(1);

  auto* rep = app.add_subcommand("report", "generate, train, evaluate and characterize");
  common(rep);
  training(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load(f);
    const fs::path out = out_dir(f, cfg);
    if (gen->parsed()) {
      cmd_generate(cfg, out, std::cout);
    } else if (train->parsed()) {
      cmd_train(cfg, manifest_path(f), out, std::cout);
    } else if (eval->parsed()) {
      cmd_evaluate(cfg, f.models, manifest_path(f), out, std::cout);
    } else if (chr->parsed()) {
      // without a config the device stored in the model file is used
      const DeviceModel dev = f.config.empty() ? load_model(f.models.front()).device : cfg.device;
      cmd_characterize(f.models.front(), dev, out, std::cout);
    } else if (rep->parsed()) {
      cmd_report(cfg, out, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "qude: error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qude: error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
