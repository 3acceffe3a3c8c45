#include "qude/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qude/parallel.hpp"

namespace qude {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Generic path of `target` as seen from `dir`.
std::string relative_to(const fs::path& target, const fs::path& dir) {
  const fs::path from = fs::absolute(dir).lexically_normal();
  return fs::absolute(target).lexically_normal().lexically_proximate(from).generic_string();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x7157u};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string exp_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "exp%03zu", i);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 5e-13 ? 0.0 : v);
  return buf;
}

std::string complex_khz(cplx z) {
  const double re = std::abs(z.real()) < 5e-13 ? 0.0 : z.real();
  const double im = std::abs(z.imag()) < 5e-13 ? 0.0 : z.imag();
  if (im == 0.0) return num(re);
  return num(re) + (im < 0.0 ? "-" : "+") + num(std::abs(im)) + "i";
}

json expected_json(const ExpectedTraceDistance& e) {
  return json{{"mean", e.mean}, {"std_error", e.std_error}, {"n_samples", e.n_samples}};
}

// Mean over experiments of each experiment's time-averaged trace distance.
ExpectedTraceDistance dataset_expected(const EvalReport& rep, const std::string& split) {
  std::vector<double> means;
  for (const auto& row : rep.per_experiment) {
    if (row.split == split) means.push_back(row.mean);
  }
  ExpectedTraceDistance e;
  if (means.empty()) return e;
  const Moments m = moments(means);
  e.mean = m.mean;
  e.std_error = m.stddev / std::sqrt(static_cast<double>(m.count));
  e.n_samples = static_cast<int>(m.count);
  return e;
}

}  // namespace

ExperimentData simulate_experiment(const DeviceModel& dev, const Experiment& exp, const SourceModel* planted,
                                   int shots_per_axis, std::uint64_t seed, double dt_internal_ns) {
  const Trajectory traj = integrate_rk4(dev, exp, planted, dt_internal_ns);
  std::mt19937_64 rng(seed);
  ExperimentData data{exp, {}};
  data.records.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    data.records.push_back(make_record(traj.times[k], traj.states[k], shots_per_axis, &rng));
  }
  return data;
}

std::vector<Experiment> twin_experiments(const ExperimentsConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Experiment> out;
  for (int i = 0; i < cfg.n_experiments; ++i) {
    Experiment e;
    e.id = exp_id(static_cast<std::size_t>(i));
    e.amplitude_p_mhz = cfg.amplitudes_mhz.empty() ? cfg.p_max_mhz * (1.0 - unit(rng))
                                                    : cfg.amplitudes_mhz[static_cast<std::size_t>(i)];
    e.duration_us = cfg.duration_us;
    e.sample_dt_ns = cfg.sample_dt_ns;
    e.validate();
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<SourceModel> planted_model(const LatentConfig& cfg, int dim) {
  if (!cfg.kind) return std::nullopt;
  if (*cfg.kind == AnsatzKind::StructurePreserving) {
    if (dim != 2) fail(ErrorCode::InvalidConfiguration, "planted sp source needs its rates for N = 2");
    return StructurePreservingSource::from_physical(cfg.alpha_khz, cfg.gamma_inv_us, cfg.gamma_mode);
  }
  const int layers = cfg.layers > 0 ? cfg.layers : (*cfg.kind == AnsatzKind::Affine ? 1 : 3);
  return NetworkSource::initialized(dim, layers,
                                    *cfg.kind == AnsatzKind::Affine ? Activation::Identity : Activation::Tanh,
                                    cfg.seed, cfg.scale);
}

Dataset generate_dataset(const RunConfig& cfg) {
  const auto planted = planted_model(cfg.latent, cfg.device.dim);
  const auto exps = twin_experiments(cfg.experiments);
  const int shots = shots_per_axis(cfg.experiments.shots, cfg.experiments.shot_mode);
  Dataset data;
  data.train_horizon_us = cfg.train_horizon_us;
  data.total_horizon_us = cfg.experiments.duration_us;
  data.experiments.resize(exps.size());
  parallel_for(exps.size(), cfg.training.threads, [&](std::size_t i) {
    data.experiments[i] = simulate_experiment(cfg.device, exps[i], planted ? &*planted : nullptr, shots,
                                              derive_seed(cfg.experiments.seed, i + 1), cfg.training.dt_internal_ns);
  });
  return data;
}

ExperimentSource twin_source(const RunConfig& cfg) {
  auto planted = planted_model(cfg.latent, cfg.device.dim);
  const int shots = shots_per_axis(cfg.experiments.shots, cfg.experiments.shot_mode);
  const DeviceModel dev = cfg.device;
  const double dt = cfg.training.dt_internal_ns;
  const std::uint64_t seed = cfg.evaluation.seed;
  return [planted, shots, dev, dt, seed](const Experiment& e) {
    // the draw index in the id keeps each draw's shot stream distinct
    const std::uint64_t stream = fnv1a64(e.id) ^ 0x9e3779b97f4a7c15ULL;
    return simulate_experiment(dev, e, planted ? &*planted : nullptr, shots, derive_seed(seed, stream), dt);
  };
}

// ---------------------------------------------------------------------------

fs::path cmd_generate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const Dataset data = generate_dataset(cfg);
  DatasetInfo info;
  info.seed = cfg.experiments.seed;
  info.config_hash = cfg.hash;
  info.device = cfg.device;
  info.shots_per_axis = shots_per_axis(cfg.experiments.shots, cfg.experiments.shot_mode);
  info.shot_mode = cfg.experiments.shot_mode;
  const fs::path manifest = write_dataset(out_dir, data, info);
  log << "generated " << data.experiments.size() << " experiments, " << data.record_count() << " records -> "
      << manifest.string() << "\n";
  return manifest;
}

TrainOutcome cmd_train(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_dir, std::ostream& log) {
  Dataset data = load_dataset(manifest);
  data.train_horizon_us = cfg.train_horizon_us;
  if (!(cfg.train_horizon_us < data.total_horizon_us)) {
    fail(ErrorCode::ConfigError, "train horizon must be shorter than the dataset horizon");
  }
  const DeviceModel dev = cfg.model_device();
  TrainOutcome out;
  out.fit = fit(data, dev, cfg.ansatz, cfg.training);

  out.model.source = out.fit.model;
  out.model.device = dev;
  out.model.mode = cfg.training.mode;
  out.model.train_horizon_us = cfg.train_horizon_us;
  out.model.final_loss = out.fit.final_loss;
  Dataset used = data;
  if (cfg.training.mode == TrainMode::ExperimentSpecific) {
    used.experiments = {data.experiments.at(cfg.training.experiment_index)};
  }
  for (const auto& e : used.experiments) out.model.experiments.push_back(e.experiment.id);

  out.train_loss = out.fit.final_loss;
  auto [train_split, valid_split] = split(used, cfg.train_horizon_us);
  valid_split.train_horizon_us = valid_split.total_horizon_us;
  const Objective validation(valid_split, dev, out.fit.model, cfg.training.dt_internal_ns, cfg.training.threads);
  out.validation_loss = validation.value(out.fit.theta_star);

  ensure_directory(out_dir);
  out.model_path = out_dir / "model.json";
  save_model(out.model_path, out.model);
  if (cfg.output.csv) write_training_log(out_dir / "training_log.csv", out.fit);
  log << "trained " << model_name(out.model) << " (" << to_string(cfg.training.mode) << ", "
      << out.fit.theta_star.size() << " parameters) on " << used.experiments.size() << " experiments\n"
      << "train loss " << format_double(out.train_loss) << "  validation loss "
      << format_double(out.validation_loss) << (out.fit.stalled ? "  (line search stalled)" : "") << "\n"
      << "model -> " << out.model_path.string() << "\n";
  return out;
}

EvalOutcome cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& models, const fs::path& manifest,
                         const fs::path& out_dir, std::ostream& log) {
  Dataset data = load_dataset(manifest);
  data.train_horizon_us = cfg.train_horizon_us;
  ensure_directory(out_dir);
  const double dt = cfg.training.dt_internal_ns;
  const int threads = cfg.training.threads;
  const ExperimentSource truth = cfg.evaluation.truth == "twin" ? twin_source(cfg) : ExperimentSource{};

  EvalOutcome out;
  std::vector<SplitValues> pooled;
  json jmodels = json::array();
  for (const auto& spec : models) {
    ModelFile m;
    if (spec == "base") {
      m.device = cfg.model_device();
      m.train_horizon_us = cfg.train_horizon_us;
    } else {
      m = load_model(spec);
    }
    for (const auto& e : data.experiments) {
      for (const auto& r : e.records) {
        if (r.rho_hat.dim() != m.device.dim) {
          fail(ErrorCode::InvalidArgument, "model '" + spec + "' has " + std::to_string(m.device.dim) +
                                               " levels but the dataset records are " +
                                               std::to_string(r.rho_hat.dim()) + "-dimensional");
        }
        break;
      }
    }
    const std::string name = model_name(m);
    const SourceModel* src = m.source ? &*m.source : nullptr;
    EvalReport rep = evaluate(name, src, m.device, data, dt, cfg.evaluation.bins, threads);

    ExpectedTraceDistance interp, extrap;
    if (truth) {
      SamplingPlan plan;
      plan.p_max_mhz = cfg.experiments.p_max_mhz;
      plan.duration_us = cfg.experiments.duration_us;
      plan.sample_dt_ns = cfg.experiments.sample_dt_ns;
      plan.pooled = cfg.evaluation.pooled;
      plan.t_to_us = cfg.train_horizon_us;
      interp = expected_trace_distance(src, m.device, truth, cfg.evaluation.mc_samples, cfg.evaluation.seed, plan,
                                       dt, threads);
      plan.t_from_us = cfg.train_horizon_us;
      plan.t_to_us = 0.0;
      extrap = expected_trace_distance(src, m.device, truth, cfg.evaluation.mc_samples, cfg.evaluation.seed, plan,
                                       dt, threads);
    } else {
      interp = dataset_expected(rep, "interpolation");
      extrap = dataset_expected(rep, "extrapolation");
    }

    if (cfg.output.csv) {
      for (const auto& e : data.experiments) {
        const Trajectory pred = predict(m.device, e.experiment, src, dt);
        write_energy(out_dir / ("energy_" + name + "_" + e.experiment.id + ".csv"), energy_series(pred, e.records));
      }
      if (truth) {
        CsvWriter w(out_dir / ("expected_trace_distance_" + name + ".csv"), {"t_us", "mean"});
        for (const auto& p : extrap.series) {
          w << p.time_us << p.value;
          w.end_row();
        }
      }
    }

    json jrows = json::array();
    for (const auto& r : rep.moments.rows) {
      jrows.push_back(json{{"split", r.split}, {"mean", r.mean}, {"stddev", r.stddev}, {"count", r.count}});
    }
    json jomitted = json::array();
    for (const auto& [mname, s] : rep.moments.omitted) jomitted.push_back(s);
    json jper = json::array();
    for (const auto& r : rep.per_experiment) {
      jper.push_back(json{{"experiment", r.experiment_id}, {"split", r.split}, {"mean", r.mean}, {"stddev", r.stddev}});
    }
    jmodels.push_back(json{{"model", name},
                           {"source", spec == "base" ? spec : relative_to(spec, out_dir)},
                           {"moments", jrows},
                           {"omitted_splits", jomitted},
                           {"per_experiment", jper},
                           {"expected_trace_distance",
                            {{"truth", cfg.evaluation.truth},
                             {"interpolation", expected_json(interp)},
                             {"extrapolation", expected_json(extrap)}}}});

    for (const auto& row : rep.moments.rows) {
      log << name << "  " << row.split << "  mean " << num(row.mean) << "  stddev " << num(row.stddev) << "\n";
    }
    for (const auto& [mname, s] : rep.moments.omitted) log << "warning: " << name << " has no " << s << " records\n";
    log << name << "  expected trace distance (extrapolation) " << num(extrap.mean) << " +- " << num(extrap.std_error)
        << "\n";

    pooled.insert(pooled.end(), rep.values.begin(), rep.values.end());
    out.reports.push_back(std::move(rep));
    out.expected.push_back(interp);
    out.expected_extrapolation.push_back(extrap);
  }

  const MomentTable table = moment_table(pooled);
  if (cfg.output.csv) {
    write_moments(out_dir / "moments.csv", table);
    write_histograms(out_dir / "histogram.csv", out.reports);
    CsvWriter w(out_dir / "per_experiment.csv", {"model", "experiment", "split", "mean", "stddev"});
    for (const auto& rep : out.reports) {
      for (const auto& r : rep.per_experiment) {
        w << rep.model << r.experiment_id << r.split << r.mean << r.stddev;
        w.end_row();
      }
    }
  }
  if (cfg.output.json) {
    json j{{"version", kVersion},
           {"config_hash", hex64(cfg.hash)},
           {"train_horizon_us", cfg.train_horizon_us},
           {"models", jmodels}};
    auto f = open_output(out_dir / "evaluation.json");
    f << j.dump(2) << "\n";
  }
  return out;
}

std::string characterize_text(const ModelFile& model, const DeviceModel& dev_in) {
  const auto* sp = model.source ? std::get_if<StructurePreservingSource>(&*model.source) : nullptr;
  if (!sp) {
    fail(ErrorCode::UnsupportedAnsatz, "characterize needs a structure-preserving (sp) model, got " +
                                           std::string(model.source ? to_string(ansatz_of(*model.source)) : "none"));
  }
  DeviceModel dev = dev_in;
  dev.base = model.device.base;
  const ComplexMatrix h = sp_hermitian(*sp);
  std::ostringstream os;
  os << "model " << model_name(model) << ", " << sp->dim() << " levels\n";
  os << "S_H [kHz]:\n";
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(sp->dim()));
  std::size_t width = 0;
  for (int r = 0; r < sp->dim(); ++r) {
    for (int c = 0; c < sp->dim(); ++c) {
      cells[static_cast<std::size_t>(r)].push_back(complex_khz(h(r, c) / (kTwoPi * 1e-3)));
      width = std::max(width, cells[static_cast<std::size_t>(r)].back().size());
    }
  }
  for (const auto& row : cells) {
    os << "  [";
    for (const auto& cell : row) os << " " << cell << std::string(width - cell.size(), ' ');
    os << " ]\n";
  }
  os << "alpha [kHz]:";
  for (double a : sp->alpha) os << " " << num(rad_per_us_to_khz(a));
  os << "\ngamma^-1 [us]:";
  for (std::size_t j = 0; j < sp->channels(); ++j) {
    const double g = sp->gamma(j);
    os << " " << (g == 0.0 ? std::string("inf") : num(1.0 / g));
  }
  os << "\n";
  if (sp->dim() == 2) {
    const EffectiveTimes t = effective_times(dev, *sp);
    os << "T1_eff = " << num(t.t1_eff_us) << " us";
    if (dev.base == BaseKind::Lindblad) os << " (bare " << num(dev.t1_us) << " us)";
    os << "\nT2_eff = " << num(t.t2_eff_us) << " us";
    if (dev.base == BaseKind::Lindblad) os << " (bare " << num(dev.t2_us) << " us)";
    os << "\n";
  }
  return os.str();
}

std::string cmd_characterize(const fs::path& model_path, const DeviceModel& dev_in, const fs::path& out_dir,
                             std::ostream& log) {
  const ModelFile model = load_model(model_path);
  const std::string text = characterize_text(model, dev_in);
  log << text;
  const auto& sp = std::get<StructurePreservingSource>(*model.source);
  DeviceModel dev = dev_in;
  dev.base = model.device.base;
  const ComplexMatrix h = sp_hermitian(sp);
  json jh = json::array();
  for (int r = 0; r < sp.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < sp.dim(); ++c) {
      const cplx z = h(r, c) / (kTwoPi * 1e-3);
      row.push_back(json::array({z.real(), z.imag()}));
    }
    jh.push_back(row);
  }
  json j{{"model", model_name(model)}, {"S_H_kHz", jh}};
  std::vector<double> alpha, inv;
  for (std::size_t k = 0; k < sp.channels(); ++k) {
    alpha.push_back(rad_per_us_to_khz(sp.alpha[k]));
    inv.push_back(sp.gamma(k) > 0.0 ? 1.0 / sp.gamma(k) : 0.0);
  }
  j["alpha_kHz"] = alpha;
  j["gamma_inv_us"] = inv;
  if (sp.dim() == 2) {
    const EffectiveTimes t = effective_times(dev, sp);
    j["T1_eff_us"] = t.t1_eff_us;
    j["T2_eff_us"] = t.t2_eff_us;
  }
  j["T1_us"] = dev.t1_us;
  j["T2_us"] = dev.t2_us;
  ensure_directory(out_dir);
  auto f = open_output(out_dir / "characterization.json");
  f << j.dump(2) << "\n";
  return text;
}

void cmd_report(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const fs::path manifest = cmd_generate(cfg, out_dir / "dataset", log);
  const TrainOutcome trained = cmd_train(cfg, manifest, out_dir / "train", log);
  const EvalOutcome eval = cmd_evaluate(cfg, {"base", trained.model_path.string()}, manifest, out_dir / "eval", log);
  std::string characterization;
  if (cfg.ansatz == AnsatzKind::StructurePreserving) {
    characterization = cmd_characterize(trained.model_path, cfg.device, out_dir / "train", log);
  }
  json summary{{"version", kVersion},
               {"config_hash", hex64(cfg.hash)},
               {"seed", cfg.experiments.seed},
               {"model", model_name(trained.model)},
               {"train_loss", trained.train_loss},
               {"validation_loss", trained.validation_loss},
               {"adam_final_loss", trained.fit.adam_final_loss},
               {"stalled", trained.fit.stalled}};
  json rows = json::array();
  for (std::size_t i = 0; i < eval.reports.size(); ++i) {
    for (const auto& r : eval.reports[i].moments.rows) {
      rows.push_back(json{{"model", r.model}, {"split", r.split}, {"mean", r.mean}, {"stddev", r.stddev}});
    }
  }
  summary["moments"] = rows;
  if (!characterization.empty()) summary["characterization"] = characterization;
  auto f = open_output(out_dir / "report.json");
  f << summary.dump(2) << "\n";
  log << "report -> " << (out_dir / "report.json").string() << "\n";
}

}  // namespace qude
