#include "qude/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qude {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// numbers and hashing

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
  }
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) fail(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// INI config

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      std::ostringstream os;
      os << origin_ << ":" << e.line() << ": " << e.message();
      fail(ErrorCode::ConfigError, os.str());
    }
    for (const auto& [name, section] : tree_) {
      if (section.empty() && !section.data().empty()) {
        error(name, "", "key outside of a section");
      }
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    return s && s->find(key) != s->not_found();
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto it = s->find(key);
    if (it == s->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  void get(const std::string& section, const std::string& key, double& out) {
    if (auto v = raw(section, key)) out = to_double(section, key, *v);
  }

  void get(const std::string& section, const std::string& key, int& out) {
    if (auto v = raw(section, key)) {
      const double d = to_double(section, key, *v);
      if (d != std::floor(d) || std::abs(d) > 2e9) error(section, key, "expected an integer, got '" + *v + "'");
      out = static_cast<int>(d);
    }
  }

  void get(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (auto v = raw(section, key)) {
      const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
      if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
        error(section, key, "expected a non-negative integer, got '" + *v + "'");
      }
    }
  }

  void get(const std::string& section, const std::string& key, std::string& out) {
    if (auto v = raw(section, key)) out = *v;
  }

  void get(const std::string& section, const std::string& key, bool& out) {
    if (auto v = raw(section, key)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        error(section, key, "expected a boolean, got '" + *v + "'");
      }
    }
  }

  void get(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (auto v = raw(section, key)) {
      out.clear();
      std::string item;
      std::istringstream in(*v);
      while (std::getline(in, item, ',')) out.push_back(to_double(section, key, trim(item)));
    }
  }

  /// Parses an enum-like value, turning library errors into located config errors.
  template <class Parse>
  void get_enum(const std::string& section, const std::string& key, Parse parse) {
    if (auto v = raw(section, key)) {
      try {
        parse(*v);
      } catch (const Error& e) {
        error(section, key, e.what());
      }
    }
  }

  void reject_unknown() const {
    for (const auto& [sname, section] : tree_) {
      for (const auto& [key, value] : section) {
        if (!used_.count(sname + "." + key)) error(sname, key, "unknown field");
      }
    }
  }

  [[noreturn]] void error(const std::string& section, const std::string& key, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (const int line = find_line(section, key); line > 0) os << ":" << line;
    os << ": [" << section << "]" << (key.empty() ? "" : " " + key) << ": " << msg;
    fail(ErrorCode::ConfigError, os.str());
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  double to_double(const std::string& section, const std::string& key, const std::string& v) const {
    double d = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), d);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(d)) {
      error(section, key, "expected a number, got '" + v + "'");
    }
    return d;
  }

  int find_line(const std::string& section, const std::string& key) const {
    std::istringstream in(text_);
    std::string line, current;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      const std::string t = trim(line);
      if (t.size() > 1 && t.front() == '[' && t.back() == ']') {
        current = t.substr(1, t.size() - 2);
        if (key.empty() && current == section) return n;
        continue;
      }
      if (current != section) continue;
      const auto eq = t.find('=');
      if (eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
    }
    return 0;
  }

  std::string text_;
  std::string origin_;
  pt::ptree tree_;
  std::set<std::string> used_;
};

}  // namespace

DeviceModel RunConfig::model_device() const {
  DeviceModel d = device;
  d.base = training_base;
  return d;
}

void RunConfig::validate() const {
  auto bad = [&](const std::string& what) { fail(ErrorCode::ConfigError, origin + ": " + what); };
  if (!(device.omega01_ghz > 0.0) || !(device.omega_rot_ghz > 0.0)) bad("[device] frequencies must be positive");
  if (!(device.t1_us > 0.0) || !(device.t2_us > 0.0)) bad("[device] T1_us and T2_us must be positive");
  const auto& e = experiments;
  if (e.n_experiments < 1) bad("[experiments] n_experiments must be at least 1");
  if (!(e.p_max_mhz > 0.0)) bad("[experiments] p_max_MHz must be positive");
  if (!(e.duration_us > 0.0) || !(e.sample_dt_ns > 0.0)) bad("[experiments] duration and sample_dt must be positive");
  if (e.shots < 0) bad("[experiments] shots must be non-negative");
  if (!e.amplitudes_mhz.empty() && static_cast<int>(e.amplitudes_mhz.size()) != e.n_experiments) {
    bad("[experiments] amplitudes_MHz must list n_experiments values");
  }
  for (double a : e.amplitudes_mhz) {
    if (!(a > 0.0) || a > e.p_max_mhz) bad("[experiments] amplitudes must lie in (0, p_max_MHz]");
  }
  if (latent.kind == AnsatzKind::StructurePreserving) {
    const std::size_t n = static_cast<std::size_t>(device.dim * device.dim - 1);
    if (latent.alpha_khz.size() != n || latent.gamma_inv_us.size() != n) {
      bad("[latent] alpha_kHz and gamma_inv_us need " + std::to_string(n) + " values each");
    }
    for (double g : latent.gamma_inv_us) {
      if (!(g > 0.0)) bad("[latent] gamma_inv_us values must be positive");
    }
  }
  if (!(train_horizon_us > 0.0) || train_horizon_us >= e.duration_us) {
    bad("[training] train_horizon_us must lie in (0, duration_us)");
  }
  if (!(training.dt_internal_ns > 0.0)) bad("[training] dt_internal_ns must be positive");
  if (training.adam.batch_size < 1) bad("[training] batch_size must be at least 1");
  if (training.adam.epochs < 0 || training.lbfgs.max_iterations < 0) bad("[training] iteration counts must be >= 0");
  if (!(training.adam.learning_rate > 0.0)) bad("[training] learning_rate must be positive");
  if (training.threads < 1) bad("[training] threads must be at least 1");
  if (evaluation.mc_samples < 1) bad("[evaluation] mc_samples must be at least 1");
  if (evaluation.bins < 2) bad("[evaluation] bins must be at least 2");
  if (evaluation.truth != "twin" && evaluation.truth != "dataset") bad("[evaluation] truth must be twin or dataset");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  ConfigReader r(text, origin);
  RunConfig c;
  c.origin = origin;
  c.hash = fnv1a64(text);

  r.get("device", "omega01_GHz", c.device.omega01_ghz);
  r.get("device", "omega_rot_GHz", c.device.omega_rot_ghz);
  r.get("device", "T1_us", c.device.t1_us);
  r.get("device", "T2_us", c.device.t2_us);
  r.get("device", "levels", c.device.dim);
  r.get_enum("device", "base_model", [&](const std::string& v) { c.device.base = parse_base_kind(v); });
  c.training_base = c.device.base;

  auto& e = c.experiments;
  r.get("experiments", "n_experiments", e.n_experiments);
  r.get("experiments", "p_max_MHz", e.p_max_mhz);
  r.get("experiments", "duration_us", e.duration_us);
  r.get("experiments", "sample_dt_ns", e.sample_dt_ns);
  r.get("experiments", "shots", e.shots);
  r.get_enum("experiments", "shot_mode", [&](const std::string& v) { e.shot_mode = parse_shot_mode(v); });
  r.get("experiments", "seed", e.seed);
  r.get("experiments", "amplitudes_MHz", e.amplitudes_mhz);

  auto& l = c.latent;
  r.get_enum("latent", "ansatz", [&](const std::string& v) {
    if (v == "none") {
      l.kind.reset();
    } else {
      l.kind = parse_ansatz_kind(v);
    }
  });
  r.get("latent", "alpha_kHz", l.alpha_khz);
  r.get("latent", "gamma_inv_us", l.gamma_inv_us);
  r.get_enum("latent", "gamma_mode", [&](const std::string& v) { l.gamma_mode = parse_gamma_mode(v); });
  r.get("latent", "layers", l.layers);
  r.get("latent", "seed", l.seed);
  r.get("latent", "scale", l.scale);

  auto& t = c.training;
  t.seed = e.seed;
  r.get_enum("training", "ansatz", [&](const std::string& v) { c.ansatz = parse_ansatz_kind(v); });
  r.get_enum("training", "base_model", [&](const std::string& v) { c.training_base = parse_base_kind(v); });
  r.get_enum("training", "mode", [&](const std::string& v) { t.mode = parse_train_mode(v); });
  r.get_enum("training", "grad_method", [&](const std::string& v) { t.grad_method = parse_grad_method(v); });
  r.get("training", "train_horizon_us", c.train_horizon_us);
  r.get("training", "learning_rate", t.adam.learning_rate);
  r.get("training", "batch_size", t.adam.batch_size);
  r.get("training", "epochs", t.adam.epochs);
  r.get("training", "lbfgs_iterations", t.lbfgs.max_iterations);
  r.get("training", "lbfgs_memory", t.lbfgs.memory);
  r.get("training", "dt_internal_ns", t.dt_internal_ns);
  r.get("training", "seed", t.seed);
  int index = 0;
  r.get("training", "experiment_index", index);
  if (index < 0) r.error("training", "experiment_index", "must be non-negative");
  t.experiment_index = static_cast<std::size_t>(index);
  r.get("training", "threads", t.threads);
  r.get("training", "layers", t.source.layers);
  r.get("training", "gamma_raw_init", t.source.gamma_raw_init);
  r.get_enum("training", "gamma_mode",
             [&](const std::string& v) { t.source.gamma_mode = parse_gamma_mode(v); });

  auto& ev = c.evaluation;
  r.get("evaluation", "mc_samples", ev.mc_samples);
  r.get("evaluation", "seed", ev.seed);
  r.get("evaluation", "bins", ev.bins);
  r.get("evaluation", "pooled", ev.pooled);
  r.get("evaluation", "truth", ev.truth);

  r.get("output", "directory", c.output.directory);
  if (auto formats = r.raw("output", "formats")) {
    c.output.csv = c.output.json = false;
    std::istringstream in(*formats);
    std::string f;
    while (std::getline(in, f, ',')) {
      f.erase(0, f.find_first_not_of(' '));
      f.erase(f.find_last_not_of(' ') + 1);
      if (f == "csv") {
        c.output.csv = true;
      } else if (f == "json") {
        c.output.json = true;
      } else {
        r.error("output", "formats", "unknown format '" + f + "' (expected csv, json)");
      }
    }
  }

  r.reject_unknown();
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::IoError, "config file '" + path.string() + "' does not exist");
  return parse_config(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// models

namespace {

json device_to_json(const DeviceModel& d) {
  return json{{"omega01_GHz", d.omega01_ghz}, {"omega_rot_GHz", d.omega_rot_ghz}, {"T1_us", d.t1_us},
              {"T2_us", d.t2_us},             {"base", to_string(d.base)},        {"levels", d.dim}};
}

DeviceModel device_from_json(const json& j) {
  DeviceModel d;
  d.omega01_ghz = j.at("omega01_GHz").get<double>();
  d.omega_rot_ghz = j.at("omega_rot_GHz").get<double>();
  d.t1_us = j.at("T1_us").get<double>();
  d.t2_us = j.at("T2_us").get<double>();
  d.base = parse_base_kind(j.at("base").get<std::string>());
  d.dim = j.at("levels").get<int>();
  return d;
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace

std::string model_name(const ModelFile& m) {
  const std::string base = to_string(m.device.base);
  if (!m.source) return "base-" + base;
  return std::string(to_string(ansatz_of(*m.source))) + "-" + base;
}

void save_model(const fs::path& path, const ModelFile& m) {
  json j;
  j["format"] = "qude-model";
  j["version"] = kVersion;
  j["ansatz"] = m.source ? to_string(ansatz_of(*m.source)) : "none";
  j["levels"] = m.device.dim;
  j["base"] = to_string(m.device.base);
  j["mode"] = to_string(m.mode);
  j["units"] = "rad/us";
  j["train_horizon_us"] = m.train_horizon_us;
  j["final_loss"] = m.final_loss;
  j["experiments"] = m.experiments;
  j["device"] = device_to_json(m.device);
  if (m.source) {
    if (const auto* sp = std::get_if<StructurePreservingSource>(&*m.source)) {
      j["basis"] = "gell-mann-shifted";
      j["gamma_mode"] = to_string(sp->gamma_mode);
      std::vector<double> khz, inv;
      for (std::size_t k = 0; k < sp->channels(); ++k) {
        khz.push_back(rad_per_us_to_khz(sp->alpha[k]));
        inv.push_back(sp->gamma(k) > 0.0 ? 1.0 / sp->gamma(k) : 0.0);
      }
      j["alpha_kHz"] = khz;
      j["gamma_inv_us"] = inv;
    } else {
      const auto& net = std::get<NetworkSource>(*m.source);
      j["basis"] = "hermitian-jk";
      j["activation"] = net.activation == Activation::Tanh ? "tanh" : "identity";
      j["layers"] = net.layers.size();
    }
    j["params"] = pack_params(*m.source);
  } else {
    j["params"] = json::array();
  }
  write_text(path, j.dump(2) + "\n");
}

ModelFile load_model(const fs::path& path) {
  const json j = parse_json_file(path);
  ModelFile m;
  try {
    if (j.value("format", "") != "qude-model") fail(ErrorCode::IoError, "not a model file");
    m.device = device_from_json(j.at("device"));
    m.mode = parse_train_mode(j.at("mode").get<std::string>());
    m.train_horizon_us = j.at("train_horizon_us").get<double>();
    m.final_loss = j.value("final_loss", 0.0);
    m.experiments = j.value("experiments", std::vector<std::string>{});
    const std::string ansatz = j.at("ansatz").get<std::string>();
    if (ansatz != "none") {
      const AnsatzKind kind = parse_ansatz_kind(ansatz);
      SourceOptions opts;
      if (kind == AnsatzKind::StructurePreserving) {
        opts.gamma_mode = parse_gamma_mode(j.at("gamma_mode").get<std::string>());
      } else {
        opts.layers = j.at("layers").get<int>();
      }
      const SourceModel shape = make_source(kind, m.device.dim, opts);
      const auto params = j.at("params").get<std::vector<double>>();
      m.source = unpack_params(shape, params);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "model file '" + path.string() + "': " + e.what());
  } catch (const Error& e) {
    fail(e.code() == ErrorCode::IoError ? ErrorCode::IoError : e.code(),
         "model file '" + path.string() + "': " + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// datasets

fs::path write_dataset(const fs::path& dir, const Dataset& data, const DatasetInfo& info) {
  ensure_directory(dir);
  json manifest;
  manifest["format"] = "qude-dataset";
  manifest["version"] = kVersion;
  manifest["seed"] = info.seed;
  manifest["config_hash"] = hex64(info.config_hash);
  manifest["device"] = device_to_json(info.device);
  manifest["shots_per_axis"] = info.shots_per_axis;
  manifest["shot_mode"] = to_string(info.shot_mode);
  manifest["train_horizon_us"] = data.train_horizon_us;
  manifest["total_horizon_us"] = data.total_horizon_us;
  json exps = json::array();
  for (const auto& e : data.experiments) {
    const std::string file = e.experiment.id + ".jsonl";
    std::string body;
    for (const auto& r : e.records) {
      json row{{"exp_id", e.experiment.id},
               {"amplitude_MHz", e.experiment.amplitude_p_mhz},
               {"time_us", r.time_us},
               {"shots", r.shots},
               {"kx", r.counts[0]},
               {"ky", r.counts[1]},
               {"kz", r.counts[2]}};
      if (r.shots == 0) {
        row["px"] = r.probs_hat.px;
        row["py"] = r.probs_hat.py;
        row["pz"] = r.probs_hat.pz;
      }
      body += row.dump();
      body += '\n';
    }
    write_text(dir / file, body);
    exps.push_back(json{{"id", e.experiment.id},
                        {"file", file},
                        {"amplitude_p_MHz", e.experiment.amplitude_p_mhz},
                        {"amplitude_q_MHz", e.experiment.amplitude_q_mhz},
                        {"duration_us", e.experiment.duration_us},
                        {"sample_dt_ns", e.experiment.sample_dt_ns},
                        {"records", e.records.size()}});
  }
  manifest["experiments"] = exps;
  const fs::path path = dir / "manifest.json";
  write_text(path, manifest.dump(2) + "\n");
  return path;
}

Dataset load_dataset(const fs::path& manifest_path, DatasetInfo* info) {
  const json m = parse_json_file(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  Dataset data;
  try {
    if (m.value("format", "") != "qude-dataset") fail(ErrorCode::IoError, "not a dataset manifest");
    data.train_horizon_us = m.at("train_horizon_us").get<double>();
    data.total_horizon_us = m.at("total_horizon_us").get<double>();
    if (info) {
      info->seed = m.at("seed").get<std::uint64_t>();
      info->config_hash = std::stoull(m.at("config_hash").get<std::string>(), nullptr, 16);
      info->device = device_from_json(m.at("device"));
      info->shots_per_axis = m.at("shots_per_axis").get<int>();
      info->shot_mode = parse_shot_mode(m.at("shot_mode").get<std::string>());
    }
    for (const auto& je : m.at("experiments")) {
      ExperimentData ed;
      ed.experiment.id = je.at("id").get<std::string>();
      ed.experiment.amplitude_p_mhz = je.at("amplitude_p_MHz").get<double>();
      ed.experiment.amplitude_q_mhz = je.value("amplitude_q_MHz", 0.0);
      ed.experiment.duration_us = je.at("duration_us").get<double>();
      ed.experiment.sample_dt_ns = je.at("sample_dt_ns").get<double>();
      const fs::path file = dir / je.at("file").get<std::string>();
      std::ifstream in(file);
      if (!in) fail(ErrorCode::IoError, "cannot read dataset file '" + file.string() + "'");
      std::string line;
      long lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
          const json row = json::parse(line);
          if (row.at("exp_id").get<std::string>() != ed.experiment.id) {
            fail(ErrorCode::IoError, "row belongs to experiment " + row.at("exp_id").get<std::string>());
          }
          const double t = row.at("time_us").get<double>();
          const int shots = row.at("shots").get<int>();
          if (shots == 0) {
            ed.records.push_back(record_from_probs(
                t, {row.at("px").get<double>(), row.at("py").get<double>(), row.at("pz").get<double>()}));
          } else {
            ed.records.push_back(record_from_counts(
                t, shots, {row.at("kx").get<int>(), row.at("ky").get<int>(), row.at("kz").get<int>()}));
          }
        } catch (const json::exception& e) {
          fail(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
          fail(e.code(), file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
      }
      data.experiments.push_back(std::move(ed));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "dataset manifest '" + manifest_path.string() + "': " + e.what());
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : out_(open_output(path)), path_(path) {
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(const std::string& field) {
  sep();
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out_ << field;
  } else {
    out_ << '"';
    for (char c : field) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  return *this;
}

CsvWriter& CsvWriter::operator<<(double value) {
  sep();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long value) {
  sep();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  out_ << "\r\n";
  first_ = true;
  if (!out_) fail(ErrorCode::IoError, "write to '" + path_.string() + "' failed");
}

void write_training_log(const fs::path& path, const FitResult& fit) {
  CsvWriter w(path, {"iteration", "phase", "loss", "grad_norm", "elapsed_s"});
  for (const auto& h : fit.history) {
    w << h.iteration << h.phase << h.loss << h.grad_norm << h.elapsed_s;
    w.end_row();
  }
}

void write_moments(const fs::path& path, const MomentTable& table) {
  CsvWriter w(path, {"model", "split", "mean", "stddev"});
  for (const auto& r : table.rows) {
    w << r.model << r.split << r.mean << r.stddev;
    w.end_row();
  }
}

void write_histograms(const fs::path& path, const std::vector<EvalReport>& reports) {
  CsvWriter w(path, {"model", "split", "bin_lo", "bin_hi", "density"});
  for (const auto& rep : reports) {
    for (const auto& [split, bins] : rep.histograms) {
      for (const auto& b : bins) {
        w << rep.model << split << b.lo << b.hi << b.density;
        w.end_row();
      }
    }
  }
}

void write_energy(const fs::path& path, const std::vector<EnergyPoint>& series) {
  CsvWriter w(path, {"t_us", "energy_pred", "energy_target"});
  for (const auto& p : series) {
    w << p.time_us << p.energy_pred << p.energy_target;
    w.end_row();
  }
}

}  // namespace qude
