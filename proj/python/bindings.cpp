#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qude/pipeline.hpp"

namespace py = pybind11;
using namespace qude;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const CArray& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw py::value_error("expected a square matrix");
  const int n = static_cast<int>(a.shape(0));
  ComplexMatrix m(n);
  auto r = a.unchecked<2>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = r(i, j);
  return m;
}

CArray to_array(const ComplexMatrix& m) {
  CArray a({m.dim(), m.dim()});
  auto w = a.mutable_unchecked<2>();
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) w(i, j) = m(i, j);
  return a;
}

CArray stack(const std::vector<ComplexMatrix>& states, int n) {
  CArray a({static_cast<py::ssize_t>(states.size()), static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(n)});
  auto w = a.mutable_unchecked<3>();
  for (std::size_t k = 0; k < states.size(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w(static_cast<py::ssize_t>(k), i, j) = states[k](i, j);
  return a;
}

Experiment make_experiment(double amplitude_mhz, double duration_us, double sample_dt_ns) {
  Experiment e;
  e.amplitude_p_mhz = amplitude_mhz;
  e.duration_us = duration_us;
  e.sample_dt_ns = sample_dt_ns;
  e.validate();
  return e;
}

// Opaque handle; binding the variant itself would collide with the stl casters.
struct Source {
  SourceModel model;
};

const SourceModel* source_ptr(const std::optional<Source>& s) { return s ? &s->model : nullptr; }

}  // namespace

PYBIND11_MODULE(_qude, m) {
  m.doc() = "Augmented master-equation models for qubit dynamics";
  m.attr("__version__") = kVersion;

  static py::exception<Error> qude_error(m, "QudeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(qude_error.ptr(), msg.c_str());
    }
  });

  py::enum_<BaseKind>(m, "BaseKind").value("LVN", BaseKind::LvN).value("LINDBLAD", BaseKind::Lindblad);

  py::class_<DeviceModel>(m, "DeviceModel")
      .def(py::init<>())
      .def(py::init([](double omega01, double omega_rot, double t1, double t2, BaseKind base) {
             DeviceModel d;
             d.omega01_ghz = omega01;
             d.omega_rot_ghz = omega_rot;
             d.t1_us = t1;
             d.t2_us = t2;
             d.base = base;
             d.validate();
             return d;
           }),
           py::arg("omega01_ghz"), py::arg("omega_rot_ghz"), py::arg("t1_us"), py::arg("t2_us"),
           py::arg("base") = BaseKind::Lindblad)
      .def_readwrite("omega01_ghz", &DeviceModel::omega01_ghz)
      .def_readwrite("omega_rot_ghz", &DeviceModel::omega_rot_ghz)
      .def_readwrite("t1_us", &DeviceModel::t1_us)
      .def_readwrite("t2_us", &DeviceModel::t2_us)
      .def_readwrite("base", &DeviceModel::base)
      .def_static("dev1", &DeviceModel::dev1, py::arg("base") = BaseKind::Lindblad)
      .def_static("dev2", &DeviceModel::dev2, py::arg("base") = BaseKind::Lindblad)
      .def("__repr__", [](const DeviceModel& d) {
        std::ostringstream os;
        os << "DeviceModel(omega01_ghz=" << d.omega01_ghz << ", T1=" << d.t1_us << " us, T2=" << d.t2_us
           << " us, base=" << to_string(d.base) << ")";
        return os.str();
      });

  // Source terms are passed around as opaque handles.
  py::class_<Source>(m, "SourceModel")
      .def_property_readonly("ansatz", [](const Source& s) { return std::string(to_string(ansatz_of(s.model))); })
      .def_property_readonly("params", [](const Source& s) { return pack_params(s.model); })
      .def("with_params", [](const Source& s, const std::vector<double>& p) { return Source{unpack_params(s.model, p)}; })
      .def("__len__", [](const Source& s) { return param_count(s.model); });

  m.def(
      "structure_preserving",
      [](const std::vector<double>& alpha_khz, const std::vector<double>& gamma_inv_us) {
        return Source{StructurePreservingSource::from_physical(alpha_khz, gamma_inv_us)};
      },
      py::arg("alpha_khz"), py::arg("gamma_inv_us"),
      "Qubit source from alpha (kHz) and inverse rates (us).");
  m.def(
      "make_source",
      [](const std::string& ansatz, int levels, std::uint64_t seed) {
        SourceOptions o;
        o.seed = seed;
        return Source{make_source(parse_ansatz_kind(ansatz), levels, o)};
      },
      py::arg("ansatz"), py::arg("levels") = 2, py::arg("seed") = 0);

  m.def("gell_mann_basis", [](int n) {
    std::vector<CArray> out;
    for (const auto& g : gell_mann_basis(n).elements) out.push_back(to_array(g));
    return out;
  });
  m.def("trace_distance", [](const CArray& a, const CArray& b) { return trace_distance(to_matrix(a), to_matrix(b)); });
  m.def("spectral_filter", [](const CArray& a) { return to_array(spectral_filter(to_matrix(a)).matrix()); });
  m.def("measurement_probs", [](const CArray& rho) {
    const auto p = measurement_probs(to_matrix(rho));
    return py::make_tuple(p.px, p.py, p.pz);
  });
  m.def(
      "lie_reconstruct",
      [](double px, double py_, double pz) { return to_array(lie_reconstruct({px, py_, pz}).matrix()); },
      py::arg("px"), py::arg("py"), py::arg("pz"));
  m.def("expected_energy", [](const CArray& rho) { return expected_energy(to_matrix(rho)); });

  m.def(
      "effective_times",
      [](const DeviceModel& dev, const Source& src) {
        const auto* sp = std::get_if<StructurePreservingSource>(&src.model);
        if (!sp) fail(ErrorCode::UnsupportedAnsatz, "effective_times needs a structure-preserving source");
        const auto t = effective_times(dev, *sp);
        return py::make_tuple(t.t1_eff_us, t.t2_eff_us);
      },
      py::arg("device"), py::arg("source"), "(T1_eff, T2_eff) in us");

  m.def(
      "rhs",
      [](const DeviceModel& dev, double amplitude_mhz, const CArray& rho, std::optional<Source> src) {
        Experiment e;
        e.amplitude_p_mhz = amplitude_mhz;
        return to_array(rhs(dev, e, source_ptr(src), to_matrix(rho)));
      },
      py::arg("device"), py::arg("amplitude_mhz"), py::arg("rho"), py::arg("source") = py::none());

  m.def(
      "simulate",
      [](const DeviceModel& dev, double amplitude_mhz, double duration_us, std::optional<Source> src,
         double sample_dt_ns, double dt_internal_ns) {
        const Experiment e = make_experiment(amplitude_mhz, duration_us, sample_dt_ns);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = integrate_rk4(dev, e, source_ptr(src), dt_internal_ns, true);
        }
        return py::make_tuple(py::array(py::cast(tr.times)), stack(tr.states, dev.dim));
      },
      py::arg("device"), py::arg("amplitude_mhz"), py::arg("duration_us"), py::arg("source") = py::none(),
      py::arg("sample_dt_ns") = 4.0, py::arg("dt_internal_ns") = 4.0,
      "Returns (times_us, states[k, n, n]) including t = 0.");

  m.def(
      "fit_twin",
      [](const DeviceModel& dev, const std::vector<double>& amplitudes_mhz, std::optional<Source> planted,
         const std::string& ansatz, double duration_us, double train_horizon_us, int shots, std::uint64_t seed,
         int epochs, int lbfgs_iterations) {
        Dataset data;
        data.train_horizon_us = train_horizon_us;
        data.total_horizon_us = duration_us;
        py::gil_scoped_release release;
        for (std::size_t i = 0; i < amplitudes_mhz.size(); ++i) {
          Experiment e = make_experiment(amplitudes_mhz[i], duration_us, 4.0);
          e.id = "exp" + std::to_string(i);
          data.experiments.push_back(simulate_experiment(dev, e, source_ptr(planted), shots, seed + i));
        }
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.adam.epochs = epochs;
        cfg.lbfgs.max_iterations = lbfgs_iterations;
        cfg.adam.batch_size = std::min<int>(cfg.adam.batch_size, static_cast<int>(amplitudes_mhz.size()));
        const FitResult r = fit(data, dev, parse_ansatz_kind(ansatz), cfg);
        return std::make_tuple(Source{r.model}, r.final_loss, r.loss_history);
      },
      py::arg("device"), py::arg("amplitudes_mhz"), py::arg("planted") = py::none(), py::arg("ansatz") = "sp",
      py::arg("duration_us") = 10.5, py::arg("train_horizon_us") = 10.0, py::arg("shots") = 0,
      py::arg("seed") = 0, py::arg("epochs") = 300, py::arg("lbfgs_iterations") = 200,
      "Simulates a twin dataset and fits a source term to it; returns (model, loss, loss_history).");

  m.def(
      "run",
      [](const std::string& verb, const std::filesystem::path& config, const std::filesystem::path& out) {
        const RunConfig cfg = load_config(config);
        std::ostringstream log;
        if (verb == "generate") {
          cmd_generate(cfg, out, log);
        } else if (verb == "report") {
          cmd_report(cfg, out, log);
        } else {
          throw py::value_error("run() supports 'generate' and 'report'");
        }
        return log.str();
      },
      py::arg("verb"), py::arg("config"), py::arg("out"), "Runs a pipeline command and returns its log.");

  m.def("characterize", [](const std::filesystem::path& model_path) {
    const ModelFile model = load_model(model_path);
    return characterize_text(model, model.device);
  });
}
