// Python bindings for the simulator core.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "memesim/census.hpp"
#include "memesim/checkpoint.hpp"
#include "memesim/message_log.hpp"
#include "memesim/neural.hpp"
#include "memesim/presets.hpp"
#include "memesim/run.hpp"
#include "memesim/simulation.hpp"

namespace py = pybind11;
using namespace memesim;

namespace {

py::dict stats_row(const StepStats& s) {
  py::dict d;
  d["step"] = s.step;
  d["max_pop"] = s.max_population;
  d["n_above_40"] = s.n_above_40;
  d["n_above_8"] = s.n_at_least_8;
  d["coverage"] = s.coverage_of_top;
  d["distinct"] = s.distinct;
  return d;
}

py::dict sweep_dict(const SweepRow& r) {
  py::dict d;
  d["gamma_s"] = r.gamma_s;
  d["gamma_f"] = r.gamma_f;
  d["seed"] = r.seed;
  d["mean_final_fitness"] = r.mean_final_fitness;
  d["memes_at_least_8"] = r.memes_at_least_8;
  d["max_population"] = r.max_population;
  d["memes_above_40"] = r.memes_above_40;
  return d;
}

py::list meme_list(const MemeRegistry& registry) {
  py::list out;
  for (const MemeInfo& m : registry.memes()) {
    py::dict d;
    d["key"] = m.key;
    d["index"] = m.index;
    d["first_seen"] = m.first_seen;
    d["peak"] = m.peak;
    out.append(d);
  }
  return out;
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

RunOptions options(const std::string& out_dir, int workers) {
  RunOptions o;
  o.out_dir = out_dir;
  o.workers = workers;
  return o;
}

}  // namespace

PYBIND11_MODULE(_memesim, m) {
  m.doc() = "Grid simulator of communicating, evolving recurrent agents";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  py::class_<GridConfig>(m, "Config")
      .def(py::init<>())
      .def_static("from_text", [](const std::string& t) { return GridConfig::from_text(t); })
      .def_static("from_file", &GridConfig::from_file)
      .def_static("keys", &GridConfig::keys)
      .def("set", [](GridConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
      .def("apply_text", [](GridConfig& c, const std::string& t) { c.apply_text(t); })
      .def("apply_preset", [](GridConfig& c, const std::string& name) { apply_preset(c, find_preset(name)); })
      .def("apply_profile", [](GridConfig& c, const std::string& name) { apply_profile(c, find_profile(name)); })
      .def("validate", &GridConfig::validate)
      .def("to_text", &GridConfig::to_text)
      .def("dynamics_hash", &GridConfig::dynamics_hash)
      .def("copy", [](const GridConfig& c) { return c; })
      .def_property(
          "dims", [](const GridConfig& c) { return py::make_tuple(c.dims.rows, c.dims.cols); },
          [](GridConfig& c, std::pair<int, int> d) { c.dims = {d.first, d.second}; })
      .def_readwrite("seed", &GridConfig::seed)
      .def_readwrite("steps", &GridConfig::steps)
      .def_readwrite("workers", &GridConfig::workers)
      .def_readwrite("gamma_s", &GridConfig::gamma_s)
      .def_readwrite("gamma_f", &GridConfig::gamma_f)
      .def_readwrite("task_on", &GridConfig::task_on)
      .def_readwrite("task_env", &GridConfig::task_env)
      .def_readwrite("log_messages", &GridConfig::log_messages)
      .def_readwrite("checkpoint_every", &GridConfig::checkpoint_every)
      .def_property_readonly("effective_promote_prob", &GridConfig::effective_promote_prob)
      .def("__repr__", [](const GridConfig& c) {
        return "<Config " + std::to_string(c.dims.rows) + "x" + std::to_string(c.dims.cols) + " steps=" +
               std::to_string(c.steps) + " seed=" + std::to_string(c.seed) + " hash=" + hex64(c.dynamics_hash()) +
               ">";
      });

  m.def("presets", [] {
    py::list out;
    for (const AblationPreset& p : ablation_presets()) {
      py::dict d;
      d["name"] = p.name;
      d["mutation_on"] = p.mutation_on;
      d["homogeneous_init"] = p.homogeneous_init;
      d["selection_on"] = p.selection_on;
      d["evolution_on"] = p.evolution_on;
      d["skip_connection_on"] = p.skip_connection_on;
      d["message_shape"] = py::make_tuple(p.message_shape.length, p.message_shape.channels);
      out.append(d);
    }
    return out;
  });

  m.def("sweep_base_config", &sweep_base_config);
  m.def("hex64", &hex64);

  m.def(
      "run",
      [](const GridConfig& c, const std::string& out_dir, int workers) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c, options(out_dir, workers));
        }
        return loads(summary_json(r));
      },
      py::arg("config"), py::arg("out_dir") = "", py::arg("workers") = 0,
      "Runs a fresh simulation and returns its summary.");

  m.def(
      "resume",
      [](const std::string& checkpoint, std::optional<std::int64_t> steps, std::optional<std::uint64_t> expected_hash,
         const std::string& out_dir, int workers) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = resume(checkpoint, steps, expected_hash, options(out_dir, workers));
        }
        return loads(summary_json(r));
      },
      py::arg("checkpoint"), py::arg("steps") = py::none(), py::arg("expected_hash") = py::none(),
      py::arg("out_dir") = "", py::arg("workers") = 0);

  m.def(
      "sweep",
      [](const GridConfig& base, std::vector<double> gamma_s, std::vector<double> gamma_f,
         std::vector<std::uint64_t> seeds, const std::string& out_dir) {
        SweepSpec spec;
        spec.base = base;
        spec.gamma_s = std::move(gamma_s);
        spec.gamma_f = std::move(gamma_f);
        spec.seeds = std::move(seeds);
        spec.out_dir = out_dir;
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = sweep(spec);
        }
        py::list out;
        for (const SweepRow& r : rows) out.append(sweep_dict(r));
        return out;
      },
      py::arg("base"), py::arg("gamma_s"), py::arg("gamma_f"), py::arg("seeds"), py::arg("out_dir") = "");

  m.def("read_sweep_csv", [](const std::string& text) {
    std::istringstream in(text);
    py::list out;
    for (const SweepRow& r : read_sweep_csv(in)) out.append(sweep_dict(r));
    return out;
  });

  m.def(
      "replay",
      [](const std::string& log_path) {
        MessageLogHeader header;
        MemeRegistry registry;
        {
          py::gil_scoped_release release;
          registry = replay_message_log(log_path, &header);
        }
        const RunSummary s = summarize(registry, header.dims.size());
        py::list stats;
        for (const StepStats& st : s.steps) stats.append(stats_row(st));
        py::dict d;
        d["dims"] = py::make_tuple(header.dims.rows, header.dims.cols);
        d["stats"] = stats;
        d["memes"] = meme_list(registry);
        d["max_population"] = s.max_population;
        d["memes_above_40"] = s.memes_above;
        d["memes_at_least_8"] = s.memes_at_least;
        return d;
      },
      py::arg("log_path"), "Recomputes the census from a message log.");

  py::class_<Simulation>(m, "Simulation")
      .def(py::init<const GridConfig&, int>(), py::arg("config"), py::arg("workers") = 0)
      .def_static(
          "from_checkpoint",
          [](const std::string& path, int workers) {
            CheckpointData data = load_checkpoint(path);
            return Simulation(std::move(data.world), std::move(data.registry), workers);
          },
          py::arg("path"), py::arg("workers") = 0)
      .def(
          "step",
          [](Simulation& sim) {
            StepRecord r;
            {
              py::gil_scoped_release release;
              r = sim.step();
            }
            py::dict d;
            d["step"] = r.step;
            d["keys"] = r.keys;
            d["replications"] = r.events.size();
            d["faults"] = r.faults.size();
            return d;
          },
          "Advances one full step and returns its broadcast keys and event counts.")
      .def("save_checkpoint",
           [](const Simulation& sim, const std::string& path) { save_checkpoint(path, sim.world(), sim.registry()); })
      .def_property_readonly("current_step", &Simulation::current_step)
      .def_property_readonly("mean_fitness", &Simulation::mean_fitness)
      .def_property_readonly("config", [](const Simulation& sim) { return sim.config(); })
      .def("memes", [](const Simulation& sim) { return meme_list(sim.registry()); })
      .def("stats", [](const Simulation& sim) {
        const RunSummary s = summarize(sim.registry(), sim.config().dims.size());
        py::list out;
        for (const StepStats& st : s.steps) out.append(stats_row(st));
        return out;
      });

  m.def("entropy", [](const std::vector<double>& p) { return entropy(p); });
  m.def("softmax", [](const std::vector<double>& z) { return softmax(z); });
  m.def("adaptive_softmax", [](const std::vector<double>& z, double target, double rate, int iters) {
    return adaptive_softmax(z, target, rate, iters);
  }, py::arg("logits"), py::arg("target_entropy") = 0.6, py::arg("rate") = 0.1, py::arg("iters") = 20);
}
