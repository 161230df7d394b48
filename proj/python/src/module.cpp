#include "pointsim/fid.hpp"
#include "pointsim/runner.hpp"
#include "pointsim/scenario.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pointsim;

namespace {

py::dict
run_dict(const harness::RunResult& r)
{
  py::dict d;
  d["mode"] = harness::to_string(r.mode);
  d["seed"] = r.seed;
  d["scenario"] = r.scenario;
  d["config_hash"] = r.config_hash;
  d["log_hash"] = r.log->hash();
  d["dataplane_hash"] = r.log->dataplane_hash();
  d["end_us"] = r.end;
  d["summary"] = r.summary;
  py::dict inv;
  for (const auto& i : r.invariants) {
    inv[py::str(i.name)] = py::make_tuple(i.ok, i.detail);
  }
  d["invariants"] = inv;
  d["ok"] = r.ok();
  return d;
}

harness::Mode
parse_mode(const std::string& s)
{
  const auto m = harness::mode_from(s);
  if (!m) {
    throw py::value_error("mode must be 'icn' or 'ip'");
  }
  return *m;
}

} // namespace

PYBIND11_MODULE(_pointsim, m)
{
  m.doc() = "Deterministic IP-over-ICN simulator";

  py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<fid::CapacityError>(m, "CapacityError", PyExc_ValueError);

  py::class_<fid::Fid>(m, "Fid")
    .def(py::init<std::size_t>())
    .def_property_readonly("width", &fid::Fid::width)
    .def("test", &fid::Fid::test)
    .def("set", &fid::Fid::set)
    .def("popcount", &fid::Fid::popcount)
    .def("set_bits", &fid::Fid::set_bits)
    .def("contains", &fid::Fid::contains)
    .def("hex", &fid::Fid::to_hex)
    .def("__or__", [](const fid::Fid& a, const fid::Fid& b) { return a | b; })
    .def("__eq__", [](const fid::Fid& a, const fid::Fid& b) { return a == b; })
    .def("__hash__", &fid::Fid::hash)
    .def("__repr__", [](const fid::Fid& f) { return "Fid(" + f.to_hex() + ")"; });

  m.def(
    "assign_link_ids",
    [](std::size_t links, std::size_t width, std::size_t k, const std::string& mode, std::uint64_t seed) {
      fid::FidConfig cfg{width, k, fid::mode_from_string(mode)};
      cfg.validate();
      std::vector<fid::Fid> out;
      for (auto& id : fid::assign_link_ids(links, cfg, seed)) {
        out.push_back(std::move(id.bits));
      }
      return out;
    },
    py::arg("links"), py::arg("m") = 256, py::arg("k") = 5, py::arg("mode") = "bloom", py::arg("seed") = 1);

  m.def(
    "encode",
    [](std::size_t width, const std::vector<fid::Fid>& lids) {
      std::vector<fid::LinkId> ids;
      for (std::size_t i = 0; i < lids.size(); ++i) {
        ids.push_back(fid::LinkId{lids[i], i});
      }
      return fid::encode_path(width, ids);
    },
    py::arg("width"), py::arg("lids"));

  m.def("should_forward", [](const fid::Fid& f, const fid::Fid& lid) { return f.contains(lid); });
  m.def("false_positive_rate", &fid::false_positive_rate, py::arg("m"), py::arg("k"), py::arg("n"));

  m.def(
    "validate",
    [](const std::filesystem::path& file) {
      const auto cfg = harness::load_scenario(file);
      return harness::effective_config(cfg);
    },
    "Loads and checks a scenario; returns the effective config.");

  m.def(
    "run",
    [](const std::filesystem::path& file, const std::string& mode, std::uint64_t seed,
       std::optional<bool> telemetry, std::optional<std::filesystem::path> out) {
      const auto cfg = harness::load_scenario(file);
      harness::RunResult result;
      {
        py::gil_scoped_release release;
        result = harness::run_scenario(cfg, harness::RunOptions{parse_mode(mode), seed, telemetry});
      }
      if (out) {
        harness::write_artifacts(result, cfg, *out);
      }
      return run_dict(result);
    },
    py::arg("scenario"), py::arg("mode") = "icn", py::arg("seed") = 1, py::arg("telemetry") = py::none(),
    py::arg("out") = py::none());

  m.def(
    "compare",
    [](const std::filesystem::path& a, const std::filesystem::path& b) {
      const auto rep = harness::compare_runs(a, b);
      py::dict rows;
      for (const auto& r : rep.rows) {
        rows[py::str(r.key)] = py::make_tuple(r.a, r.b, r.delta);
      }
      py::dict d;
      d["scenario"] = rep.scenario;
      d["modes"] = py::make_tuple(rep.mode_a, rep.mode_b);
      d["rows"] = rows;
      d["derived"] = rep.derived;
      d["text"] = harness::render_comparison(rep);
      return d;
    });
}
