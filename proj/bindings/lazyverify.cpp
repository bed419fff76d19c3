#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsv/error.hpp"
#include "lsv/runtime.hpp"
#include "lsv/verifier.hpp"

namespace py = pybind11;
using namespace lsv;

namespace {

SetModel::Mutant mutant_from(const std::string& name) {
  if (name == "none") return SetModel::Mutant::None;
  if (name == "skip-mark") return SetModel::Mutant::SkipMark;
  if (name == "swap-link") return SetModel::Mutant::SwapLink;
  if (name == "no-validate") return SetModel::Mutant::NoValidate;
  if (name == "no-mrk-check") return SetModel::Mutant::NoMrkCheck;
  throw py::value_error("unknown mutant: " + name);
}

rt::RtMutant rt_mutant_from(const std::string& name) {
  if (name == "none") return rt::RtMutant::None;
  if (name == "skip-mark") return rt::RtMutant::SkipMark;
  if (name == "swap-link") return rt::RtMutant::SwapLink;
  if (name == "no-validate") return rt::RtMutant::NoValidate;
  throw py::value_error("unknown runtime mutant: " + name);
}

}  // namespace

PYBIND11_MODULE(lazyverify, m) {
  m.doc() = "lazy concurrent set verification workbench";

  py::register_exception<Error>(m, "VerifyError");

  m.def(
      "laws_json",
      [](std::uint64_t seed) { return law_suite(seed).to_json().dump(); },
      py::arg("seed") = 1, "algebraic law suite report as a JSON string");

  m.def(
      "check_refinement_json",
      [](const std::string& kind, const std::string& mutant, Time horizon) {
        VerifyConfig cfg;
        cfg.horizon = horizon;
        SetModel::Mutant mu = mutant_from(mutant);
        if (kind == "contains") return check_contains_refinement(cfg, mu).to_json().dump();
        if (kind == "add") return check_add_refinement(cfg, mu).to_json().dump();
        if (kind == "remove") return check_remove_refinement(cfg, mu).to_json().dump();
        throw py::value_error("kind must be contains, add or remove");
      },
      py::arg("kind"), py::arg("mutant") = "none", py::arg("horizon") = 14);

  m.def(
      "check_rely_json",
      [](const std::string& id, const std::string& mutant, Time horizon) {
        VerifyConfig cfg;
        cfg.horizon = horizon;
        SetModel::Mutant mu = mutant_from(mutant);
        if (id == "all") {
          Json j = Json::array();
          for (const Verdict& v : check_rely_all(cfg, mu)) j.push_back(v.to_json());
          return j.dump();
        }
        for (RelyId r : rely_catalog())
          if (rely_name(r) == id) return check_rely(cfg, r, mu).to_json().dump();
        throw py::value_error("unknown rely id: " + id);
      },
      py::arg("id"), py::arg("mutant") = "none", py::arg("horizon") = 14);

  py::class_<rt::LazySet>(m, "LazySet")
      .def(py::init([](const std::string& mutant) {
             return std::make_unique<rt::LazySet>(rt_mutant_from(mutant));
           }),
           py::arg("mutant") = "none")
      .def("add", &rt::LazySet::add, py::call_guard<py::gil_scoped_release>())
      .def("remove", &rt::LazySet::remove, py::call_guard<py::gil_scoped_release>())
      .def("contains", &rt::LazySet::contains, py::call_guard<py::gil_scoped_release>())
      .def("snapshot", &rt::LazySet::snapshot)
      .def("sorted", &rt::LazySet::sorted);

  m.def(
      "stress_json",
      [](int threads, std::uint64_t ops, int keys, std::uint64_t seed,
         const std::string& mutant, int phases) {
        rt::RunConfig cfg;
        cfg.threads = threads;
        cfg.ops_per_thread = ops;
        cfg.keys = keys;
        cfg.seed = seed;
        cfg.mutant = rt_mutant_from(mutant);
        rt::RunResult r = rt::record_run(cfg, phases);
        rt::LinResult lr = rt::check_windows(r.history);
        Json j{{"events", r.history.size()},
               {"sorted_ok", r.sorted_ok},
               {"unmarked_unlinks", r.unmarked_unlinks},
               {"linearisable", lr.linearisable},
               {"final_values", r.final_values},
               {"history_jsonl", rt::history_to_jsonl(r.history)}};
        return j.dump();
      },
      py::arg("threads") = 4, py::arg("ops") = 1000, py::arg("keys") = 8,
      py::arg("seed") = 1, py::arg("mutant") = "none", py::arg("phases") = 4,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "check_lin_json",
      [](const std::string& jsonl, bool full) {
        rt::History h = rt::history_from_jsonl(jsonl);
        rt::LinResult r = full ? rt::check_linearisable(h) : rt::check_windows(h);
        Json j = r.to_json();
        if (r.linearisable) j["witness_str"] = rt::witness_to_string(r.witness);
        return j.dump();
      },
      py::arg("jsonl"), py::arg("full") = false,
      "check a JSON-lines history for linearisability");
}
