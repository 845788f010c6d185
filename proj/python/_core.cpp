// Copyright 2026 The revfocus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "revfocus/pipeline.hpp"

namespace py = pybind11;
using namespace revfocus;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json from_python(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

TokenSeq as_tokens(const py::object& o) {
  if (py::isinstance<py::str>(o)) return tokenize(o.cast<std::string>());
  return o.cast<TokenSeq>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Focus-level comparison of human and LLM peer reviews";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "RevfocusError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object value = type(e.what());
      value.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(type.ptr(), value.ptr());
    }
  });

  m.attr("TOKENIZER_VERSION") = std::string(kTokenizerVersion);
  m.attr("DEFAULT_EPSILON") = kDefaultSmoothing;

  m.def("tokenize", [](const std::string& text) { return tokenize(text); }, py::arg("text"));

  // Strings are tokenized with the library tokenizer; lists are used as is.
  m.def(
      "rouge_l",
      [](const py::object& c, const py::object& r) { return rouge_l(as_tokens(c), as_tokens(r)); },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "bleu_4",
      [](const py::object& c, const py::object& r) { return bleu_4(as_tokens(c), as_tokens(r)); },
      py::arg("candidate"), py::arg("reference"));

  m.def(
      "smoothed_kl",
      [](const std::vector<double>& p, const std::vector<double>& q, double epsilon) {
        return smoothed_kl(p, q, epsilon);
      },
      py::arg("p"), py::arg("q"), py::arg("epsilon") = kDefaultSmoothing);

  m.def(
      "cohens_kappa",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return cohens_kappa(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "f1_from_counts",
      [](std::size_t tp, std::size_t fp, std::size_t fn) {
        const auto r = f1_from_counts(tp, fp, fn);
        return py::dict(py::arg("precision") = r.precision, py::arg("recall") = r.recall,
                        py::arg("f1") = r.f1);
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"));

  m.def(
      "evaluate_run",
      [](const std::filesystem::path& run_dir, double epsilon, const std::string& kl_direction,
         const std::string& match_mode, const std::string& label_match,
         const std::string& text_candidate) {
        EvalOptions o;
        o.epsilon = epsilon;
        o.direction = kl_direction_from_id(kl_direction);
        o.match_mode = match_mode_from_id(match_mode);
        o.label_match = label_match_from_id(label_match);
        o.text_candidate = text_candidate_from_id(text_candidate);
        json report;
        {
          py::gil_scoped_release release;
          report = evaluate(load_eval_inputs(RunPaths{run_dir}), o);
        }
        return to_python(report);
      },
      py::arg("run_dir"), py::arg("epsilon") = kDefaultSmoothing,
      py::arg("kl_direction") = "human_to_model", py::arg("match_mode") = "multiset",
      py::arg("label_match") = "projected", py::arg("text_candidate") = "raw_text");

  m.def(
      "render_table", [](const py::object& report) { return render_table(from_python(report)); },
      py::arg("report"));
  m.def(
      "render_radar_csv",
      [](const py::object& report) { return render_radar_csv(from_python(report)); },
      py::arg("report"));

  m.def(
      "load_config",
      [](const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
        const auto c = RunConfig::load(path, overrides);
        return py::dict(py::arg("run_dir") = c.run_dir.string(),
                        py::arg("generation_models") = c.review_models,
                        py::arg("annotator_model") = c.annotator_model,
                        py::arg("epsilon") = c.epsilon,
                        py::arg("kl_direction") = std::string(to_string(c.kl_direction)),
                        py::arg("parallelism") = c.parallelism);
      },
      py::arg("path"), py::arg("overrides") = std::map<std::string, std::string>{});
}
