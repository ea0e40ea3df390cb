#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "elue/cost_model.hpp"
#include "elue/error.hpp"
#include "elue/evaluate.hpp"
#include "elue/exitsim.hpp"
#include "elue/flops_convention.hpp"
#include "elue/scoring.hpp"
#include "elue/trace.hpp"
#include "elue/trainer.hpp"

namespace py = pybind11;

namespace {

py::object to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return std::move(out);
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return std::move(out);
    }
    default: return py::none();
  }
}

using Pairs = std::vector<std::pair<double, double>>;

std::vector<elue::PerfPoint> points_of(const Pairs& pairs) {
  std::vector<elue::PerfPoint> out;
  for (const auto& [f, p] : pairs) out.push_back({f, p});
  return out;
}

elue::ExitOutputs outputs_of(const std::vector<std::vector<double>>& logits) {
  elue::ExitOutputs o;
  o.logits = logits;
  return o;
}

py::object decision(const elue::ExitDecision& d) {
  return py::make_tuple(d.exit_layer, elue::prediction_value(d.prediction));
}

}  // namespace

PYBIND11_MODULE(_elue, m) {
  m.doc() = "ELUE cost model, scoring, exit simulation and trainer.";
  m.attr("CONVENTION_VERSION") = std::string(elue::FlopsConvention::kConventionVersion);

  static py::exception<elue::Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const elue::Error& e) {
      // args: (code name, status, message)
      PyErr_SetObject(error_type.ptr(),
                      py::make_tuple(std::string(e.code_name()), static_cast<int>(e.code()), e.what()).ptr());
    }
  });

  m.def("count_params", [](const std::string& spec_json) {
    const auto p = elue::count_params(elue::parse_model_spec(spec_json));
    return py::dict(py::arg("backbone") = p.backbone, py::arg("exit_heads") = p.exit_heads,
                    py::arg("total") = p.total());
  }, py::arg("spec_json"), "Parameter counts with and without exit heads.");

  m.def("forward_flops", [](const std::string& spec_json, std::int64_t seq_len, std::int64_t exit_layer) {
    return elue::forward_flops(elue::parse_model_spec(spec_json), seq_len, exit_layer);
  }, py::arg("spec_json"), py::arg("seq_len"), py::arg("exit_layer"));

  m.def("submission_flops", [](const std::string& spec_json, const std::string& trace_text) {
    const auto s = elue::submission_flops(elue::parse_trace_file(trace_text), elue::parse_model_spec(spec_json));
    return py::dict(py::arg("rows") = s.rows, py::arg("mean") = s.mean, py::arg("min") = s.min,
                    py::arg("p50") = s.p50, py::arg("p90") = s.p90, py::arg("p99") = s.p99, py::arg("max") = s.max);
  }, py::arg("spec_json"), py::arg("trace_text"));

  m.def("canonical_trace", [](const std::string& text) {
    return elue::serialize_trace(elue::parse_trace_file(text));
  }, py::arg("text"), "Parse a trace file and return its canonical bytes.");

  m.def("interpolate", [](const Pairs& knots, double flops) {
    const auto r = elue::BaselineCurve::build(points_of(knots), "curve").at(flops);
    return py::make_tuple(r.perf, r.clamped);
  }, py::arg("knots"), py::arg("flops"), "Baseline performance at `flops` and whether it was clamped.");

  m.def("elue_score", [](const Pairs& points, const Pairs& knots) {
    const auto curve = elue::BaselineCurve::build(points_of(knots), "curve");
    const auto pts = points_of(points);
    return elue::elue_score_dataset(pts, curve).score;
  }, py::arg("points"), py::arg("knots"));

  m.def("pareto_frontier", [](const Pairs& points) {
    Pairs out;
    const auto pts = points_of(points);
    for (const auto& p : elue::pareto_frontier(pts)) out.emplace_back(p.flops, p.perf);
    return out;
  }, py::arg("points"));

  m.def("assign_track", [](std::int64_t params) -> std::optional<std::string> {
    const auto t = elue::assign_track(params);
    if (!t) return std::nullopt;
    return std::string(elue::track_name(*t));
  }, py::arg("params"));

  m.def("entropy_exit", [](const std::vector<std::vector<double>>& logits, double threshold) {
    return decision(elue::entropy_exit(outputs_of(logits), threshold));
  }, py::arg("logits"), py::arg("threshold"), "(exit layer, predicted class) for one sample's per-exit logits.");

  m.def("patience_exit", [](const std::vector<std::vector<double>>& logits, std::int64_t patience) {
    return decision(elue::patience_exit(outputs_of(logits), patience));
  }, py::arg("logits"), py::arg("patience"));

  m.def("score_traces", [](const std::string& spec_json, const std::map<std::string, std::vector<std::string>>& traces,
                           const std::string& data_dir) {
    std::vector<elue::SubmissionFile> files;
    for (const auto& [dataset, texts] : traces) {
      for (const auto& text : texts) files.push_back(elue::parse_trace_file(text, dataset));
    }
    const auto ev = elue::evaluate_traces(elue::parse_model_spec(spec_json), files,
                                          elue::load_evaluation_data(data_dir));
    return to_py(elue::to_json(ev.scored));
  }, py::arg("spec_json"), py::arg("traces"), py::arg("data_dir"),
     "Score trace files ({dataset: [text, ...]}) against gold labels and curves in data_dir.");

  m.def("train", [](const std::string& job_json) {
    const auto job = elue::training_job_from_json(nlohmann::json::parse(job_json));
    elue::JobOutput out;
    {
      py::gil_scoped_release release;
      out = elue::run_training_job(job);
    }
    auto j = elue::to_json(out.result);
    j["train_accuracy"] = elue::exit_accuracies(out.result.net, out.data.train_x, out.data.train_y);
    j["test_accuracy"] = elue::exit_accuracies(out.result.net, out.data.test_x, out.data.test_y);
    j["test_logits"] = elue::serialize_logits_file(elue::export_logits(out.result.net, out.data.test_x));
    return to_py(j);
  }, py::arg("job_json"), "Train on the job's synthetic data; returns history, accuracies and test logits.");
}
