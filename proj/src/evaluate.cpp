#include "elue/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "elue/cost_model.hpp"
#include "elue/datasets.hpp"
#include "elue/error.hpp"

namespace elue {

namespace {

std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir,
                                                        const std::string& ext) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string describe(const SubmissionFile& file) {
  std::string s = file.dataset_id;
  if (file.label) s += " (" + *file.label + ")";
  return s;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EvaluationData load_evaluation_data(const std::filesystem::path& dir) {
  EvaluationData data;
  for (const auto& path : files_with_extension(dir / "gold", ".tsv")) {
    auto gold = parse_gold_file(read_text_file(path));
    const std::string id = gold.dataset_id;
    data.golds.insert_or_assign(id, std::move(gold));
  }
  for (const auto& path : files_with_extension(dir / "curves", ".json")) {
    for (auto& curve : parse_curve_file(read_text_file(path))) {
      const std::string id = curve.dataset_id();
      data.curves.insert_or_assign(id, std::move(curve));
    }
  }
  return data;
}

FileEvaluation evaluate_file(const SubmissionFile& file, const ModelSpec& spec, const GoldFile& gold) {
  FileEvaluation out;
  out.dataset_id = file.dataset_id;
  out.label = file.label;
  out.flops = submission_flops(file, spec);
  out.perf = dataset_metric(gold, predictions_of(file));
  return out;
}

Evaluation evaluate_traces(const ModelSpec& spec, const std::vector<SubmissionFile>& files,
                           const EvaluationData& data) {
  validate(spec);
  if (files.empty()) throw Error(ErrorCode::kEmptySubmission, "empty submission: no trace files");
  Evaluation ev;
  std::map<std::string, std::vector<PerfPoint>> points;
  for (const auto& file : files) {
    if (!find_dataset(file.dataset_id) && !data.golds.count(file.dataset_id)) {
      throw Error(ErrorCode::kNotFound, "unknown dataset id '" + file.dataset_id + "'");
    }
    const auto gold = data.golds.find(file.dataset_id);
    if (gold == data.golds.end()) {
      throw Error(ErrorCode::kNotFound, "no gold labels for dataset '" + file.dataset_id + "'");
    }
    try {
      ev.files.push_back(evaluate_file(file, spec, gold->second));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.column(), describe(file) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), describe(file) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), describe(file) + ": " + e.what());
    }
    points[file.dataset_id].push_back(ev.files.back().point());
  }
  ev.scored = score_submission(points, data.curves, count_params(spec).total());
  return ev;
}

ScoredSubmission evaluate_points(const std::map<std::string, std::vector<PerfPoint>>& points,
                                 std::int64_t params, const EvaluationData& data) {
  if (points.empty()) throw Error(ErrorCode::kEmptySubmission, "empty submission: no points");
  for (const auto& [id, pts] : points) {
    if (!find_dataset(id) && !data.curves.count(id)) {
      throw Error(ErrorCode::kNotFound, "unknown dataset id '" + id + "'");
    }
  }
  return score_submission(points, data.curves, params);
}

nlohmann::json to_json(const FileEvaluation& file) {
  nlohmann::json j{{"dataset_id", file.dataset_id},
                   {"rows", file.flops.rows},
                   {"mean_flops", file.flops.mean},
                   {"min_flops", file.flops.min},
                   {"max_flops", file.flops.max},
                   {"p50_flops", file.flops.p50},
                   {"p90_flops", file.flops.p90},
                   {"p99_flops", file.flops.p99},
                   {"perf", file.perf}};
  if (file.label) j["label"] = *file.label;
  return j;
}

}  // namespace elue
