#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elue/metrics.hpp"
#include "elue/model_spec.hpp"
#include "elue/scoring.hpp"
#include "elue/trace.hpp"

namespace elue {

// Gold labels and baseline curves keyed by dataset id.
struct EvaluationData {
  std::map<std::string, GoldFile> golds;
  std::map<std::string, BaselineCurve> curves;
};

// Reads <dir>/gold/*.tsv and <dir>/curves/*.json. Missing subdirectories are empty.
EvaluationData load_evaluation_data(const std::filesystem::path& dir);

struct FileEvaluation {
  std::string dataset_id;
  std::optional<std::string> label;
  FlopsSummary flops;
  double perf = 0.0;

  PerfPoint point() const { return {flops.mean, perf}; }
};

// One trace file becomes one operating point: mean FLOPs and the dataset metric.
FileEvaluation evaluate_file(const SubmissionFile& file, const ModelSpec& spec, const GoldFile& gold);

struct Evaluation {
  std::vector<FileEvaluation> files;
  ScoredSubmission scored;
};

// Costs and scores every trace file. Parse-level errors are rethrown with the
// dataset and file label in the message.
Evaluation evaluate_traces(const ModelSpec& spec, const std::vector<SubmissionFile>& files,
                           const EvaluationData& data);

// Scores declared points directly, without traces.
ScoredSubmission evaluate_points(const std::map<std::string, std::vector<PerfPoint>>& points,
                                 std::int64_t params, const EvaluationData& data);

nlohmann::json to_json(const FileEvaluation& file);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace elue
