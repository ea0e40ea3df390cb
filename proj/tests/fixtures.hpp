#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "elue/cost_model.hpp"
#include "elue/datasets.hpp"
#include "elue/evaluate.hpp"
#include "elue/model_spec.hpp"
#include "elue/trace.hpp"

namespace elue::testing {

inline ModelSpec bert_base(std::int64_t num_labels = 2) {
  return make_model_spec("bert-base", 768, 12, 12, 3072, 30522, 512, 2, num_labels);
}

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("elue-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr double kLowKnot = 6700e6;
inline constexpr double kHighKnot = 13399e6;

// Small gold files (labels 0,1,0,1,... or 1.0,2.0,...) and the same two-knot
// curve for every benchmark dataset.
inline EvaluationData benchmark_data(std::int64_t rows = 6) {
  EvaluationData data;
  for (const auto& d : benchmark_datasets()) {
    GoldFile gold;
    gold.dataset_id = std::string(d.id);
    gold.task_kind = d.task_kind;
    gold.metric_kind = d.metric_kind;
    gold.num_labels = d.num_labels == 0 ? 2 : d.num_labels;
    for (std::int64_t i = 0; i < rows; ++i) {
      if (d.task_kind == TaskKind::kRegression) {
        gold.labels.emplace_back(static_cast<double>(i) * 0.5);
      } else {
        gold.labels.emplace_back(i % 2);
      }
    }
    data.golds.emplace(gold.dataset_id, gold);
    data.curves.emplace(gold.dataset_id,
                        BaselineCurve::build({{kLowKnot, 87.0}, {kHighKnot, 88.6}}, gold.dataset_id));
  }
  return data;
}

inline void write_data_dir(const std::filesystem::path& dir, const EvaluationData& data) {
  std::filesystem::create_directories(dir / "gold");
  std::filesystem::create_directories(dir / "curves");
  for (const auto& [id, gold] : data.golds) std::ofstream(dir / "gold" / (id + ".tsv")) << serialize_gold(gold);
  for (const auto& [id, curve] : data.curves) std::ofstream(dir / "curves" / (id + ".json")) << to_json(curve).dump();
}

// Trace file whose predictions equal the gold labels, every sample leaving at
// `exit_layer` with sequence length `seq_len`.
inline SubmissionFile perfect_trace(const ModelSpec& spec, const GoldFile& gold, std::int64_t seq_len,
                                    std::int64_t exit_layer) {
  SubmissionFile file;
  file.dataset_id = gold.dataset_id;
  for (std::size_t i = 0; i < gold.labels.size(); ++i) {
    SampleTrace row;
    row.index = static_cast<std::int64_t>(i);
    row.pred = gold.labels[i];
    row.steps = forward_steps(spec, seq_len, exit_layer);
    file.rows.push_back(std::move(row));
  }
  return file;
}

}  // namespace elue::testing
