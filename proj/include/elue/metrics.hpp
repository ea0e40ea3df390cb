#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elue/trace.hpp"

namespace elue {

enum class TaskKind { kClassification, kRegression };
enum class MetricKind { kAccuracy, kAccF1Mean, kPearsonSpearmanMean };

std::string_view task_kind_name(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);
std::string_view metric_kind_name(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

struct GoldFile {
  std::string dataset_id;
  TaskKind task_kind = TaskKind::kClassification;
  MetricKind metric_kind = MetricKind::kAccuracy;
  std::int64_t num_labels = 2;  // classification only
  std::vector<Prediction> labels;

  bool operator==(const GoldFile&) const = default;
};

// Throws kValidation if the task/metric pairing or any label is inconsistent.
void validate(const GoldFile& gold);

// Format: one typed header line, then "index<TAB>label" rows contiguous from 0.
//   #gold<TAB>dataset_id=mrpc<TAB>task_kind=classification<TAB>metric_kind=AccF1Mean<TAB>num_labels=2
GoldFile parse_gold_file(std::string_view text);
std::string serialize_gold(const GoldFile& gold);

double accuracy(std::span<const std::int64_t> preds, std::span<const std::int64_t> golds);

// Positive class is 1. Zero when precision + recall is zero.
double f1_binary(std::span<const std::int64_t> preds, std::span<const std::int64_t> golds);

double pearson(std::span<const double> x, std::span<const double> y);

// Fractional ranks starting at 1; ties share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> x, std::span<const double> y);

// Performance on the 0-100 scale. Never rounded.
double dataset_metric(const GoldFile& gold, std::span<const Prediction> preds);

std::vector<Prediction> predictions_of(const SubmissionFile& sub);

}  // namespace elue
