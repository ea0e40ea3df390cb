#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "elue/metrics.hpp"

namespace elue {

struct DatasetInfo {
  std::string_view id;
  std::string_view display_name;
  TaskKind task_kind;
  MetricKind metric_kind;
  std::int64_t num_labels;  // 0 for regression
  std::int64_t test_size;
};

// The six benchmark datasets, in leaderboard column order.
std::span<const DatasetInfo> benchmark_datasets();

const DatasetInfo* find_dataset(std::string_view id);

}  // namespace elue
