#include "elue/datasets.hpp"

#include <array>

namespace elue {

namespace {

constexpr std::array<DatasetInfo, 6> kDatasets{{
    {"sst2", "SST-2", TaskKind::kClassification, MetricKind::kAccuracy, 2, 2208},
    {"imdb", "IMDb", TaskKind::kClassification, MetricKind::kAccuracy, 2, 25000},
    {"mrpc", "MRPC", TaskKind::kClassification, MetricKind::kAccF1Mean, 2, 1725},
    {"stsb", "STS-B", TaskKind::kRegression, MetricKind::kPearsonSpearmanMean, 0, 1379},
    {"snli", "SNLI", TaskKind::kClassification, MetricKind::kAccuracy, 3, 9824},
    {"scitail", "SciTail", TaskKind::kClassification, MetricKind::kAccuracy, 2, 2126},
}};

}  // namespace

std::span<const DatasetInfo> benchmark_datasets() { return kDatasets; }

const DatasetInfo* find_dataset(std::string_view id) {
  for (const auto& info : kDatasets) {
    if (info.id == id) return &info;
  }
  return nullptr;
}

}  // namespace elue
