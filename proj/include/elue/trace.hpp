#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "elue/cost_model.hpp"

namespace elue {

// Integer class id, or a real value for regression tasks.
using Prediction = std::variant<std::int64_t, double>;

double prediction_value(const Prediction& pred);
std::string format_prediction(const Prediction& pred);

struct SampleTrace {
  std::int64_t index = 0;
  Prediction pred = std::int64_t{0};
  std::vector<TraceStep> steps;

  bool operator==(const SampleTrace&) const = default;
};

// One predicted test file: a single operating point on one dataset.
// Rows are held sorted by index, contiguous from 0.
struct SubmissionFile {
  std::string dataset_id;
  std::vector<SampleTrace> rows;
  std::optional<std::string> label;

  bool operator==(const SubmissionFile&) const = default;
};

inline constexpr std::string_view kTraceHeader = "index\tpred\tmodules";

// Parses the tab-separated trace format. dataset_id and label are metadata
// carried alongside the file, not inside it.
SubmissionFile parse_trace_file(std::string_view text, std::string dataset_id = {},
                                std::optional<std::string> label = {});

// Canonical bytes: header first, "; " between steps, "\n" line endings,
// regression predictions with six fractional digits.
std::string serialize_trace(const SubmissionFile& sub);

Flops trace_flops(const SampleTrace& row, const ModelSpec& spec);

struct FlopsSummary {
  double mean = 0.0;
  Flops min = 0;
  Flops max = 0;
  Flops p50 = 0;
  Flops p90 = 0;
  Flops p99 = 0;
  std::size_t rows = 0;
};

// Throws kEmptySubmission when there are no rows. Percentiles use nearest rank.
FlopsSummary submission_flops(const SubmissionFile& sub, const ModelSpec& spec);

}  // namespace elue
