#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "elue/cost_model.hpp"
#include "elue/metrics.hpp"
#include "elue/scoring.hpp"
#include "elue/trace.hpp"

namespace elue {

// Outputs of every internal classifier for one sample. Classification samples
// fill `logits` (L rows of C values); regression samples fill `values` (L).
struct ExitOutputs {
  std::int64_t index = 0;
  std::vector<std::vector<double>> logits;
  std::vector<double> values;

  TaskKind task() const { return logits.empty() ? TaskKind::kRegression : TaskKind::kClassification; }
  std::size_t num_exits() const { return logits.empty() ? values.size() : logits.size(); }

  bool operator==(const ExitOutputs&) const = default;
};

struct EntropyPolicy {
  double threshold = 0.0;  // nats
};

struct PatiencePolicy {
  std::int64_t patience = 1;
};

struct PatienceRegressionPolicy {
  std::int64_t patience = 1;
  double tau = 0.1;
};

using ExitPolicy = std::variant<EntropyPolicy, PatiencePolicy, PatienceRegressionPolicy>;

std::string policy_name(const ExitPolicy& policy);

struct ExitDecision {
  std::int64_t exit_layer = 0;  // 1-based
  Prediction prediction = std::int64_t{0};
};

std::vector<double> softmax(std::span<const double> logits);

// First index of the maximum.
std::int64_t argmax(std::span<const double> values);

// -sum p ln p with 0 ln 0 = 0. Throws kInvalidArgument unless probs is a distribution.
double entropy(std::span<const double> probs);

// Leaves at the first exit whose softmax entropy is strictly below `threshold`.
ExitDecision entropy_exit(const ExitOutputs& outputs, double threshold);

// Leaves once `patience` consecutive exits agree with their predecessor.
ExitDecision patience_exit(const ExitOutputs& outputs, std::int64_t patience);

// As patience_exit, agreement meaning |v_l - v_{l-1}| <= tau.
ExitDecision patience_exit_regression(const ExitOutputs& outputs, std::int64_t patience, double tau);

ExitDecision apply_policy(const ExitOutputs& outputs, const ExitPolicy& policy);

struct SweepCell {
  ExitPolicy policy;
  PerfPoint point;
  SubmissionFile traces;
  std::vector<std::int64_t> exit_layers;
};

// Runs every policy of the grid over the dataset. Each cell's trace file lists
// emb, layer_1..layer_k and exit_k for a sample leaving at layer k.
std::vector<SweepCell> sweep_policy(std::span<const ExitOutputs> outputs, const ModelSpec& spec,
                                    std::span<const std::int64_t> seq_lens,
                                    std::span<const ExitPolicy> grid, const GoldFile& gold);

// Line-delimited JSON: a header record, then one record per sample.
//   {"schema":"elue-exit-outputs","version":1,"task_kind":"classification","num_exits":L,"num_labels":C}
//   {"index":0,"logits":[[...C...], ...L rows...]}      or      {"index":0,"values":[...L...]}
struct LogitsFile {
  TaskKind task_kind = TaskKind::kClassification;
  std::int64_t num_exits = 0;
  std::int64_t num_labels = 0;
  std::vector<ExitOutputs> samples;

  bool operator==(const LogitsFile&) const = default;
};

inline constexpr std::string_view kLogitsSchema = "elue-exit-outputs";
inline constexpr int kLogitsSchemaVersion = 1;

LogitsFile parse_logits_file(std::string_view text);
std::string serialize_logits_file(const LogitsFile& file);

}  // namespace elue
