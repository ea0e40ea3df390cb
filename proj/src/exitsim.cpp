#include "elue/exitsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "elue/error.hpp"

namespace elue {

namespace {

void require_classification(const ExitOutputs& outputs, std::string_view policy) {
  if (outputs.task() != TaskKind::kClassification) {
    throw Error(ErrorCode::kPolicyMismatch,
                std::string(policy) + " policy requires classification outputs (sample " +
                    std::to_string(outputs.index) + ")");
  }
  if (outputs.logits.empty()) throw Error(ErrorCode::kInvalidArgument, "sample has no exits");
}

void require_patience(std::int64_t patience) {
  if (patience < 1) throw Error(ErrorCode::kInvalidArgument, "patience must be at least 1");
}

std::string format_number(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << v;
  return out.str();
}

}  // namespace

std::string policy_name(const ExitPolicy& policy) {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, EntropyPolicy>) {
          return "entropy:" + format_number(p.threshold);
        } else if constexpr (std::is_same_v<P, PatiencePolicy>) {
          return "patience:" + std::to_string(p.patience);
        } else {
          return "patience:" + std::to_string(p.patience) + ":tau=" + format_number(p.tau);
        }
      },
      policy);
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kInvalidArgument, "softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

std::int64_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "argmax of an empty vector");
  return std::max_element(values.begin(), values.end()) - values.begin();
}

double entropy(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities must sum to 1");
  }
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h, 0.0, std::log(static_cast<double>(probs.size())));
}

ExitDecision entropy_exit(const ExitOutputs& outputs, double threshold) {
  require_classification(outputs, "entropy");
  const auto layers = static_cast<std::int64_t>(outputs.logits.size());
  for (std::int64_t l = 1; l <= layers; ++l) {
    const auto probs = softmax(outputs.logits[l - 1]);
    if (l == layers || entropy(probs) < threshold) return {l, argmax(probs)};
  }
  return {};
}

ExitDecision patience_exit(const ExitOutputs& outputs, std::int64_t patience) {
  require_patience(patience);
  require_classification(outputs, "patience");
  const auto layers = static_cast<std::int64_t>(outputs.logits.size());
  std::int64_t previous = argmax(outputs.logits[0]);
  std::int64_t counter = 0;
  for (std::int64_t l = 2; l <= layers; ++l) {
    const auto current = argmax(outputs.logits[l - 1]);
    counter = current == previous ? counter + 1 : 0;
    previous = current;
    if (counter == patience) return {l, current};
  }
  return {layers, previous};
}

ExitDecision patience_exit_regression(const ExitOutputs& outputs, std::int64_t patience, double tau) {
  require_patience(patience);
  if (!(tau >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be non-negative");
  if (outputs.task() != TaskKind::kRegression) {
    throw Error(ErrorCode::kPolicyMismatch, "regression patience requires regression outputs (sample " +
                                                std::to_string(outputs.index) + ")");
  }
  if (outputs.values.empty()) throw Error(ErrorCode::kInvalidArgument, "sample has no exits");
  const auto layers = static_cast<std::int64_t>(outputs.values.size());
  std::int64_t counter = 0;
  for (std::int64_t l = 2; l <= layers; ++l) {
    const double delta = std::abs(outputs.values[l - 1] - outputs.values[l - 2]);
    counter = delta <= tau ? counter + 1 : 0;
    if (counter == patience) return {l, outputs.values[l - 1]};
  }
  return {layers, outputs.values.back()};
}

ExitDecision apply_policy(const ExitOutputs& outputs, const ExitPolicy& policy) {
  return std::visit(
      [&](const auto& p) -> ExitDecision {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, EntropyPolicy>) {
          return entropy_exit(outputs, p.threshold);
        } else if constexpr (std::is_same_v<P, PatiencePolicy>) {
          return patience_exit(outputs, p.patience);
        } else {
          return patience_exit_regression(outputs, p.patience, p.tau);
        }
      },
      policy);
}

std::vector<SweepCell> sweep_policy(std::span<const ExitOutputs> outputs, const ModelSpec& spec,
                                    std::span<const std::int64_t> seq_lens,
                                    std::span<const ExitPolicy> grid, const GoldFile& gold) {
  if (outputs.size() != seq_lens.size() || outputs.size() != gold.labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "misaligned sweep inputs: " + std::to_string(outputs.size()) + " outputs, " +
                    std::to_string(seq_lens.size()) + " sequence lengths, " +
                    std::to_string(gold.labels.size()) + " gold labels");
  }
  if (outputs.empty()) throw Error(ErrorCode::kEmptySubmission, "no samples to sweep");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].index != static_cast<std::int64_t>(i)) {
      throw Error(ErrorCode::kLengthMismatch, "outputs must be ordered by index from 0");
    }
    if (static_cast<std::int64_t>(outputs[i].num_exits()) != spec.num_layers) {
      throw Error(ErrorCode::kShape, "sample " + std::to_string(i) + " has " +
                                         std::to_string(outputs[i].num_exits()) + " exits, spec has " +
                                         std::to_string(spec.num_layers) + " layers");
    }
  }

  std::vector<SweepCell> cells;
  cells.reserve(grid.size());
  for (const auto& policy : grid) {
    SweepCell cell{policy, {}, {gold.dataset_id, {}, policy_name(policy)}, {}};
    cell.traces.rows.reserve(outputs.size());
    std::vector<Prediction> preds;
    preds.reserve(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const auto decision = apply_policy(outputs[i], policy);
      cell.exit_layers.push_back(decision.exit_layer);
      preds.push_back(decision.prediction);
      cell.traces.rows.push_back(
          {outputs[i].index, decision.prediction, forward_steps(spec, seq_lens[i], decision.exit_layer)});
    }
    cell.point.flops = submission_flops(cell.traces, spec).mean;
    cell.point.perf = dataset_metric(gold, preds);
    cells.push_back(std::move(cell));
  }
  return cells;
}

LogitsFile parse_logits_file(std::string_view text) {
  LogitsFile file;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, 1, std::string("invalid JSON record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, 1, "each record must be a JSON object");
    try {
      if (!header) {
        if (j.value("schema", "") != kLogitsSchema) {
          throw ParseError(line_no, 1, "missing or wrong schema, expected " + std::string(kLogitsSchema));
        }
        if (j.value("version", 0) != kLogitsSchemaVersion) {
          throw ParseError(line_no, 1, "unsupported schema version");
        }
        file.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
        file.num_exits = j.at("num_exits").get<std::int64_t>();
        file.num_labels = j.value("num_labels", std::int64_t{0});
        if (file.num_exits < 1) throw ParseError(line_no, 1, "num_exits must be positive");
        if (file.task_kind == TaskKind::kClassification && file.num_labels < 1) {
          throw ParseError(line_no, 1, "num_labels must be positive for classification");
        }
        header = true;
        continue;
      }
      ExitOutputs sample;
      sample.index = j.at("index").get<std::int64_t>();
      if (sample.index != static_cast<std::int64_t>(file.samples.size())) {
        throw ParseError(line_no, 1, "records must be ordered by index from 0");
      }
      if (file.task_kind == TaskKind::kClassification) {
        sample.logits = j.at("logits").get<std::vector<std::vector<double>>>();
        if (static_cast<std::int64_t>(sample.logits.size()) != file.num_exits) {
          throw ParseError(line_no, 1, "expected " + std::to_string(file.num_exits) + " exits");
        }
        for (const auto& row : sample.logits) {
          if (static_cast<std::int64_t>(row.size()) != file.num_labels) {
            throw ParseError(line_no, 1, "expected " + std::to_string(file.num_labels) + " logits per exit");
          }
        }
      } else {
        sample.values = j.at("values").get<std::vector<double>>();
        if (static_cast<std::int64_t>(sample.values.size()) != file.num_exits) {
          throw ParseError(line_no, 1, "expected " + std::to_string(file.num_exits) + " exits");
        }
      }
      file.samples.push_back(std::move(sample));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, 1, std::string("schema violation: ") + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  if (!header) throw ParseError(1, 1, "missing header record");
  return file;
}

std::string serialize_logits_file(const LogitsFile& file) {
  nlohmann::json header{{"schema", kLogitsSchema},
                        {"version", kLogitsSchemaVersion},
                        {"task_kind", task_kind_name(file.task_kind)},
                        {"num_exits", file.num_exits},
                        {"num_labels", file.num_labels}};
  std::string out = header.dump() + "\n";
  for (const auto& sample : file.samples) {
    nlohmann::json rec{{"index", sample.index}};
    if (file.task_kind == TaskKind::kClassification) {
      rec["logits"] = sample.logits;
    } else {
      rec["values"] = sample.values;
    }
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace elue
