#include "elue/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "elue/error.hpp"

namespace elue {

namespace {

template <typename A, typename B>
void require_aligned(std::span<A> a, std::span<B> b, std::size_t min_size = 1) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "length mismatch: " + std::to_string(a.size()) +
                                                " predictions vs " + std::to_string(b.size()) +
                                                " gold labels");
  }
  if (a.size() < min_size) {
    throw Error(ErrorCode::kLengthMismatch,
                "need at least " + std::to_string(min_size) + " aligned values");
  }
}

std::vector<std::int64_t> class_ids(std::span<const Prediction> values, std::string_view what) {
  std::vector<std::int64_t> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    const auto* cls = std::get_if<std::int64_t>(&v);
    if (!cls) {
      throw Error(ErrorCode::kInvalidLabel,
                  std::string(what) + " must be integer class ids for a classification task");
    }
    out.push_back(*cls);
  }
  return out;
}

std::vector<double> reals(std::span<const Prediction> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(prediction_value(v));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view task_kind_name(TaskKind kind) {
  return kind == TaskKind::kClassification ? "classification" : "regression";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "classification") return TaskKind::kClassification;
  if (name == "regression") return TaskKind::kRegression;
  throw ValidationError("task_kind", "unknown task kind '" + std::string(name) + "'");
}

std::string_view metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kAccuracy: return "Accuracy";
    case MetricKind::kAccF1Mean: return "AccF1Mean";
    case MetricKind::kPearsonSpearmanMean: return "PearsonSpearmanMean";
  }
  return "?";
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "Accuracy") return MetricKind::kAccuracy;
  if (name == "AccF1Mean") return MetricKind::kAccF1Mean;
  if (name == "PearsonSpearmanMean") return MetricKind::kPearsonSpearmanMean;
  throw ValidationError("metric_kind", "unknown metric kind '" + std::string(name) + "'");
}

void validate(const GoldFile& gold) {
  if (gold.labels.empty()) throw ValidationError("labels", "gold file has no labels");
  const bool regression_metric = gold.metric_kind == MetricKind::kPearsonSpearmanMean;
  if (regression_metric != (gold.task_kind == TaskKind::kRegression)) {
    throw ValidationError("metric_kind", std::string(metric_kind_name(gold.metric_kind)) +
                                             " is inconsistent with task_kind " +
                                             std::string(task_kind_name(gold.task_kind)));
  }
  if (gold.task_kind == TaskKind::kClassification) {
    if (gold.num_labels < 1) throw ValidationError("num_labels", "must be positive");
    if (gold.metric_kind == MetricKind::kAccF1Mean && gold.num_labels != 2) {
      throw ValidationError("num_labels", "AccF1Mean requires a binary task");
    }
    for (const auto& label : gold.labels) {
      const auto* cls = std::get_if<std::int64_t>(&label);
      if (!cls || *cls < 0 || *cls >= gold.num_labels) {
        throw ValidationError("labels", "classification labels must lie in 0.." +
                                            std::to_string(gold.num_labels - 1));
      }
    }
  }
}

double accuracy(std::span<const std::int64_t> preds, std::span<const std::int64_t> golds) {
  require_aligned(preds, golds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == golds[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double f1_binary(std::span<const std::int64_t> preds, std::span<const std::int64_t> golds) {
  require_aligned(preds, golds);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = preds[i], g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) {
      throw Error(ErrorCode::kInvalidLabel, "F1 requires binary labels, saw " +
                                                std::to_string(p == 0 || p == 1 ? g : p));
    }
    tp += p == 1 && g == 1;
    fp += p == 1 && g == 0;
    fn += p == 0 && g == 1;
  }
  if (tp == 0) return 0.0;  // P + R = 0
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_aligned(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation undefined for zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_aligned(x, y, 2);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double dataset_metric(const GoldFile& gold, std::span<const Prediction> preds) {
  validate(gold);
  require_aligned(preds, std::span<const Prediction>(gold.labels));
  switch (gold.metric_kind) {
    case MetricKind::kAccuracy: {
      const auto p = class_ids(preds, "predictions");
      const auto g = class_ids(gold.labels, "gold labels");
      return 100.0 * accuracy(p, g);
    }
    case MetricKind::kAccF1Mean: {
      const auto p = class_ids(preds, "predictions");
      const auto g = class_ids(gold.labels, "gold labels");
      return 100.0 * (accuracy(p, g) + f1_binary(p, g)) / 2.0;
    }
    case MetricKind::kPearsonSpearmanMean: {
      const auto p = reals(preds);
      const auto g = reals(gold.labels);
      return 100.0 * (pearson(p, g) + spearman(p, g)) / 2.0;
    }
  }
  return 0.0;
}

std::vector<Prediction> predictions_of(const SubmissionFile& sub) {
  std::vector<Prediction> preds;
  preds.reserve(sub.rows.size());
  for (const auto& row : sub.rows) preds.push_back(row.pred);
  return preds;
}

GoldFile parse_gold_file(std::string_view text) {
  GoldFile gold;
  std::size_t line_no = 0;
  bool header = false;
  bool have_dataset = false, have_task = false, have_metric = false;
  std::int64_t expected = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(trim(line.substr(start, tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }

    if (!header) {
      if (fields[0] != "#gold") throw ParseError(line_no, 1, "gold file must start with a #gold header");
      for (std::size_t k = 1; k < fields.size(); ++k) {
        const auto eq = fields[k].find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, 1, "header entries are key=value");
        const auto key = fields[k].substr(0, eq);
        const auto value = fields[k].substr(eq + 1);
        try {
          if (key == "dataset_id") {
            gold.dataset_id = std::string(value);
            have_dataset = true;
          } else if (key == "task_kind") {
            gold.task_kind = parse_task_kind(value);
            have_task = true;
          } else if (key == "metric_kind") {
            gold.metric_kind = parse_metric_kind(value);
            have_metric = true;
          } else if (key == "num_labels") {
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), gold.num_labels);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
              throw ParseError(line_no, 1, "num_labels must be an integer");
            }
          } else {
            throw ParseError(line_no, 1, "unknown header key '" + std::string(key) + "'");
          }
        } catch (const ValidationError& e) {
          throw ParseError(line_no, 1, e.what());
        }
      }
      if (!have_dataset || !have_task || !have_metric) {
        throw ParseError(line_no, 1, "header must name dataset_id, task_kind and metric_kind");
      }
      header = true;
      continue;
    }

    if (fields.size() != 2) throw ParseError(line_no, 1, "expected index<TAB>label");
    std::int64_t index = -1;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), index);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || index != expected) {
      throw ParseError(line_no, 1, "gold indices must be contiguous from 0, expected " +
                                       std::to_string(expected));
    }
    ++expected;
    const auto label = fields[1];
    const auto* b = label.data();
    const auto* e = b + label.size();
    if (gold.task_kind == TaskKind::kClassification) {
      std::int64_t cls = 0;
      const auto [p, err] = std::from_chars(b, e, cls);
      if (label.empty() || err != std::errc() || p != e) {
        throw ParseError(line_no, 1 + fields[0].size() + 1, "classification label must be an integer");
      }
      gold.labels.emplace_back(cls);
    } else {
      double value = 0.0;
      const auto [p, err] = std::from_chars(b, e, value);
      if (label.empty() || err != std::errc() || p != e || !std::isfinite(value)) {
        throw ParseError(line_no, 1 + fields[0].size() + 1, "regression label must be a finite number");
      }
      gold.labels.emplace_back(value);
    }
  }
  if (!header) throw ParseError(1, 1, "missing #gold header");
  validate(gold);
  return gold;
}

std::string serialize_gold(const GoldFile& gold) {
  std::string out = "#gold\tdataset_id=" + gold.dataset_id +
                    "\ttask_kind=" + std::string(task_kind_name(gold.task_kind)) +
                    "\tmetric_kind=" + std::string(metric_kind_name(gold.metric_kind));
  if (gold.task_kind == TaskKind::kClassification) {
    out += "\tnum_labels=" + std::to_string(gold.num_labels);
  }
  out += '\n';
  for (std::size_t i = 0; i < gold.labels.size(); ++i) {
    out += std::to_string(i) + '\t';
    const auto& label = gold.labels[i];
    if (const auto* cls = std::get_if<std::int64_t>(&label)) {
      out += std::to_string(*cls);
    } else {
      char buf[64];
      const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(label));
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

}  // namespace elue
