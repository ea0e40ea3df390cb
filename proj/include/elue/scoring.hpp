#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace elue {

// One operating point: mean FLOPs per sample and performance on the 0-100 scale.
struct PerfPoint {
  double flops = 0.0;
  double perf = 0.0;

  bool operator==(const PerfPoint&) const = default;
};

struct Interpolation {
  double perf = 0.0;
  bool clamped = false;  // query fell outside the knot range
};

// Piecewise-linear performance-FLOPs function through per-layer baseline
// evaluations. Immutable once built.
class BaselineCurve {
 public:
  // Sorts by FLOPs. Throws kValidation on fewer than two points, duplicate
  // FLOPs, or non-positive / non-finite coordinates.
  static BaselineCurve build(std::vector<PerfPoint> points, std::string dataset_id);

  const std::string& dataset_id() const { return dataset_id_; }
  const std::vector<PerfPoint>& knots() const { return knots_; }

  Interpolation at(double flops) const;

 private:
  BaselineCurve(std::string dataset_id, std::vector<PerfPoint> knots)
      : dataset_id_(std::move(dataset_id)), knots_(std::move(knots)) {}

  std::string dataset_id_;
  std::vector<PerfPoint> knots_;
};

Interpolation interpolate(const BaselineCurve& curve, double flops);

struct DatasetScore {
  double score = 0.0;
  std::size_t clamped_points = 0;
};

// Mean gap between each point's performance and the baseline at the same FLOPs.
DatasetScore elue_score_dataset(std::span<const PerfPoint> points, const BaselineCurve& curve);

struct OverallScore {
  std::optional<double> overall;  // absent when partial
  std::vector<std::string> missing;
  bool partial() const { return !overall.has_value(); }
};

// Unweighted mean over `required` datasets (the six benchmark datasets by default).
OverallScore elue_score_overall(const std::map<std::string, double>& per_dataset);
OverallScore elue_score_overall(const std::map<std::string, double>& per_dataset,
                                std::span<const std::string> required);

// Non-dominated subset sorted by FLOPs. Exact duplicates keep their first occurrence.
std::vector<PerfPoint> pareto_frontier(std::span<const PerfPoint> points);

enum class Track { k40M, k55M, k70M, k110M };

std::int64_t track_limit(Track track);
std::string_view track_name(Track track);
std::optional<Track> parse_track(std::string_view name);

// Smallest budget strictly above `params`; none at or above 110M.
std::optional<Track> assign_track(std::int64_t params);

struct DatasetResult {
  std::vector<PerfPoint> points;
  double score = 0.0;
  double best_perf = 0.0;
  std::size_t clamped_points = 0;
};

struct ScoredSubmission {
  std::map<std::string, DatasetResult> datasets;
  std::optional<double> overall;
  // Ranking key for parameter tracks: mean over datasets of the best performance.
  std::optional<double> average_perf;
  std::int64_t params = 0;
  std::optional<Track> track;
  std::vector<std::string> flags;

  bool partial() const { return !overall.has_value(); }
};

std::vector<std::string> benchmark_dataset_ids();

// Throws kNotFound when a dataset has points but no baseline curve.
ScoredSubmission score_submission(const std::map<std::string, std::vector<PerfPoint>>& points,
                                  const std::map<std::string, BaselineCurve>& curves,
                                  std::int64_t params);
ScoredSubmission score_submission(const std::map<std::string, std::vector<PerfPoint>>& points,
                                  const std::map<std::string, BaselineCurve>& curves,
                                  std::int64_t params, std::span<const std::string> required);

nlohmann::json to_json(const ScoredSubmission& scored);

// Curve files: {"dataset_id": "...", "knots": [[flops, perf], ...]} or
// {"curves": [ ...such objects... ]}.
std::vector<BaselineCurve> parse_curve_file(std::string_view text);
nlohmann::json to_json(const BaselineCurve& curve);

}  // namespace elue
