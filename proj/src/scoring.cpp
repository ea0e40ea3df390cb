#include "elue/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "elue/datasets.hpp"
#include "elue/error.hpp"
#include "elue/flops_convention.hpp"

namespace elue {

BaselineCurve BaselineCurve::build(std::vector<PerfPoint> points, std::string dataset_id) {
  if (points.size() < 2) {
    throw ValidationError("knots", "baseline curve for '" + dataset_id + "' needs at least 2 points");
  }
  for (const auto& p : points) {
    if (!(p.flops > 0.0) || !std::isfinite(p.flops) || !std::isfinite(p.perf)) {
      throw ValidationError("knots", "knot FLOPs must be positive and coordinates finite");
    }
  }
  std::sort(points.begin(), points.end(),
            [](const PerfPoint& a, const PerfPoint& b) { return a.flops < b.flops; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].flops == points[i - 1].flops) {
      throw ValidationError("knots", "duplicate FLOPs value in baseline curve for '" + dataset_id + "'");
    }
  }
  return BaselineCurve(std::move(dataset_id), std::move(points));
}

Interpolation BaselineCurve::at(double flops) const {
  if (!(flops > 0.0)) throw Error(ErrorCode::kInvalidArgument, "FLOPs query must be positive");
  if (flops <= knots_.front().flops) return {knots_.front().perf, flops < knots_.front().flops};
  if (flops >= knots_.back().flops) return {knots_.back().perf, flops > knots_.back().flops};
  const auto upper = std::lower_bound(
      knots_.begin(), knots_.end(), flops,
      [](const PerfPoint& k, double f) { return k.flops < f; });
  if (upper->flops == flops) return {upper->perf, false};
  const auto& hi = *upper;
  const auto& lo = *(upper - 1);
  const double t = (flops - lo.flops) / (hi.flops - lo.flops);
  return {lo.perf + (hi.perf - lo.perf) * t, false};
}

Interpolation interpolate(const BaselineCurve& curve, double flops) { return curve.at(flops); }

DatasetScore elue_score_dataset(std::span<const PerfPoint> points, const BaselineCurve& curve) {
  if (points.empty()) {
    throw Error(ErrorCode::kEmptySubmission, "no operating points for '" + curve.dataset_id() + "'");
  }
  DatasetScore result;
  double gap = 0.0;
  for (const auto& p : points) {
    const auto base = curve.at(p.flops);
    result.clamped_points += base.clamped;
    gap += p.perf - base.perf;
  }
  result.score = gap / static_cast<double>(points.size());
  return result;
}

std::vector<std::string> benchmark_dataset_ids() {
  std::vector<std::string> ids;
  for (const auto& info : benchmark_datasets()) ids.emplace_back(info.id);
  return ids;
}

OverallScore elue_score_overall(const std::map<std::string, double>& per_dataset) {
  const auto ids = benchmark_dataset_ids();
  return elue_score_overall(per_dataset, ids);
}

OverallScore elue_score_overall(const std::map<std::string, double>& per_dataset,
                                std::span<const std::string> required) {
  OverallScore result;
  double sum = 0.0;
  for (const auto& id : required) {
    const auto it = per_dataset.find(id);
    if (it == per_dataset.end()) {
      result.missing.push_back(id);
    } else {
      sum += it->second;
    }
  }
  if (result.missing.empty() && !required.empty()) {
    result.overall = sum / static_cast<double>(required.size());
  }
  return result;
}

std::vector<PerfPoint> pareto_frontier(std::span<const PerfPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  // Cheapest first; at equal cost the best performance first; then input order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].flops != points[b].flops) return points[a].flops < points[b].flops;
    return points[a].perf > points[b].perf;
  });
  std::vector<PerfPoint> frontier;
  for (const auto i : order) {
    const auto& p = points[i];
    if (frontier.empty() || p.perf > frontier.back().perf) frontier.push_back(p);
  }
  return frontier;
}

std::int64_t track_limit(Track track) {
  switch (track) {
    case Track::k40M: return 40'000'000;
    case Track::k55M: return 55'000'000;
    case Track::k70M: return 70'000'000;
    case Track::k110M: return 110'000'000;
  }
  return 0;
}

std::string_view track_name(Track track) {
  switch (track) {
    case Track::k40M: return "40M";
    case Track::k55M: return "55M";
    case Track::k70M: return "70M";
    case Track::k110M: return "110M";
  }
  return "?";
}

std::optional<Track> parse_track(std::string_view name) {
  for (auto t : {Track::k40M, Track::k55M, Track::k70M, Track::k110M}) {
    if (track_name(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<Track> assign_track(std::int64_t params) {
  if (params <= 0) throw Error(ErrorCode::kInvalidArgument, "parameter count must be positive");
  for (auto t : {Track::k40M, Track::k55M, Track::k70M, Track::k110M}) {
    if (params < track_limit(t)) return t;
  }
  return std::nullopt;
}

ScoredSubmission score_submission(const std::map<std::string, std::vector<PerfPoint>>& points,
                                  const std::map<std::string, BaselineCurve>& curves,
                                  std::int64_t params) {
  const auto ids = benchmark_dataset_ids();
  return score_submission(points, curves, params, ids);
}

ScoredSubmission score_submission(const std::map<std::string, std::vector<PerfPoint>>& points,
                                  const std::map<std::string, BaselineCurve>& curves,
                                  std::int64_t params, std::span<const std::string> required) {
  ScoredSubmission scored;
  scored.params = params;
  scored.track = params > 0 ? assign_track(params) : std::nullopt;
  std::map<std::string, double> per_dataset;
  std::map<std::string, double> best;
  for (const auto& [id, pts] : points) {
    const auto curve = curves.find(id);
    if (curve == curves.end()) {
      throw Error(ErrorCode::kNotFound, "no baseline curve for dataset '" + id + "'");
    }
    const auto ds = elue_score_dataset(pts, curve->second);
    DatasetResult result;
    result.points = pts;
    result.score = ds.score;
    result.clamped_points = ds.clamped_points;
    result.best_perf = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
                         return a.perf < b.perf;
                       })->perf;
    if (ds.clamped_points > 0) {
      scored.flags.push_back("extrapolation_clamped:" + id + ":" + std::to_string(ds.clamped_points));
    }
    per_dataset[id] = ds.score;
    best[id] = result.best_perf;
    scored.datasets.emplace(id, std::move(result));
  }
  const auto overall = elue_score_overall(per_dataset, required);
  scored.overall = overall.overall;
  if (overall.partial()) {
    std::string missing;
    for (const auto& m : overall.missing) missing += (missing.empty() ? "" : ",") + m;
    scored.flags.push_back("partial:missing=" + missing);
  } else {
    scored.average_perf = elue_score_overall(best, required).overall;
  }
  return scored;
}

nlohmann::json to_json(const ScoredSubmission& scored) {
  nlohmann::json j;
  j["convention_version"] = std::string(FlopsConvention::kConventionVersion);
  j["params"] = scored.params;
  j["track"] = scored.track ? nlohmann::json(std::string(track_name(*scored.track))) : nlohmann::json();
  j["partial"] = scored.partial();
  j["overall"] = scored.overall ? nlohmann::json(*scored.overall) : nlohmann::json();
  j["average_perf"] = scored.average_perf ? nlohmann::json(*scored.average_perf) : nlohmann::json();
  j["flags"] = scored.flags;
  auto datasets = nlohmann::json::object();
  for (const auto& [id, r] : scored.datasets) {
    auto pts = nlohmann::json::array();
    for (const auto& p : r.points) pts.push_back({p.flops, p.perf});
    datasets[id] = {{"score", r.score},
                    {"best_perf", r.best_perf},
                    {"clamped_points", r.clamped_points},
                    {"points", std::move(pts)}};
  }
  j["datasets"] = std::move(datasets);
  return j;
}

namespace {

BaselineCurve curve_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dataset_id") || !j.at("dataset_id").is_string() ||
      !j.contains("knots") || !j.at("knots").is_array()) {
    throw Error(ErrorCode::kSchema, "curve needs a string 'dataset_id' and a 'knots' array");
  }
  std::vector<PerfPoint> knots;
  for (const auto& k : j.at("knots")) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
      throw Error(ErrorCode::kSchema, "each knot is a [flops, perf] pair");
    }
    knots.push_back({k[0].get<double>(), k[1].get<double>()});
  }
  return BaselineCurve::build(std::move(knots), j.at("dataset_id").get<std::string>());
}

}  // namespace

std::vector<BaselineCurve> parse_curve_file(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("curve file is not valid JSON: ") + e.what());
  }
  std::vector<BaselineCurve> curves;
  if (j.is_object() && j.contains("curves")) {
    if (!j.at("curves").is_array()) throw Error(ErrorCode::kSchema, "'curves' must be an array");
    for (const auto& c : j.at("curves")) curves.push_back(curve_from_json(c));
  } else {
    curves.push_back(curve_from_json(j));
  }
  return curves;
}

nlohmann::json to_json(const BaselineCurve& curve) {
  auto knots = nlohmann::json::array();
  for (const auto& k : curve.knots()) knots.push_back({k.flops, k.perf});
  return {{"dataset_id", curve.dataset_id()}, {"knots", std::move(knots)}};
}

}  // namespace elue
