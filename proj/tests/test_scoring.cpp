#include <doctest.h>

#include <algorithm>
#include <random>

#include "elue/error.hpp"
#include "elue/scoring.hpp"
#include "oracles/pareto_oracle.hpp"

using namespace elue;

namespace {

BaselineCurve sst2_fixture() {
  return BaselineCurve::build({{13399e6, 88.6}, {6700e6, 87.0}}, "sst2");
}

}  // namespace

TEST_CASE("build_baseline_curve") {
  const auto curve = sst2_fixture();
  REQUIRE(curve.knots().size() == 2);
  CHECK(curve.knots()[0].flops == 6700e6);
  CHECK(curve.knots()[1].perf == 88.6);
  CHECK_THROWS_AS(BaselineCurve::build({{1e9, 80}}, "x"), ValidationError);
  CHECK_THROWS_AS(BaselineCurve::build({{1e9, 80}, {1e9, 81}}, "x"), ValidationError);
  CHECK_THROWS_AS(BaselineCurve::build({{0, 80}, {1e9, 81}}, "x"), ValidationError);
}

TEST_CASE("interpolate") {
  const auto curve = sst2_fixture();
  CHECK(interpolate(curve, 6700e6).perf == 87.0);
  CHECK(interpolate(curve, 13399e6).perf == 88.6);
  CHECK_FALSE(interpolate(curve, 13399e6).clamped);
  CHECK(std::abs(interpolate(curve, 10049.5e6).perf - 87.8) < 1e-9);

  const auto below = interpolate(curve, 1e9);
  CHECK(below.perf == 87.0);
  CHECK(below.clamped);
  const auto above = interpolate(curve, 1e12);
  CHECK(above.perf == 88.6);
  CHECK(above.clamped);
  CHECK_THROWS_AS(interpolate(curve, 0.0), Error);
}

TEST_CASE("interpolation stays between neighbouring knots") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> perf(50, 95), f(1e8, 2e10);
  for (int t = 0; t < 100; ++t) {
    std::vector<PerfPoint> knots;
    for (int i = 0; i < 12; ++i) knots.push_back({f(rng), perf(rng)});
    const auto curve = BaselineCurve::build(knots, "d");
    const auto& k = curve.knots();
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      const double q = k[i].flops + (k[i + 1].flops - k[i].flops) * 0.37;
      const double v = curve.at(q).perf;
      CHECK(v >= std::min(k[i].perf, k[i + 1].perf));
      CHECK(v <= std::max(k[i].perf, k[i + 1].perf));
      CHECK(curve.at(k[i].flops).perf == k[i].perf);
    }
  }
}

TEST_CASE("elue_score_dataset") {
  const auto curve = sst2_fixture();
  CHECK(elue_score_dataset(curve.knots(), curve).score == 0.0);
  const std::vector<PerfPoint> one{{10049.5e6, 88.5}};
  CHECK(std::abs(elue_score_dataset(one, curve).score - 0.7) < 1e-9);
  CHECK_THROWS_AS(elue_score_dataset(std::vector<PerfPoint>{}, curve), Error);

  const std::vector<PerfPoint> pts{{7e9, 86.0}, {9e9, 89.0}, {20e9, 90.0}};
  const auto base = elue_score_dataset(pts, curve);
  CHECK(base.clamped_points == 1);
  auto shifted = pts;
  for (auto& p : shifted) p.perf += 1.25;
  CHECK(elue_score_dataset(shifted, curve).score == doctest::Approx(base.score + 1.25).epsilon(1e-14));
}

TEST_CASE("elue_score_overall") {
  const auto ids = benchmark_dataset_ids();
  std::map<std::string, double> zeros, ramp;
  for (std::size_t i = 0; i < ids.size(); ++i) zeros[ids[i]] = 0.0, ramp[ids[i]] = static_cast<double>(i + 1);
  CHECK(*elue_score_overall(zeros).overall == 0.0);
  CHECK(*elue_score_overall(ramp).overall == 3.5);
  ramp.erase("stsb");
  const auto partial = elue_score_overall(ramp);
  CHECK(partial.partial());
  CHECK(partial.missing == std::vector<std::string>{"stsb"});
}

TEST_CASE("pareto_frontier") {
  CHECK(pareto_frontier(std::vector<PerfPoint>{{1, 80}, {2, 90}, {3, 85}}) ==
        std::vector<PerfPoint>{{1, 80}, {2, 90}});
  CHECK(pareto_frontier(std::vector<PerfPoint>{{5, 70}}) == std::vector<PerfPoint>{{5, 70}});
  CHECK(pareto_frontier(std::vector<PerfPoint>{{2, 90}, {2, 90}, {1, 80}}) ==
        std::vector<PerfPoint>{{1, 80}, {2, 90}});

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coarse(0, 20);
  for (int t = 0; t < 100; ++t) {
    std::vector<PerfPoint> pts(200);
    for (auto& p : pts) p = {static_cast<double>(coarse(rng)), static_cast<double>(coarse(rng))};
    const auto frontier = pareto_frontier(pts);
    CHECK(frontier == oracle::brute_force_frontier(pts));
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(pareto_frontier(shuffled) == frontier);
  }
}

TEST_CASE("assign_track") {
  CHECK(assign_track(39'000'000) == Track::k40M);
  CHECK(assign_track(40'000'000) == Track::k55M);
  CHECK(assign_track(67'000'000) == Track::k70M);
  CHECK(assign_track(109'000'000) == Track::k110M);
  CHECK(assign_track(108'891'648) == Track::k110M);
  CHECK_FALSE(assign_track(110'000'000).has_value());
  CHECK(parse_track("55M") == Track::k55M);
  CHECK_FALSE(parse_track("1B").has_value());
}

TEST_CASE("score_submission") {
  std::map<std::string, BaselineCurve> curves;
  std::map<std::string, std::vector<PerfPoint>> points;
  for (const auto& id : benchmark_dataset_ids()) {
    curves.emplace(id, BaselineCurve::build({{1e9, 70}, {2e9, 80}}, id));
    points[id] = {{1.5e9, 76.0}, {2e9, 81.0}};
  }
  const auto scored = score_submission(points, curves, 50'000'000);
  REQUIRE(scored.overall.has_value());
  CHECK(*scored.overall == doctest::Approx(1.0));
  CHECK(*scored.average_perf == doctest::Approx(81.0));
  CHECK(scored.track == Track::k55M);
  CHECK_FALSE(scored.partial());

  points.erase("imdb");
  const auto partial = score_submission(points, curves, 50'000'000);
  CHECK(partial.partial());
  CHECK(std::find(partial.flags.begin(), partial.flags.end(), "partial:missing=imdb") != partial.flags.end());

  points["unknown"] = {{1e9, 1}};
  CHECK_THROWS_AS(score_submission(points, curves, 1), Error);

  const auto j = to_json(scored);
  CHECK(j["convention_version"] == "elue-flops/1");
  CHECK(j["track"] == "55M");
}

TEST_CASE("curve files") {
  const auto curves = parse_curve_file(R"({"curves":[{"dataset_id":"sst2","knots":[[13399e6,88.6],[6700e6,87.0]]}]})");
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].knots().front().flops == 6700e6);
  const auto single = parse_curve_file(to_json(curves[0]).dump());
  CHECK(single[0].knots() == curves[0].knots());
  CHECK_THROWS_AS(parse_curve_file("[1,2]"), Error);
  CHECK_THROWS_AS(parse_curve_file(R"({"dataset_id":"x","knots":[[1,2,3]]})"), Error);
}
