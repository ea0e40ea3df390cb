// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "elue/cli.hpp"
#include "elue/cost_model.hpp"
#include "elue/error.hpp"
#include "elue/exitsim.hpp"
#include "elue/scoring.hpp"
#include "elue/service.hpp"
#include "elue/trace.hpp"
#include "elue/trainer.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles/finite_difference.hpp"
#include "oracles/pareto_oracle.hpp"
#include "oracles/scalar_op_oracle.hpp"

using namespace elue;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

bool same_bytes(const Matrix& a, const Matrix& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_bytes(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

Outcome params_bert_base() {
  const auto spec = testing::bert_base();
  const auto start = Clock::now();
  const auto p = count_params(spec);
  const double elapsed = ms_since(start);
  const double rel = std::abs(static_cast<double>(p.backbone) - 109e6) / 109e6;
  return {p.backbone == 108'891'648 && rel <= 0.015 && elapsed < 1.0,
          "backbone " + std::to_string(p.backbone) + ", " + fmt(100 * rel, 2) + "% from 109M, " +
              fmt(elapsed, 4) + " ms"};
}

Outcome flops_model() {
  const auto start = Clock::now();
  std::size_t shapes = 0, mismatches = 0;
  for (int n = 1; n <= 8; ++n) {
    for (int d = 1; d <= 8; ++d) {
      for (int h = 1; h <= d; ++h) {
        if (d % h != 0) continue;
        for (int ffn = 1; ffn <= 8; ++ffn) {
          const auto oracle = oracle::transformer_layer_ops(n, d, h, ffn);
          mismatches += oracle.total != transformer_layer_flops(n, d, h, ffn);
          mismatches += oracle.attention != attention_flops(n, d, h);
          ++shapes;
        }
      }
    }
  }
  const auto full = forward_flops(testing::bert_base(), 70, 12);
  const double elapsed = ms_since(start);
  const bool in_band = full >= 12'000'000'000 && full <= 15'000'000'000;
  return {mismatches == 0 && in_band && elapsed < 10'000.0,
          std::to_string(shapes) + " shapes, " + std::to_string(mismatches) + " mismatches; BERT-base n=70 " +
              fmt(static_cast<double>(full) / 1e6, 1) + "M FLOPs; " + fmt(elapsed / 1000.0, 2) + " s"};
}

BaselineCurve random_curve(std::mt19937_64& rng, const std::string& id) {
  std::uniform_int_distribution<int> count(2, 12);
  std::uniform_real_distribution<double> f(1e6, 2e10), p(40.0, 95.0);
  std::vector<PerfPoint> knots;
  const int n = count(rng);
  while (static_cast<int>(knots.size()) < n) {
    const PerfPoint k{std::floor(f(rng)), p(rng)};
    if (std::none_of(knots.begin(), knots.end(), [&](const PerfPoint& q) { return q.flops == k.flops; })) {
      knots.push_back(k);
    }
  }
  return BaselineCurve::build(knots, id);
}

Outcome score_identity() {
  std::mt19937_64 rng(31);
  std::size_t nonzero = 0;
  for (const auto& id : benchmark_dataset_ids()) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto curve = random_curve(rng, id);
      nonzero += elue_score_dataset(curve.knots(), curve).score != 0.0;
    }
  }
  double worst = 0.0;
  std::uniform_real_distribution<double> shift(-30.0, 30.0), unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto curve = random_curve(rng, "sst2");
    const double lo = curve.knots().front().flops, hi = curve.knots().back().flops;
    std::vector<PerfPoint> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({lo + (hi - lo) * unit(rng), 60.0 + 30.0 * unit(rng)});
    const double c = shift(rng);
    auto moved = pts;
    for (auto& p : moved) p.perf += c;
    const double delta = elue_score_dataset(moved, curve).score - elue_score_dataset(pts, curve).score;
    worst = std::max(worst, std::abs(delta - c));
  }
  return {nonzero == 0 && worst <= 1e-12, std::to_string(nonzero) + " nonzero knot scores over 300 curves; " +
                                               "max translation error " + sci(worst)};
}

Outcome interpolation_example() {
  const auto curve = BaselineCurve::build({{6700e6, 87.0}, {13399e6, 88.6}}, "sst2");
  const double mid = (6700e6 + 13399e6) / 2.0;
  const double at_mid = curve.at(mid).perf;
  const std::vector<PerfPoint> point{{mid, 88.5}};
  const double score = elue_score_dataset(point, curve).score;
  return {std::abs(at_mid - 87.8) <= 1e-9 && std::abs(score - 0.7) <= 1e-9,
          "p(mid) = " + fmt(at_mid, 12) + ", score = " + fmt(score, 12)};
}

Outcome frontier_property() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(0, 200), grid(0, 40);
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PerfPoint> pts(static_cast<std::size_t>(size(rng)));
    // Coarse grid so ties and exact duplicates occur.
    for (auto& p : pts) p = {1e6 * (1 + grid(rng)), 50.0 + 0.5 * grid(rng)};
    mismatches += pareto_frontier(pts) != oracle::brute_force_frontier(pts);
  }
  const double elapsed = ms_since(start);
  return {mismatches == 0 && elapsed < 5000.0,
          "1000 sets, " + std::to_string(mismatches) + " mismatches, " + fmt(elapsed / 1000.0, 2) + " s"};
}

Outcome trace_round_trip() {
  std::mt19937_64 rng(17);
  std::size_t failures = 0, pruned = 0;
  for (int i = 0; i < 1000; ++i) {
    auto file = testing::random_submission(rng, i % 3 == 0);
    const auto text = serialize_trace(file);
    const auto back = parse_trace_file(text, file.dataset_id);
    failures += !(back == file) || serialize_trace(back) != text;
    for (const auto& row : file.rows) {
      for (std::size_t s = 1; s + 1 < row.steps.size(); ++s) {
        if (row.steps[s].shape.dims.size() == 2 && row.steps[s].shape.dims[0] < row.steps[0].shape.dims[0]) {
          ++pruned;
          break;
        }
      }
    }
  }
  const std::string reference = "index\tpred\tmodules\n0\t1\t(10),emb; (10,768),layer_1; (768),exit_1\n";
  const auto parsed = parse_trace_file(reference, "sst2");
  const std::vector<TraceStep> expected{{Shape{{10}}, "emb"}, {Shape{{10, 768}}, "layer_1"}, {Shape{{768}}, "exit_1"}};
  const bool reference_ok = parsed.rows.size() == 1 && parsed.rows[0].index == 0 &&
                           parsed.rows[0].pred == Prediction{std::int64_t{1}} && parsed.rows[0].steps == expected &&
                           serialize_trace(parsed) == reference;
  return {failures == 0 && pruned > 0 && reference_ok,
          "1000 files, " + std::to_string(failures) + " failures, " + std::to_string(pruned) +
              " pruned rows; reference row " + (reference_ok ? "exact" : "MISMATCH")};
}

Outcome exit_policies() {
  std::mt19937_64 rng(23);
  std::size_t violations = 0, samples = 0;
  for (int sweep = 0; sweep < 20; ++sweep) {
    const int labels = 2 + sweep % 4, layers = 1 + sweep % 12;
    for (const auto& o : testing::random_outputs(rng, 50, layers, labels, 0.3)) {
      ++samples;
      violations += entropy_exit(o, 0.0).exit_layer != layers;
      const auto first = softmax(o.logits[0]);
      const bool uniform = std::all_of(first.begin(), first.end(), [&](double p) { return p == first[0]; });
      if (!uniform) violations += entropy_exit(o, std::log(static_cast<double>(labels))).exit_layer != 1;
      std::int64_t previous = layers + 1;
      for (double th = 0.0; th <= 1.5; th += 0.05) {
        const auto l = entropy_exit(o, th).exit_layer;
        violations += l > previous;
        previous = l;
      }
      std::int64_t prev_t = 0;
      for (std::int64_t t = 1; t <= layers; ++t) {
        const auto l = patience_exit(o, t).exit_layer;
        violations += l < prev_t;
        prev_t = l;
      }
    }
  }
  ExitOutputs regression;
  regression.values = {1.0, 1.1, 1.2};
  bool rejected = false;
  try {
    apply_policy(regression, EntropyPolicy{0.3});
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kPolicyMismatch;
  }
  return {violations == 0 && rejected, std::to_string(samples) + " samples, " + std::to_string(violations) +
                                           " violations; regression entropy " + (rejected ? "rejected" : "ACCEPTED")};
}

Outcome gradient_checks() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> layers(1, 4), width(1, 8), labels(2, 4);
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t checks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int L = layers(rng), d = width(rng), C = labels(rng);
    const auto net = init_network(L, d, C, 500 + trial);
    std::normal_distribution<double> g;
    Matrix x(5, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    std::vector<std::int64_t> y(5);
    for (auto& v : y) v = std::uniform_int_distribution<int>(0, C - 1)(rng);
    const std::vector<TrainStrategy> strategies{
        SumStrategy{}, WeightedStrategy{}, EquilibriumStrategy{},
        GroupedStrategy{interleaved_groups(L, std::min(L, 2)), false}};
    for (const auto& s : strategies) {
      for (std::size_t step = 0; step < 2; ++step) {
        worst = std::max(worst, oracle::check_gradients(net, x, y, resolve_objective(s, L, step)).max_relative_error);
        ++checks;
      }
    }
  }
  const double elapsed = ms_since(start);
  return {worst < 1e-5 && elapsed < 30'000.0, std::to_string(checks) + " checks on 50 nets, max relative error " +
                                                  sci(worst) + ", " + fmt(elapsed / 1000.0, 2) + " s"};
}

Outcome freeze_and_groups() {
  const auto data = make_synthetic_dataset({3, 200, 6, 2, 4.0, 0.25});
  const auto stage1 = train(init_network(3, 6, 2, 3), data, TwoStageStrategy{8, 0}, {0, 0.1, 32, 3});
  const auto both = train(init_network(3, 6, 2, 3), data, TwoStageStrategy{8, 8}, {0, 0.1, 32, 3});
  bool frozen = true;
  for (std::size_t l = 0; l < 3; ++l) {
    frozen = frozen && same_bytes(stage1.net.blocks[l].weight, both.net.blocks[l].weight) &&
             same_bytes(stage1.net.blocks[l].bias, both.net.blocks[l].bias);
  }
  frozen = frozen && same_bytes(stage1.net.heads[2].weight, both.net.heads[2].weight);

  const auto g12 = interleaved_groups(12, 2);
  const auto g24 = interleaved_groups(24, 3);
  bool groups = g12 == std::vector<std::vector<std::int64_t>>{{1, 3, 5, 7, 9, 11, 12}, {2, 4, 6, 8, 10, 12}} &&
                g24 == std::vector<std::vector<std::int64_t>>{{1, 4, 7, 10, 13, 16, 19, 22, 24},
                                                              {2, 5, 8, 11, 14, 17, 20, 23, 24},
                                                              {3, 6, 9, 12, 15, 18, 21, 24}};
  for (std::size_t step = 0; step < 12; ++step) {
    const auto& a = group_schedule(g12, step);
    const auto& b = group_schedule(g24, step);
    groups = groups && a == g12[step % 2] && b == g24[step % 3] && a.back() == 12 && b.back() == 24;
    const auto obj = resolve_objective(GroupedStrategy{g12}, 12, step);
    groups = groups && obj.weights[11] != 0.0;
  }
  return {frozen && groups, std::string("backbone ") + (frozen ? "byte-identical" : "CHANGED") +
                                " across stage 2; group cycles " + (groups ? "match" : "DIFFER")};
}

Outcome end_to_end() {
  const std::size_t L = 4;
  TrainingJob job;
  job.num_layers = L;
  job.width = 8;
  job.num_labels = 2;
  job.seed = 2024;
  job.strategy = EquilibriumStrategy{};
  job.train = {40, 0.1, 32, 2024};
  job.data = {2024, 600, 8, 2, 3.0, 0.25};
  const auto out = run_training_job(job);
  const auto train_acc = exit_accuracies(out.result.net, out.data.train_x, out.data.train_y);
  const double min_train = *std::min_element(train_acc.begin(), train_acc.end());

  const auto logits = parse_logits_file(serialize_logits_file(export_logits(out.result.net, out.data.test_x)));
  GoldFile gold;
  gold.dataset_id = "sst2";
  gold.num_labels = 2;
  for (auto y : out.data.test_y) gold.labels.emplace_back(y);

  const auto spec = make_model_spec("desk-multi-exit", 64, static_cast<std::int64_t>(L), 4, 256, 1000, 128, 2, 2);
  std::mt19937_64 rng(99);
  std::vector<std::int64_t> seq_lens;
  for (std::size_t i = 0; i < logits.samples.size(); ++i) {
    seq_lens.push_back(std::uniform_int_distribution<std::int64_t>(16, 96)(rng));
  }
  std::vector<ExitPolicy> grid;
  for (double th : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4, 0.7}) grid.push_back(EntropyPolicy{th});
  const auto cells = sweep_policy(logits.samples, spec, seq_lens, grid, gold);

  // Re-cost every emitted trace file from its bytes.
  std::size_t reproduced = 0;
  std::vector<std::string> texts;
  for (const auto& c : cells) {
    texts.push_back(serialize_trace(c.traces));
    const auto file = parse_trace_file(texts.back(), "sst2");
    const auto recost = evaluate_file(file, spec, gold);
    reproduced += recost.flops.mean == c.point.flops && recost.perf == c.point.perf;
  }

  // Fixed two-knot baseline spanning the model's exit-1 and exit-L costs.
  double mean_len = 0.0;
  for (auto n : seq_lens) mean_len += static_cast<double>(n);
  const auto typical = static_cast<std::int64_t>(std::lround(mean_len / static_cast<double>(seq_lens.size())));
  const std::vector<PerfPoint> knots{{static_cast<double>(forward_flops(spec, typical, 1)), 90.0},
                                     {static_cast<double>(forward_flops(spec, typical, L)), 99.0}};
  EvaluationData data;
  data.golds.emplace("sst2", gold);
  data.curves.emplace("sst2", BaselineCurve::build(knots, "sst2"));

  testing::TempDir dir;
  testing::write_data_dir(dir.path() / "data", data);
  std::vector<std::string> args{"--format", "json", "--data-dir", (dir.path() / "data").string(), "score", "--spec",
                                (dir.path() / "spec.json").string()};
  std::ofstream(dir.path() / "spec.json") << to_json(spec).dump();
  SubmissionBundle bundle;
  bundle.spec_text = to_json(spec).dump();
  bundle.metadata.submitter = "acceptance";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto path = dir.path() / ("cell-" + std::to_string(i) + ".tsv");
    std::ofstream(path) << texts[i];
    args.push_back("--trace");
    args.push_back("sst2=" + path.string());
    bundle.traces.push_back({"sst2", texts[i], path.filename().string()});
  }
  std::ostringstream cli_out, cli_err;
  const int status = cli::run(args, cli_out, cli_err);
  if (status != 0) return {false, "CLI score failed: " + cli_err.str()};
  const auto cli_json = nlohmann::json::parse(cli_out.str());
  const double cli_score = cli_json.at("datasets").at("sst2").at("score").get<double>();

  Service service(dir.path() / "store", load_evaluation_data(dir.path() / "data"));
  const auto record = service.submit(bundle).record;
  const auto board = service.leaderboard();
  const auto entry = std::find_if(board.begin(), board.end(), [&](const auto& e) { return e.id == record.id; });
  const bool listed = entry != board.end() && entry->dataset_scores.count("sst2") == 1;
  const bool bit_exact = listed && entry->dataset_scores.at("sst2") == cli_score &&
                         record.scored.datasets.at("sst2").score == cli_score;

  const bool ok = min_train >= 0.95 && reproduced == cells.size() && listed && bit_exact;
  return {ok, "min exit train accuracy " + fmt(100.0 * min_train, 2) + "%, " + std::to_string(reproduced) + "/" +
                  std::to_string(cells.size()) + " sweep points re-costed exactly, service score " +
                  (bit_exact ? "==" : "!=") + " CLI score (" + sci(cli_score) + ")" +
                  (listed ? "" : ", leaderboard entry MISSING")};
}

Outcome track_assignment() {
  const bool ok = assign_track(39'000'000) == Track::k40M && assign_track(109'000'000) == Track::k110M &&
                  !assign_track(110'000'000).has_value();
  return {ok, "39M -> 40M, 109M -> 110M, 110M -> none"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"parameter count", params_bert_base},  {"FLOPs model", flops_model},
      {"ELUE score identity", score_identity}, {"interpolation example", interpolation_example},
      {"Pareto frontier", frontier_property},  {"trace round trip", trace_round_trip},
      {"exit policies", exit_policies},        {"trainer gradient checks", gradient_checks},
      {"two-stage freeze and groups", freeze_and_groups}, {"end to end", end_to_end},
      {"track assignment", track_assignment},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
