#include "elue/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "elue/cost_model.hpp"
#include "elue/error.hpp"
#include "elue/evaluate.hpp"
#include "elue/exitsim.hpp"
#include "elue/flops_convention.hpp"
#include "elue/http_server.hpp"
#include "elue/scoring.hpp"
#include "elue/service.hpp"
#include "elue/trainer.hpp"

namespace elue::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void require_readable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
}

// "[dataset=]path"
std::pair<std::string, std::string> split_trace_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) return {"", arg};
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

struct PointsFile {
  std::map<std::string, std::vector<PerfPoint>> points;
  std::optional<std::int64_t> params;
};

// Accepts {"points": {id: [[f, p], ...]}, "params": N}, a curve object, or {"curves": [...]}.
PointsFile parse_points_file(const std::string& text) {
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kSchema, "points file is not a JSON object");
  PointsFile out;
  auto read_pairs = [](const json& list, const std::string& id) {
    std::vector<PerfPoint> pts;
    if (!list.is_array()) throw Error(ErrorCode::kSchema, "points for '" + id + "' must be a list");
    for (const auto& p : list) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw Error(ErrorCode::kSchema, "each point for '" + id + "' is a [flops, perf] pair");
      }
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pts;
  };
  auto read_curve = [&](const json& c) {
    if (!c.contains("dataset_id") || !c.at("dataset_id").is_string() || !c.contains("knots")) {
      throw Error(ErrorCode::kSchema, "curve entries need 'dataset_id' and 'knots'");
    }
    const auto id = c.at("dataset_id").get<std::string>();
    auto pts = read_pairs(c.at("knots"), id);
    auto& dst = out.points[id];
    dst.insert(dst.end(), pts.begin(), pts.end());
  };
  if (j.contains("points")) {
    if (!j.at("points").is_object()) throw Error(ErrorCode::kSchema, "'points' must be an object");
    for (const auto& [id, list] : j.at("points").items()) out.points[id] = read_pairs(list, id);
    if (j.contains("params")) out.params = j.at("params").get<std::int64_t>();
  } else if (j.contains("curves")) {
    for (const auto& c : j.at("curves")) read_curve(c);
  } else {
    read_curve(j);
  }
  return out;
}

struct Options {
  std::string format = "human";
  std::string data_dir = "data";
  std::string output;

  std::string spec;
  std::vector<std::string> traces;
  std::vector<std::string> curves;
  std::vector<std::string> golds;
  std::string points;
  std::int64_t params = 0;

  std::string logits;
  std::string gold;
  std::string policy = "entropy";
  std::vector<double> grid;
  double tau = 0.1;
  std::int64_t seq_len = 128;
  std::string seq_lens;
  std::string emit_traces;

  std::string job;
  std::string model_out;
  std::string logits_out;
  std::string gold_out;
  std::string dataset = "sst2";

  std::string store;
  std::string track;
  bool plot = false;
  std::string host = "127.0.0.1";
  int port = 8080;
};

bool json_mode(const Options& o) { return o.format == "json"; }

EvaluationData evaluation_data(const Options& o) {
  auto data = load_evaluation_data(o.data_dir);
  for (const auto& path : o.curves) {
    for (auto& c : parse_curve_file(read_text_file(path))) {
      const std::string id = c.dataset_id();
      data.curves.insert_or_assign(id, std::move(c));
    }
  }
  for (const auto& path : o.golds) {
    auto g = parse_gold_file(read_text_file(path));
    const std::string id = g.dataset_id;
    data.golds.insert_or_assign(id, std::move(g));
  }
  return data;
}

std::string cmd_flops(const Options& o) {
  if (o.spec.empty()) throw Error(ErrorCode::kUsage, "flops needs --spec");
  if (o.traces.empty()) throw Error(ErrorCode::kUsage, "flops needs at least one --trace");
  const auto spec = load_model_spec(o.spec);
  json results = json::array();
  std::string human = "file\trows\tmean\tmin\tp50\tp90\tp99\tmax\n";
  for (const auto& arg : o.traces) {
    const auto [dataset, path] = split_trace_arg(arg);
    const auto file = parse_trace_file(read_text_file(path), dataset, path);
    const auto s = submission_flops(file, spec);
    results.push_back({{"file", path},
                       {"dataset_id", dataset},
                       {"rows", s.rows},
                       {"mean", s.mean},
                       {"min", s.min},
                       {"p50", s.p50},
                       {"p90", s.p90},
                       {"p99", s.p99},
                       {"max", s.max}});
    human += path + "\t" + std::to_string(s.rows) + "\t" + shortest(s.mean) + "\t" + std::to_string(s.min) +
             "\t" + std::to_string(s.p50) + "\t" + std::to_string(s.p90) + "\t" + std::to_string(s.p99) +
             "\t" + std::to_string(s.max) + "\n";
  }
  if (json_mode(o)) {
    return json{{"convention_version", std::string(FlopsConvention::kConventionVersion)}, {"files", results}}
               .dump(2) + "\n";
  }
  return human;
}

std::string cmd_params(const Options& o) {
  if (o.spec.empty()) throw Error(ErrorCode::kUsage, "params needs --spec");
  const auto spec = load_model_spec(o.spec);
  const auto p = count_params(spec);
  const auto track = assign_track(p.total());
  const std::string track_text = track ? std::string(track_name(*track)) : "none";
  if (json_mode(o)) {
    return json{{"model_name", spec.model_name},
                {"backbone", p.backbone},
                {"exit_heads", p.exit_heads},
                {"total", p.total()},
                {"track", track ? json(track_text) : json()}}
               .dump(2) + "\n";
  }
  return "model       " + spec.model_name + "\nbackbone    " + std::to_string(p.backbone) + "\nexit_heads  " +
         std::to_string(p.exit_heads) + "\ntotal       " + std::to_string(p.total()) + "\ntrack       " +
         track_text + "\n";
}

std::string render_scored(const ScoredSubmission& s) {
  std::string out = "dataset\tpoints\tscore\tbest_perf\tclamped\n";
  for (const auto& [id, r] : s.datasets) {
    out += id + "\t" + std::to_string(r.points.size()) + "\t" + fixed2(r.score) + "\t" + fixed2(r.best_perf) +
           "\t" + std::to_string(r.clamped_points) + "\n";
  }
  out += "overall\t" + (s.overall ? fixed2(*s.overall) : std::string("partial")) + "\n";
  out += "params\t" + std::to_string(s.params) + "\n";
  out += "track\t" + (s.track ? std::string(track_name(*s.track)) : std::string("none")) + "\n";
  for (const auto& f : s.flags) out += "flag\t" + f + "\n";
  return out;
}

std::string cmd_score(const Options& o) {
  const auto data = evaluation_data(o);
  if (!o.points.empty()) {
    if (!o.traces.empty()) throw Error(ErrorCode::kUsage, "use either --points or --trace, not both");
    const auto pf = parse_points_file(read_text_file(o.points));
    std::int64_t params = o.params;
    if (params == 0 && pf.params) params = *pf.params;
    if (params == 0 && !o.spec.empty()) params = count_params(load_model_spec(o.spec)).total();
    if (params <= 0) throw Error(ErrorCode::kUsage, "score --points needs --params, --spec or a params field");
    const auto scored = evaluate_points(pf.points, params, data);
    return json_mode(o) ? to_json(scored).dump(2) + "\n" : render_scored(scored);
  }
  if (o.spec.empty()) throw Error(ErrorCode::kUsage, "score needs --spec with --trace, or --points");
  if (o.traces.empty()) throw Error(ErrorCode::kUsage, "score needs --trace DATASET=FILE or --points");
  const auto spec = load_model_spec(o.spec);
  std::vector<SubmissionFile> files;
  for (const auto& arg : o.traces) {
    const auto [dataset, path] = split_trace_arg(arg);
    if (dataset.empty()) throw Error(ErrorCode::kUsage, "score --trace takes DATASET=FILE, got '" + arg + "'");
    files.push_back(parse_trace_file(read_text_file(path), dataset, fs::path(path).filename().string()));
  }
  const auto ev = evaluate_traces(spec, files, data);
  if (json_mode(o)) {
    json j = to_json(ev.scored);
    j["files"] = json::array();
    for (const auto& f : ev.files) j["files"].push_back(to_json(f));
    return j.dump(2) + "\n";
  }
  return render_scored(ev.scored);
}

std::string cmd_frontier(const Options& o) {
  if (o.points.empty()) throw Error(ErrorCode::kUsage, "frontier needs --points");
  const auto pf = parse_points_file(read_text_file(o.points));
  json j = json::object();
  std::string human;
  for (const auto& [id, pts] : pf.points) {
    const auto front = pareto_frontier(pts);
    human += "# " + id + "\nflops\tperf\n";
    j[id] = json::array();
    for (const auto& p : front) {
      j[id].push_back({p.flops, p.perf});
      human += shortest(p.flops) + "\t" + shortest(p.perf) + "\n";
    }
  }
  return json_mode(o) ? j.dump(2) + "\n" : human;
}

std::vector<ExitPolicy> policy_grid(const Options& o, TaskKind task) {
  std::vector<double> grid = o.grid;
  std::vector<ExitPolicy> out;
  if (o.policy == "entropy") {
    if (grid.empty()) grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    for (double t : grid) out.push_back(EntropyPolicy{t});
  } else if (o.policy == "patience") {
    if (grid.empty()) grid = {1, 2, 3, 4, 5, 6};
    for (double t : grid) {
      const auto p = static_cast<std::int64_t>(t);
      if (static_cast<double>(p) != t) throw Error(ErrorCode::kInvalidArgument, "patience values are integers");
      if (task == TaskKind::kRegression) {
        out.push_back(PatienceRegressionPolicy{p, o.tau});
      } else {
        out.push_back(PatiencePolicy{p});
      }
    }
  } else {
    throw Error(ErrorCode::kUsage, "unknown policy '" + o.policy + "', expected entropy or patience");
  }
  return out;
}

std::string cmd_simulate(const Options& o) {
  if (o.spec.empty() || o.logits.empty() || o.gold.empty()) {
    throw Error(ErrorCode::kUsage, "simulate needs --spec, --logits and --gold");
  }
  const auto spec = load_model_spec(o.spec);
  const auto logits = parse_logits_file(read_text_file(o.logits));
  const auto gold = parse_gold_file(read_text_file(o.gold));
  std::vector<std::int64_t> seq_lens;
  if (!o.seq_lens.empty()) {
    std::istringstream in(read_text_file(o.seq_lens));
    std::int64_t n;
    while (in >> n) seq_lens.push_back(n);
    if (!in.eof()) throw Error(ErrorCode::kParse, "sequence length file holds non-integer values");
  } else {
    seq_lens.assign(logits.samples.size(), o.seq_len);
  }
  const auto grid = policy_grid(o, logits.task_kind);
  const auto cells = sweep_policy(logits.samples, spec, seq_lens, grid, gold);

  json j = json::array();
  std::string human = "policy\tflops\tperf\tmean_exit\n";
  json points = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    double mean_exit = 0.0;
    for (auto l : c.exit_layers) mean_exit += static_cast<double>(l);
    mean_exit /= static_cast<double>(c.exit_layers.size());
    j.push_back({{"policy", policy_name(c.policy)},
                 {"flops", c.point.flops},
                 {"perf", c.point.perf},
                 {"mean_exit_layer", mean_exit}});
    points.push_back({c.point.flops, c.point.perf});
    human += policy_name(c.policy) + "\t" + shortest(c.point.flops) + "\t" + fixed2(c.point.perf) + "\t" +
             fixed2(mean_exit) + "\n";
    if (!o.emit_traces.empty()) {
      fs::create_directories(o.emit_traces);
      write_file_atomic(fs::path(o.emit_traces) / (gold.dataset_id + "-" + std::to_string(i) + ".tsv"),
                        serialize_trace(c.traces));
    }
  }
  if (!o.emit_traces.empty()) {
    write_file_atomic(fs::path(o.emit_traces) / "points.json",
                      json{{"points", {{gold.dataset_id, points}}}}.dump(2) + "\n");
  }
  return json_mode(o) ? j.dump(2) + "\n" : human;
}

std::string cmd_train(const Options& o) {
  if (o.job.empty()) throw Error(ErrorCode::kUsage, "train needs --job");
  const auto j = json::parse(read_text_file(o.job), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kSchema, "training job is not valid JSON");
  const auto job = training_job_from_json(j);
  const auto out = run_training_job(job);
  const auto& net = out.result.net;
  const auto train_acc = exit_accuracies(net, out.data.train_x, out.data.train_y);
  const auto test_acc = exit_accuracies(net, out.data.test_x, out.data.test_y);

  if (!o.model_out.empty()) write_file_atomic(o.model_out, to_json(net).dump() + "\n");
  if (!o.logits_out.empty()) {
    write_file_atomic(o.logits_out, serialize_logits_file(export_logits(net, out.data.test_x)));
  }
  if (!o.gold_out.empty()) {
    GoldFile gold;
    gold.dataset_id = o.dataset;
    gold.num_labels = job.num_labels;
    for (auto y : out.data.test_y) gold.labels.emplace_back(y);
    write_file_atomic(o.gold_out, serialize_gold(gold));
  }

  if (json_mode(o)) {
    json r = to_json(out.result);
    r["job"] = to_json(job);
    r["train_accuracy"] = train_acc;
    r["test_accuracy"] = test_acc;
    return r.dump(2) + "\n";
  }
  std::string human = "strategy\t" + strategy_name(job.strategy) + "\nsteps\t" + std::to_string(out.result.steps) +
                      "\nepoch\tstage\tmean_loss\tmin_exit_acc\n";
  for (const auto& rec : out.result.history) {
    double loss = 0.0, acc = 1.0;
    for (double l : rec.exit_loss) loss += l;
    for (double a : rec.exit_accuracy) acc = std::min(acc, a);
    human += std::to_string(rec.epoch) + "\t" + std::to_string(rec.stage) + "\t" +
             shortest(loss / static_cast<double>(rec.exit_loss.size())) + "\t" + fixed2(100.0 * acc) + "\n";
  }
  human += "exit\ttrain_acc\ttest_acc\n";
  for (std::size_t l = 0; l < train_acc.size(); ++l) {
    human += std::to_string(l + 1) + "\t" + fixed2(100.0 * train_acc[l]) + "\t" + fixed2(100.0 * test_acc[l]) + "\n";
  }
  return human;
}

std::string store_dir(const Options& o) {
  return o.store.empty() ? (fs::path(o.data_dir) / "store").string() : o.store;
}

std::string cmd_leaderboard(const Options& o) {
  const auto track = o.track.empty() ? std::nullopt : parse_track(o.track);
  if (!o.track.empty() && !track) throw Error(ErrorCode::kNotFound, "unknown track '" + o.track + "'");
  Service service(store_dir(o), evaluation_data(o));
  const auto board = service.leaderboard(track);
  if (o.plot) {
    // One (flops, perf) series per entry and dataset.
    json series = json::array();
    std::string human = "model\tdataset\tflops\tperf\n";
    for (const auto& e : board) {
      const auto record = service.get(e.id);
      for (const auto& [id, r] : record->scored.datasets) {
        json pts = json::array();
        for (const auto& p : r.points) {
          pts.push_back({p.flops, p.perf});
          human += e.model_name + "\t" + id + "\t" + shortest(p.flops) + "\t" + shortest(p.perf) + "\n";
        }
        series.push_back({{"id", e.id}, {"model_name", e.model_name}, {"dataset_id", id}, {"points", pts}});
      }
    }
    return json_mode(o) ? series.dump(2) + "\n" : human;
  }
  return json_mode(o) ? leaderboard_json(board, track).dump(2) + "\n" : render_leaderboard(board, track);
}

void cmd_serve(const Options& o, std::ostream& out) {
  Service service(store_dir(o), evaluation_data(o));
  HttpServer server(service);
  const int port = server.bind(o.host, o.port);
  out << "listening on http://" << o.host << ":" << port << std::endl;
  server.serve();
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--spec", o.spec, "Model spec JSON");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Efficiency benchmark engine for early-exit models"};
  app.name("elue");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file with option defaults; flags win");
  Options o;
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "json"}))->capture_default_str();
  app.add_option("--data-dir", o.data_dir, "Directory with gold/ and curves/")
      ->envname("ELUE_DATA_DIR")
      ->capture_default_str();
  app.add_option("-o,--output", o.output, "Write the report to a file instead of stdout");

  auto* flops = app.add_subcommand("flops", "Per-sample FLOPs summary of trace files");
  add_common(flops, o);
  flops->add_option("--trace", o.traces, "[DATASET=]FILE, repeatable")->required();

  auto* params = app.add_subcommand("params", "Parameter count and leaderboard track");
  add_common(params, o);

  auto* score = app.add_subcommand("score", "ELUE score of a submission");
  add_common(score, o);
  score->add_option("--trace", o.traces, "DATASET=FILE, repeatable");
  score->add_option("--points", o.points, "Declared points file instead of traces");
  score->add_option("--params", o.params, "Parameter count for --points");
  score->add_option("--curves", o.curves, "Extra baseline curve files");
  score->add_option("--gold", o.golds, "Extra gold label files");

  auto* frontier = app.add_subcommand("frontier", "Pareto frontier of operating points");
  frontier->add_option("--points", o.points, "Points or curve file")->required();

  auto* simulate = app.add_subcommand("simulate", "Sweep an exit policy over per-exit outputs");
  add_common(simulate, o);
  simulate->add_option("--logits", o.logits, "Per-exit outputs (JSONL)")->required();
  simulate->add_option("--gold", o.gold, "Gold labels")->required();
  simulate->add_option("--policy", o.policy, "entropy or patience")->capture_default_str();
  simulate->add_option("--grid", o.grid, "Thresholds or patience values")->delimiter(',');
  simulate->add_option("--tau", o.tau, "Agreement tolerance for regression patience")->capture_default_str();
  simulate->add_option("--seq-len", o.seq_len, "Sequence length for every sample")->capture_default_str();
  simulate->add_option("--seq-lens", o.seq_lens, "File with one sequence length per sample");
  simulate->add_option("--emit-traces", o.emit_traces, "Directory for per-cell trace files and points.json");

  auto* train_cmd = app.add_subcommand("train", "Train the multi-exit network on synthetic data");
  train_cmd->add_option("--job", o.job, "Training job JSON")->required();
  train_cmd->add_option("--model-out", o.model_out, "Write trained weights");
  train_cmd->add_option("--logits-out", o.logits_out, "Write test-split per-exit logits");
  train_cmd->add_option("--gold-out", o.gold_out, "Write test-split gold labels");
  train_cmd->add_option("--dataset", o.dataset, "Dataset id for --gold-out")->capture_default_str();

  auto* board = app.add_subcommand("leaderboard", "Ranked leaderboard from a store");
  board->add_option("--store", o.store, "Store directory (default <data-dir>/store)");
  board->add_option("--track", o.track, "40M, 55M, 70M or 110M");
  board->add_flag("--plot", o.plot, "Emit (flops, perf) series instead of the table");

  auto* serve = app.add_subcommand("serve", "Run the HTTP submission service");
  serve->add_option("--store", o.store, "Store directory (default <data-dir>/store)");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->capture_default_str();

  std::vector<std::string> argv_store{"elue"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_to_json(Error(ErrorCode::kUsage, e.what())).dump() << "\n";
    return static_cast<int>(ErrorCode::kUsage);
  }

  try {
    for (const auto* path : {&o.spec, &o.points, &o.logits, &o.gold, &o.job, &o.seq_lens}) {
      if (!path->empty()) require_readable(*path);
    }
    for (const auto& t : o.traces) require_readable(split_trace_arg(t).second);
    for (const auto& p : o.curves) require_readable(p);
    for (const auto& p : o.golds) require_readable(p);

    std::string report;
    if (app.got_subcommand(flops)) report = cmd_flops(o);
    else if (app.got_subcommand(params)) report = cmd_params(o);
    else if (app.got_subcommand(score)) report = cmd_score(o);
    else if (app.got_subcommand(frontier)) report = cmd_frontier(o);
    else if (app.got_subcommand(simulate)) report = cmd_simulate(o);
    else if (app.got_subcommand(train_cmd)) report = cmd_train(o);
    else if (app.got_subcommand(board)) report = cmd_leaderboard(o);
    else if (app.got_subcommand(serve)) {
      cmd_serve(o, out);
      return 0;
    }
    if (o.output.empty()) {
      out << report;
    } else {
      write_file_atomic(o.output, report);
    }
    return 0;
  } catch (const std::exception& e) {
    err << error_to_json(e).dump() << "\n";
    return exit_status(e);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace elue::cli
