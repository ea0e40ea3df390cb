#include "elue/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <tuple>

#include "elue/datasets.hpp"
#include "elue/error.hpp"
#include "elue/flops_convention.hpp"
#include "elue/model_spec.hpp"

namespace elue {

namespace {

using nlohmann::json;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

const json& require(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kSchema, std::string(where) + " is missing '" + key + "'");
  }
  return j.at(key);
}

std::map<std::string, std::vector<PerfPoint>> points_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "'points' must map dataset ids to [flops, perf] lists");
  std::map<std::string, std::vector<PerfPoint>> out;
  for (const auto& [id, list] : j.items()) {
    if (!list.is_array()) throw Error(ErrorCode::kSchema, "points for '" + id + "' must be a list");
    for (const auto& p : list) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw Error(ErrorCode::kSchema, "each point for '" + id + "' is a [flops, perf] pair");
      }
      out[id].push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }
  return out;
}

json metadata_json(const SubmissionMetadata& meta, const std::string& model_name) {
  json j{{"submitter", meta.submitter}, {"model_name", model_name}};
  if (meta.declared_params) j["declared_params"] = *meta.declared_params;
  if (!meta.declared_flops.empty()) j["declared_flops"] = meta.declared_flops;
  return j;
}

SubmissionMetadata metadata_from_json(const json& j) {
  SubmissionMetadata meta;
  if (j.is_null()) return meta;
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "metadata must be an object");
  try {
    meta.submitter = j.value("submitter", std::string());
    meta.model_name = j.value("model_name", std::string());
    if (j.contains("declared_params")) meta.declared_params = j.at("declared_params").get<std::int64_t>();
    if (j.contains("declared_flops")) {
      meta.declared_flops = j.at("declared_flops").get<std::map<std::string, double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("metadata: ") + e.what());
  }
  return meta;
}

bool disagrees(double declared, double computed) {
  return std::abs(declared - computed) > 0.01 * std::abs(computed);
}

std::string trace_context(const std::string& dataset, const std::optional<std::string>& label) {
  return label ? dataset + " (" + *label + ")" : dataset;
}

}  // namespace

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

SubmissionBundle bundle_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "submission must be a JSON object");
  SubmissionBundle b;
  if (j.contains("spec") && !j.at("spec").is_null()) {
    b.spec_text = j.at("spec").is_string() ? j.at("spec").get<std::string>() : j.at("spec").dump();
  }
  if (j.contains("traces")) {
    for (const auto& t : j.at("traces")) {
      TraceUpload up;
      up.dataset_id = require(t, "dataset_id", "trace entry").get<std::string>();
      up.text = require(t, "text", "trace entry").get<std::string>();
      if (t.contains("label")) up.label = t.at("label").get<std::string>();
      b.traces.push_back(std::move(up));
    }
  }
  if (j.contains("metadata")) b.metadata = metadata_from_json(j.at("metadata"));
  if (j.contains("paper_entry") && !j.at("paper_entry").is_null()) {
    const auto& p = j.at("paper_entry");
    PaperPayload paper;
    paper.points = points_from_json(require(p, "points", "paper_entry"));
    paper.params = require(p, "params", "paper_entry").get<std::int64_t>();
    b.paper = std::move(paper);
  }
  return b;
}

CanonicalSubmission canonicalize(const SubmissionBundle& bundle) {
  json j;
  j["convention_version"] = std::string(FlopsConvention::kConventionVersion);
  std::optional<ModelSpec> spec;
  if (bundle.spec_text) spec = parse_model_spec(*bundle.spec_text);

  if (bundle.paper) {
    if (!bundle.traces.empty()) {
      throw Error(ErrorCode::kSchema, "a paper entry cannot also carry trace files");
    }
    if (bundle.paper->params <= 0) throw ValidationError("params", "must be positive");
    if (bundle.paper->points.empty()) throw Error(ErrorCode::kEmptySubmission, "empty submission: no points");
    json points = json::object();
    for (const auto& [id, list] : bundle.paper->points) {
      if (list.empty()) throw Error(ErrorCode::kEmptySubmission, "no points for '" + id + "'");
      auto sorted = list;
      std::sort(sorted.begin(), sorted.end(), [](const PerfPoint& a, const PerfPoint& b) {
        return std::tie(a.flops, a.perf) < std::tie(b.flops, b.perf);
      });
      for (const auto& p : sorted) {
        if (!(p.flops > 0.0) || !std::isfinite(p.flops) || !std::isfinite(p.perf)) {
          throw ValidationError("points", "FLOPs must be positive and values finite");
        }
        points[id].push_back({p.flops, p.perf});
      }
    }
    j["kind"] = "paper";
    j["params"] = bundle.paper->params;
    j["points"] = std::move(points);
    if (spec) j["spec"] = to_json(*spec);
  } else {
    if (!spec) throw Error(ErrorCode::kSchema, "submission is missing the model spec");
    if (bundle.traces.empty()) throw Error(ErrorCode::kEmptySubmission, "empty submission: no trace files");
    std::vector<std::tuple<std::string, std::string, std::string>> traces;
    for (const auto& up : bundle.traces) {
      SubmissionFile file;
      try {
        file = parse_trace_file(up.text, up.dataset_id, up.label);
      } catch (const ParseError& e) {
        throw ParseError(e.line(), e.column(), trace_context(up.dataset_id, up.label) + ": " + e.what());
      }
      traces.emplace_back(up.dataset_id, up.label.value_or(""), serialize_trace(file));
    }
    std::sort(traces.begin(), traces.end());
    json arr = json::array();
    for (const auto& [dataset, label, text] : traces) {
      json t{{"dataset_id", dataset}, {"text", text}};
      if (!label.empty()) t["label"] = label;
      arr.push_back(std::move(t));
    }
    j["kind"] = "traces";
    j["spec"] = to_json(*spec);
    j["traces"] = std::move(arr);
  }
  const std::string name = !bundle.metadata.model_name.empty() ? bundle.metadata.model_name
                           : spec                              ? spec->model_name
                                                               : std::string();
  j["metadata"] = metadata_json(bundle.metadata, name);

  CanonicalSubmission out;
  out.bytes = j.dump();
  out.id = sha256_hex(out.bytes);
  out.json = std::move(j);
  return out;
}

SubmissionRecord evaluate_canonical(const json& canonical, const EvaluationData& data) {
  SubmissionRecord r;
  const auto meta = metadata_from_json(canonical.value("metadata", json()));
  r.submitter = meta.submitter;
  r.model_name = meta.model_name;
  if (canonical.contains("spec")) r.spec = model_spec_from_json(canonical.at("spec"));

  const auto kind = require(canonical, "kind", "submission").get<std::string>();
  if (kind == "paper") {
    r.source = std::string(kSourceReported);
    r.scored = evaluate_points(points_from_json(canonical.at("points")),
                               canonical.at("params").get<std::int64_t>(), data);
    if (r.spec) r.params = count_params(*r.spec);
    r.flags.push_back(std::string(kSourceReported));
  } else if (kind == "traces") {
    r.source = std::string(kSourceVerified);
    std::vector<SubmissionFile> files;
    for (const auto& t : canonical.at("traces")) {
      std::optional<std::string> label;
      if (t.contains("label")) label = t.at("label").get<std::string>();
      files.push_back(parse_trace_file(t.at("text").get<std::string>(),
                                       t.at("dataset_id").get<std::string>(), label));
    }
    auto ev = evaluate_traces(*r.spec, files, data);
    r.files = std::move(ev.files);
    r.scored = std::move(ev.scored);
    r.params = count_params(*r.spec);
  } else {
    throw Error(ErrorCode::kSchema, "unknown submission kind '" + kind + "'");
  }
  r.flags.insert(r.flags.end(), r.scored.flags.begin(), r.scored.flags.end());

  if (meta.declared_params && disagrees(static_cast<double>(*meta.declared_params),
                                        static_cast<double>(r.scored.params))) {
    r.flags.push_back("declared_params_mismatch:declared=" + std::to_string(*meta.declared_params) +
                      ",computed=" + std::to_string(r.scored.params));
  }
  for (const auto& [id, declared] : meta.declared_flops) {
    const auto it = r.scored.datasets.find(id);
    if (it == r.scored.datasets.end()) continue;
    double sum = 0.0;
    for (const auto& p : it->second.points) sum += p.flops;
    const double computed = sum / static_cast<double>(it->second.points.size());
    if (disagrees(declared, computed)) r.flags.push_back("declared_flops_mismatch:" + id);
  }
  return r;
}

json to_json(const SubmissionRecord& r) {
  json j{{"id", r.id},
         {"submitter", r.submitter},
         {"model_name", r.model_name},
         {"source", r.source},
         {"submitted_at_ms", r.submitted_at_ms},
         {"convention_version", std::string(FlopsConvention::kConventionVersion)},
         {"flags", r.flags},
         {"scored", to_json(r.scored)}};
  if (r.params) {
    j["param_count"] = {{"backbone", r.params->backbone},
                        {"exit_heads", r.params->exit_heads},
                        {"total", r.params->total()}};
  }
  json files = json::array();
  for (const auto& f : r.files) files.push_back(to_json(f));
  j["files"] = std::move(files);
  return j;
}

json to_json(const LeaderboardEntry& e) {
  return {{"rank", e.rank ? json(*e.rank) : json()},
          {"id", e.id},
          {"model_name", e.model_name},
          {"submitter", e.submitter},
          {"source", e.source},
          {"overall", optional_json(e.overall)},
          {"average_perf", optional_json(e.average_perf)},
          {"dataset_scores", e.dataset_scores},
          {"params", e.params},
          {"track", e.track ? json(std::string(track_name(*e.track))) : json()},
          {"submitted_at_ms", e.submitted_at_ms}};
}

json leaderboard_json(const std::vector<LeaderboardEntry>& board, std::optional<Track> track) {
  json entries = json::array();
  for (const auto& e : board) entries.push_back(to_json(e));
  return {{"track", track ? json(std::string(track_name(*track))) : json()}, {"entries", std::move(entries)}};
}

std::string render_leaderboard(const std::vector<LeaderboardEntry>& board, std::optional<Track> track) {
  char line[256];
  std::string out = track ? "Track " + std::string(track_name(*track)) + " (average performance)\n"
                          : std::string("ELUE leaderboard (overall score)\n");
  std::snprintf(line, sizeof line, "%-5s %-24s %-16s %-9s %10s %10s %8s %-6s", "rank", "model", "submitter",
                "source", "score", "avg_perf", "params_M", "track");
  out += line;
  const auto ids = benchmark_dataset_ids();
  for (const auto& id : ids) {
    std::snprintf(line, sizeof line, " %8s", id.c_str());
    out += line;
  }
  out += "\n";
  auto num = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  for (const auto& e : board) {
    std::snprintf(line, sizeof line, "%-5s %-24s %-16s %-9s %10s %10s %8.1f %-6s\n",
                  e.rank ? std::to_string(*e.rank).c_str() : "-", e.model_name.substr(0, 24).c_str(),
                  e.submitter.substr(0, 16).c_str(), e.source.c_str(), num(e.overall).c_str(),
                  num(e.average_perf).c_str(), static_cast<double>(e.params) / 1e6,
                  e.track ? std::string(track_name(*e.track)).c_str() : "-");
    out.append(line, std::strlen(line) - 1);
    for (const auto& id : ids) {
      const auto it = e.dataset_scores.find(id);
      std::snprintf(line, sizeof line, " %8s",
                    it == e.dataset_scores.end() ? "-" : num(it->second).c_str());
      out += line;
    }
    out += "\n";
  }
  return out;
}

std::vector<LeaderboardEntry> rank_records(const std::vector<SubmissionRecord>& records,
                                           std::optional<Track> track) {
  std::vector<LeaderboardEntry> ranked, unranked;
  for (const auto& r : records) {
    if (track && r.scored.track != track) continue;
    LeaderboardEntry e;
    e.id = r.id;
    e.model_name = r.model_name;
    e.submitter = r.submitter;
    e.source = r.source;
    e.overall = r.scored.overall;
    e.average_perf = r.scored.average_perf;
    for (const auto& [id, d] : r.scored.datasets) e.dataset_scores[id] = d.score;
    e.params = r.scored.params;
    e.track = r.scored.track;
    e.submitted_at_ms = r.submitted_at_ms;
    (r.scored.partial() ? unranked : ranked).push_back(std::move(e));
  }
  auto key = [&](const LeaderboardEntry& e) { return track ? *e.average_perf : *e.overall; };
  std::sort(ranked.begin(), ranked.end(), [&](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    if (a.submitted_at_ms != b.submitted_at_ms) return a.submitted_at_ms < b.submitted_at_ms;
    return a.id < b.id;
  });
  std::sort(unranked.begin(), unranked.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    return std::tie(a.submitted_at_ms, a.id) < std::tie(b.submitted_at_ms, b.id);
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  ranked.insert(ranked.end(), unranked.begin(), unranked.end());
  return ranked;
}

Service::Service(std::filesystem::path store_dir, EvaluationData data, Clock clock)
    : store_(std::move(store_dir)), data_(std::move(data)), clock_(clock ? std::move(clock) : system_clock_ms) {
  for (const auto& stored : store_.load_all()) {
    SubmissionRecord r;
    try {
      r = evaluate_canonical(json::parse(stored.bytes), data_);
    } catch (const Error& e) {
      throw Error(e.code(), "stored record " + stored.id + ": " + e.what());
    }
    r.id = stored.id;
    r.submitted_at_ms = stored.submitted_at_ms;
    records_.push_back(std::move(r));
  }
  write_index_locked();
}

Service::SubmitResult Service::submit(const SubmissionBundle& bundle) {
  const auto canonical = canonicalize(bundle);
  {
    std::shared_lock lock(mutex_);
    for (const auto& r : records_) {
      if (r.id == canonical.id) return {r, false};
    }
  }
  auto record = evaluate_canonical(canonical.json, data_);
  record.id = canonical.id;

  std::unique_lock lock(mutex_);
  for (const auto& r : records_) {
    if (r.id == canonical.id) return {r, false};
  }
  record.submitted_at_ms = clock_();
  store_.append({canonical.id, canonical.bytes, record.submitted_at_ms});
  records_.push_back(record);
  write_index_locked();
  return {std::move(record), true};
}

std::optional<SubmissionRecord> Service::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  for (const auto& r : records_) {
    if (r.id == id) return r;
  }
  return std::nullopt;
}

std::vector<LeaderboardEntry> Service::leaderboard(std::optional<Track> track) const {
  std::shared_lock lock(mutex_);
  return rank_records(records_, track);
}

std::vector<LeaderboardEntry> Service::leaderboard(std::string_view track) const {
  if (track.empty()) return leaderboard(std::optional<Track>{});
  const auto t = parse_track(track);
  if (!t) throw Error(ErrorCode::kNotFound, "unknown track '" + std::string(track) + "'");
  return leaderboard(t);
}

json Service::datasets_json() const {
  json out = json::array();
  for (const auto& d : benchmark_datasets()) {
    const std::string id(d.id);
    out.push_back({{"id", id},
                   {"name", std::string(d.display_name)},
                   {"task_kind", std::string(task_kind_name(d.task_kind))},
                   {"metric_kind", std::string(metric_kind_name(d.metric_kind))},
                   {"num_labels", d.num_labels},
                   {"test_size", d.test_size},
                   {"has_gold", data_.golds.count(id) > 0},
                   {"has_curve", data_.curves.count(id) > 0}});
  }
  return out;
}

std::size_t Service::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

void Service::write_index_locked() const {
  json rows = json::array();
  for (const auto& r : records_) {
    rows.push_back({{"id", r.id},
                    {"submitted_at_ms", r.submitted_at_ms},
                    {"model_name", r.model_name},
                    {"source", r.source},
                    {"overall", optional_json(r.scored.overall)},
                    {"average_perf", optional_json(r.scored.average_perf)},
                    {"params", r.scored.params},
                    {"track", r.scored.track ? json(std::string(track_name(*r.scored.track))) : json()}});
  }
  store_.write_index({{"convention_version", std::string(FlopsConvention::kConventionVersion)},
                      {"records", std::move(rows)}});
}

}  // namespace elue
