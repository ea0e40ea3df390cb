#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "elue/cost_model.hpp"
#include "elue/evaluate.hpp"
#include "elue/scoring.hpp"
#include "elue/store.hpp"

namespace elue {

struct SubmissionMetadata {
  std::string submitter;
  std::string model_name;  // defaults to the spec's model_name
  // Self-evaluated values, compared against the server's numbers.
  std::optional<std::int64_t> declared_params;
  std::map<std::string, double> declared_flops;  // per dataset, mean FLOPs per sample
};

struct TraceUpload {
  std::string dataset_id;
  std::string text;
  std::optional<std::string> label;
};

// Points and params taken from a paper, without traces.
struct PaperPayload {
  std::map<std::string, std::vector<PerfPoint>> points;
  std::int64_t params = 0;
};

struct SubmissionBundle {
  std::optional<std::string> spec_text;
  std::vector<TraceUpload> traces;
  SubmissionMetadata metadata;
  std::optional<PaperPayload> paper;
};

SubmissionBundle bundle_from_json(const nlohmann::json& j);

// Canonical JSON for a bundle: parsed, validated and re-serialized so that
// equivalent uploads produce identical bytes.
struct CanonicalSubmission {
  nlohmann::json json;
  std::string bytes;
  std::string id;
};

CanonicalSubmission canonicalize(const SubmissionBundle& bundle);

inline constexpr std::string_view kSourceVerified = "verified";
inline constexpr std::string_view kSourceReported = "reported";

struct SubmissionRecord {
  std::string id;
  std::string submitter;
  std::string model_name;
  std::string source;
  std::optional<ModelSpec> spec;
  std::optional<ParamCount> params;
  std::vector<FileEvaluation> files;
  ScoredSubmission scored;
  std::int64_t submitted_at_ms = 0;
  std::vector<std::string> flags;  // scoring flags plus provenance and declared-value checks
};

// Recomputes a record from canonical bytes.
SubmissionRecord evaluate_canonical(const nlohmann::json& canonical, const EvaluationData& data);

nlohmann::json to_json(const SubmissionRecord& record);

struct LeaderboardEntry {
  std::optional<std::size_t> rank;  // absent for partial submissions
  std::string id;
  std::string model_name;
  std::string submitter;
  std::string source;
  std::optional<double> overall;
  std::optional<double> average_perf;
  std::map<std::string, double> dataset_scores;
  std::int64_t params = 0;
  std::optional<Track> track;
  std::int64_t submitted_at_ms = 0;
};

nlohmann::json to_json(const LeaderboardEntry& entry);
nlohmann::json leaderboard_json(const std::vector<LeaderboardEntry>& board, std::optional<Track> track);
std::string render_leaderboard(const std::vector<LeaderboardEntry>& board, std::optional<Track> track);

// Main board when `track` is empty: ranked by overall score. Track boards keep
// records assigned to that track, ranked by average performance. Ties fall back
// to submission time then id; partial submissions follow, unranked.
std::vector<LeaderboardEntry> rank_records(const std::vector<SubmissionRecord>& records,
                                           std::optional<Track> track);

class Service {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds since the epoch

  Service(std::filesystem::path store_dir, EvaluationData data, Clock clock = {});

  struct SubmitResult {
    SubmissionRecord record;
    bool created = false;
  };

  SubmitResult submit(const SubmissionBundle& bundle);
  std::optional<SubmissionRecord> get(const std::string& id) const;
  std::vector<LeaderboardEntry> leaderboard(std::optional<Track> track = {}) const;
  // Throws kNotFound on an unknown track name; empty selects the main board.
  std::vector<LeaderboardEntry> leaderboard(std::string_view track) const;
  nlohmann::json datasets_json() const;
  std::size_t size() const;

  const EvaluationData& data() const { return data_; }

 private:
  void write_index_locked() const;

  RecordStore store_;
  EvaluationData data_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::vector<SubmissionRecord> records_;  // submission order
};

std::int64_t system_clock_ms();

}  // namespace elue
