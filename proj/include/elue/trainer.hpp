#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elue/exitsim.hpp"

namespace elue {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// h_l = tanh(W_l h_{l-1} + b_l); weight is (width x width).
struct Block {
  Matrix weight;
  Vector bias;
};

// logits_l = V_l h_l + c_l; weight is (num_labels x width).
struct Head {
  Matrix weight;
  Vector bias;
};

// Exit l reads the output of block l, so block i is shared by exits i..L.
struct MultiExitNet {
  std::vector<Block> blocks;
  std::vector<Head> heads;

  std::int64_t num_layers() const { return static_cast<std::int64_t>(blocks.size()); }
  std::int64_t width() const { return blocks.empty() ? 0 : blocks[0].weight.cols(); }
  std::int64_t num_labels() const { return heads.empty() ? 0 : heads[0].weight.rows(); }
};

// Same layout as the network, holding d(objective)/d(parameter).
struct Gradients {
  std::vector<Block> blocks;
  std::vector<Head> heads;
};

Gradients zero_gradients(const MultiExitNet& net);

// Weights ~ U(-sqrt(3/width), sqrt(3/width)), biases zero. Deterministic in the seed.
MultiExitNet init_network(std::int64_t num_layers, std::int64_t width, std::int64_t num_labels,
                          std::uint64_t seed);

struct ForwardCache {
  std::vector<Matrix> activations;  // [0] is the input, [l] the output of block l
  std::vector<Matrix> logits;       // [l-1] for exit l
};

ForwardCache forward_all_exits(const MultiExitNet& net, const Matrix& batch);

// Mean cross-entropy of each exit over the batch.
std::vector<double> exit_losses(const ForwardCache& cache, std::span<const std::int64_t> golds);

struct SumStrategy {};
struct EquilibriumStrategy {};
struct WeightedStrategy {};
struct GroupedStrategy {
  std::vector<std::vector<std::int64_t>> groups;  // 1-based exit ids
  bool equilibrium = false;
};
struct TwoStageStrategy {
  std::int64_t stage1_epochs = 1;
  std::int64_t stage2_epochs = 1;
};

using TrainStrategy =
    std::variant<SumStrategy, EquilibriumStrategy, WeightedStrategy, GroupedStrategy, TwoStageStrategy>;

std::string strategy_name(const TrainStrategy& strategy);

// Throws kValidation unless every group contains the top exit and the groups cover 1..L.
void validate(const TrainStrategy& strategy, std::int64_t num_layers);

// Exit g, g+G, g+2G, ... plus the top exit, for g = 1..G.
std::vector<std::vector<std::int64_t>> interleaved_groups(std::int64_t num_layers, std::int64_t num_groups);

// groups[step mod G].
const std::vector<std::int64_t>& group_schedule(std::span<const std::vector<std::int64_t>> groups,
                                                std::size_t step);

// Which exits contribute to one update, with what weight, and how the shared
// blocks treat their contributions.
struct ExitObjective {
  std::vector<double> weights;  // per exit; 0 means inactive
  bool equilibrium = false;     // scale block i by 1/|{active j >= i}|
  bool freeze_backbone = false;
};

// `stage` is 1 or 2 and only matters for TwoStageStrategy.
ExitObjective resolve_objective(const TrainStrategy& strategy, std::int64_t num_layers,
                                std::size_t step = 0, int stage = 1);

double objective_value(std::span<const double> losses, const ExitObjective& objective);

Gradients backward(const MultiExitNet& net, const ForwardCache& cache,
                   std::span<const std::int64_t> golds, const ExitObjective& objective);

Gradients backward(const MultiExitNet& net, const ForwardCache& cache,
                   std::span<const std::int64_t> golds, const TrainStrategy& strategy,
                   std::size_t step = 0, int stage = 1);

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::int64_t samples = 512;
  std::int64_t width = 8;
  std::int64_t num_labels = 2;
  double separation = 4.0;
  double test_fraction = 0.25;
};

// Gaussian clusters with unit variance around random centres at distance
// `separation` from the origin. Labels cycle 0..C-1 so classes stay balanced.
struct SyntheticDataset {
  Matrix train_x;
  std::vector<std::int64_t> train_y;
  Matrix test_x;
  std::vector<std::int64_t> test_y;
};

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& config);

struct TrainConfig {
  std::int64_t epochs = 20;
  double learning_rate = 0.1;
  std::int64_t batch_size = 32;
  std::uint64_t seed = 1;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  int stage = 1;
  std::vector<double> exit_loss;      // full training set, every exit
  std::vector<double> exit_accuracy;  // fraction in [0, 1]
};

struct TrainResult {
  MultiExitNet net;
  std::vector<EpochRecord> history;
  std::size_t steps = 0;
};

// Plain minibatch gradient descent. Throws kDivergence on a non-finite loss.
// TwoStageStrategy takes its epoch counts from the strategy.
TrainResult train(MultiExitNet net, const SyntheticDataset& data, const TrainStrategy& strategy,
                  const TrainConfig& config);

std::vector<double> exit_accuracies(const MultiExitNet& net, const Matrix& x,
                                    std::span<const std::int64_t> y);

LogitsFile export_logits(const MultiExitNet& net, const Matrix& features);

// Config file for the `train` subcommand.
struct TrainingJob {
  std::int64_t num_layers = 4;
  std::int64_t width = 8;
  std::int64_t num_labels = 2;
  std::uint64_t seed = 1;
  TrainStrategy strategy = SumStrategy{};
  TrainConfig train;
  SyntheticConfig data;
};

TrainingJob training_job_from_json(const nlohmann::json& j);

struct JobOutput {
  SyntheticDataset data;
  TrainResult result;
};

// Generates the job's data, initializes from job.seed and trains.
JobOutput run_training_job(const TrainingJob& job);
nlohmann::json to_json(const TrainingJob& job);
nlohmann::json to_json(const MultiExitNet& net);
MultiExitNet network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainResult& result);

}  // namespace elue
