#include "elue/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>

#include "elue/error.hpp"

namespace elue {

namespace {

// Distributions built directly on the engine's output so runs are identical
// across standard libraries (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    probs.row(r) = (logits.row(r).array() - mx).exp();
    probs.row(r) /= probs.row(r).sum();
  }
  return probs;
}

void check_golds(const ForwardCache& cache, std::span<const std::int64_t> golds) {
  if (cache.logits.empty()) throw Error(ErrorCode::kInvalidArgument, "empty forward cache");
  if (static_cast<std::size_t>(cache.logits[0].rows()) != golds.size()) {
    throw Error(ErrorCode::kLengthMismatch, "cache holds " + std::to_string(cache.logits[0].rows()) +
                                                " samples but " + std::to_string(golds.size()) +
                                                " labels were given");
  }
  const auto labels = cache.logits[0].cols();
  for (auto y : golds) {
    if (y < 0 || y >= labels) throw Error(ErrorCode::kInvalidLabel, "label out of range");
  }
}

Matrix rows_of(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

void apply_update(MultiExitNet& net, const Gradients& grads, const ExitObjective& objective, double lr) {
  if (!objective.freeze_backbone) {
    for (std::size_t l = 0; l < net.blocks.size(); ++l) {
      net.blocks[l].weight -= lr * grads.blocks[l].weight;
      net.blocks[l].bias -= lr * grads.blocks[l].bias;
    }
  }
  for (std::size_t l = 0; l < net.heads.size(); ++l) {
    if (objective.weights[l] == 0.0) continue;
    net.heads[l].weight -= lr * grads.heads[l].weight;
    net.heads[l].bias -= lr * grads.heads[l].bias;
  }
}

nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw Error(ErrorCode::kSchema, "ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace

Gradients zero_gradients(const MultiExitNet& net) {
  Gradients g;
  for (const auto& b : net.blocks) {
    g.blocks.push_back({Matrix::Zero(b.weight.rows(), b.weight.cols()), Vector::Zero(b.bias.size())});
  }
  for (const auto& h : net.heads) {
    g.heads.push_back({Matrix::Zero(h.weight.rows(), h.weight.cols()), Vector::Zero(h.bias.size())});
  }
  return g;
}

MultiExitNet init_network(std::int64_t num_layers, std::int64_t width, std::int64_t num_labels,
                          std::uint64_t seed) {
  if (num_layers < 1) throw ValidationError("num_layers", "must be at least 1");
  if (width < 1) throw ValidationError("width", "must be at least 1");
  if (num_labels < 1) throw ValidationError("num_labels", "must be at least 1");
  Rng rng(seed);
  const double scale = std::sqrt(3.0 / static_cast<double>(width));
  const auto fill = [&](Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
  };
  MultiExitNet net;
  for (std::int64_t l = 0; l < num_layers; ++l) {
    Block b{Matrix(width, width), Vector::Zero(width)};
    fill(b.weight);
    net.blocks.push_back(std::move(b));
  }
  for (std::int64_t l = 0; l < num_layers; ++l) {
    Head h{Matrix(num_labels, width), Vector::Zero(num_labels)};
    fill(h.weight);
    net.heads.push_back(std::move(h));
  }
  return net;
}

ForwardCache forward_all_exits(const MultiExitNet& net, const Matrix& batch) {
  if (batch.cols() != net.width()) {
    throw Error(ErrorCode::kShape, "batch width " + std::to_string(batch.cols()) +
                                       " does not match network width " + std::to_string(net.width()));
  }
  ForwardCache cache;
  cache.activations.reserve(net.blocks.size() + 1);
  cache.activations.push_back(batch);
  for (std::size_t l = 0; l < net.blocks.size(); ++l) {
    const auto& b = net.blocks[l];
    Matrix pre = cache.activations.back() * b.weight.transpose();
    pre.rowwise() += b.bias.transpose();
    cache.activations.push_back(pre.array().tanh().matrix());
    const auto& h = net.heads[l];
    Matrix logits = cache.activations.back() * h.weight.transpose();
    logits.rowwise() += h.bias.transpose();
    cache.logits.push_back(std::move(logits));
  }
  return cache;
}

std::vector<double> exit_losses(const ForwardCache& cache, std::span<const std::int64_t> golds) {
  check_golds(cache, golds);
  std::vector<double> losses;
  for (const auto& logits : cache.logits) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const double mx = logits.row(r).maxCoeff();
      const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
      total += lse - logits(r, golds[static_cast<std::size_t>(r)]);
    }
    losses.push_back(total / static_cast<double>(logits.rows()));
  }
  return losses;
}

std::string strategy_name(const TrainStrategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SumStrategy>) return "sum";
        else if constexpr (std::is_same_v<S, EquilibriumStrategy>) return "ge";
        else if constexpr (std::is_same_v<S, WeightedStrategy>) return "weighted";
        else if constexpr (std::is_same_v<S, GroupedStrategy>) return "grouped";
        else return "two_stage";
      },
      strategy);
}

void validate(const TrainStrategy& strategy, std::int64_t num_layers) {
  if (const auto* grouped = std::get_if<GroupedStrategy>(&strategy)) {
    if (grouped->groups.empty()) throw ValidationError("groups", "at least one group required");
    std::set<std::int64_t> covered;
    for (const auto& group : grouped->groups) {
      if (std::find(group.begin(), group.end(), num_layers) == group.end()) {
        throw ValidationError("groups", "every group must contain the top exit " + std::to_string(num_layers));
      }
      for (auto exit : group) {
        if (exit < 1 || exit > num_layers) {
          throw ValidationError("groups", "exit " + std::to_string(exit) + " outside 1.." +
                                              std::to_string(num_layers));
        }
        covered.insert(exit);
      }
    }
    if (static_cast<std::int64_t>(covered.size()) != num_layers) {
      throw ValidationError("groups", "groups must jointly cover every exit");
    }
  } else if (const auto* two = std::get_if<TwoStageStrategy>(&strategy)) {
    if (two->stage1_epochs < 0 || two->stage2_epochs < 0) {
      throw ValidationError("stage_epochs", "epoch counts must be non-negative");
    }
  }
}

std::vector<std::vector<std::int64_t>> interleaved_groups(std::int64_t num_layers, std::int64_t num_groups) {
  if (num_groups < 1 || num_groups > num_layers) {
    throw ValidationError("groups", "group count must lie in 1..num_layers");
  }
  std::vector<std::vector<std::int64_t>> groups(static_cast<std::size_t>(num_groups));
  for (std::int64_t g = 1; g <= num_groups; ++g) {
    auto& group = groups[static_cast<std::size_t>(g - 1)];
    for (std::int64_t exit = g; exit < num_layers; exit += num_groups) group.push_back(exit);
    group.push_back(num_layers);
  }
  return groups;
}

const std::vector<std::int64_t>& group_schedule(std::span<const std::vector<std::int64_t>> groups,
                                                std::size_t step) {
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "no groups to schedule");
  return groups[step % groups.size()];
}

ExitObjective resolve_objective(const TrainStrategy& strategy, std::int64_t num_layers,
                                std::size_t step, int stage) {
  validate(strategy, num_layers);
  const auto L = static_cast<std::size_t>(num_layers);
  ExitObjective obj;
  obj.weights.assign(L, 0.0);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SumStrategy>) {
          std::fill(obj.weights.begin(), obj.weights.end(), 1.0);
        } else if constexpr (std::is_same_v<S, EquilibriumStrategy>) {
          std::fill(obj.weights.begin(), obj.weights.end(), 1.0);
          obj.equilibrium = true;
        } else if constexpr (std::is_same_v<S, WeightedStrategy>) {
          const double total = static_cast<double>(L * (L + 1) / 2);
          for (std::size_t l = 0; l < L; ++l) obj.weights[l] = static_cast<double>(l + 1) / total;
        } else if constexpr (std::is_same_v<S, GroupedStrategy>) {
          for (auto exit : group_schedule(s.groups, step)) obj.weights[static_cast<std::size_t>(exit - 1)] = 1.0;
          obj.equilibrium = s.equilibrium;
        } else {
          if (stage == 1) {
            obj.weights[L - 1] = 1.0;
          } else if (stage == 2) {
            for (std::size_t l = 0; l + 1 < L; ++l) obj.weights[l] = 1.0;
            obj.freeze_backbone = true;
          } else {
            throw Error(ErrorCode::kInvalidArgument, "two-stage training has stages 1 and 2");
          }
        }
      },
      strategy);
  return obj;
}

double objective_value(std::span<const double> losses, const ExitObjective& objective) {
  if (losses.size() != objective.weights.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one loss per exit required");
  }
  double value = 0.0;
  for (std::size_t l = 0; l < losses.size(); ++l) value += objective.weights[l] * losses[l];
  return value;
}

Gradients backward(const MultiExitNet& net, const ForwardCache& cache,
                   std::span<const std::int64_t> golds, const ExitObjective& objective) {
  check_golds(cache, golds);
  const auto L = net.blocks.size();
  if (cache.logits.size() != L || cache.activations.size() != L + 1 || objective.weights.size() != L) {
    throw Error(ErrorCode::kLengthMismatch, "cache or objective does not match the network depth");
  }
  const auto n = cache.logits[0].rows();
  Gradients grads = zero_gradients(net);

  // active_at_or_above[l] = number of contributing exits j >= l+1.
  std::vector<double> active_at_or_above(L + 1, 0.0);
  for (std::size_t l = L; l-- > 0;) {
    active_at_or_above[l] = active_at_or_above[l + 1] + (objective.weights[l] != 0.0 ? 1.0 : 0.0);
  }

  // upstream = d(objective)/d(h_l), accumulated from every exit above l.
  Matrix upstream = Matrix::Zero(n, net.width());
  for (std::size_t l = L; l-- > 0;) {
    const double w = objective.weights[l];
    if (w != 0.0) {
      Matrix dz = softmax_rows(cache.logits[l]);
      for (Eigen::Index r = 0; r < n; ++r) dz(r, golds[static_cast<std::size_t>(r)]) -= 1.0;
      dz *= w / static_cast<double>(n);
      grads.heads[l].weight = dz.transpose() * cache.activations[l + 1];
      grads.heads[l].bias = dz.colwise().sum().transpose();
      upstream += dz * net.heads[l].weight;
    }
    if (objective.freeze_backbone) continue;
    const auto& h = cache.activations[l + 1];
    const Matrix da = (upstream.array() * (1.0 - h.array().square())).matrix();
    double scale = 1.0;
    if (objective.equilibrium && active_at_or_above[l] > 0.0) scale = 1.0 / active_at_or_above[l];
    grads.blocks[l].weight = scale * (da.transpose() * cache.activations[l]);
    grads.blocks[l].bias = scale * da.colwise().sum().transpose();
    upstream = da * net.blocks[l].weight;
  }
  return grads;
}

Gradients backward(const MultiExitNet& net, const ForwardCache& cache,
                   std::span<const std::int64_t> golds, const TrainStrategy& strategy,
                   std::size_t step, int stage) {
  return backward(net, cache, golds, resolve_objective(strategy, net.num_layers(), step, stage));
}

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& config) {
  if (config.samples < 2) throw ValidationError("samples", "need at least 2 samples");
  if (config.width < 1) throw ValidationError("width", "must be positive");
  if (config.num_labels < 1) throw ValidationError("num_labels", "must be positive");
  if (!(config.test_fraction >= 0.0 && config.test_fraction < 1.0)) {
    throw ValidationError("test_fraction", "must lie in [0, 1)");
  }
  Rng rng(config.seed);
  const auto d = config.width;
  Matrix centres(config.num_labels, d);
  for (Eigen::Index c = 0; c < centres.rows(); ++c) {
    for (Eigen::Index k = 0; k < d; ++k) centres(c, k) = rng.normal();
    const double norm = centres.row(c).norm();
    centres.row(c) *= norm > 0.0 ? config.separation / norm : 0.0;
  }
  Matrix x(config.samples, d);
  std::vector<std::int64_t> y(static_cast<std::size_t>(config.samples));
  for (Eigen::Index i = 0; i < config.samples; ++i) {
    const auto label = i % config.num_labels;
    y[static_cast<std::size_t>(i)] = label;
    for (Eigen::Index k = 0; k < d; ++k) x(i, k) = centres(label, k) + rng.normal();
  }
  const auto n_test = static_cast<Eigen::Index>(std::floor(config.test_fraction * static_cast<double>(config.samples)));
  const auto n_train = config.samples - n_test;
  SyntheticDataset data;
  data.train_x = x.topRows(n_train);
  data.test_x = x.bottomRows(n_test);
  data.train_y.assign(y.begin(), y.begin() + n_train);
  data.test_y.assign(y.begin() + n_train, y.end());
  return data;
}

std::vector<double> exit_accuracies(const MultiExitNet& net, const Matrix& x,
                                    std::span<const std::int64_t> y) {
  const auto cache = forward_all_exits(net, x);
  std::vector<double> acc;
  for (const auto& logits : cache.logits) {
    std::size_t hits = 0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index best = 0;
      logits.row(r).maxCoeff(&best);
      hits += best == y[static_cast<std::size_t>(r)];
    }
    acc.push_back(logits.rows() ? static_cast<double>(hits) / static_cast<double>(logits.rows()) : 0.0);
  }
  return acc;
}

TrainResult train(MultiExitNet net, const SyntheticDataset& data, const TrainStrategy& strategy,
                  const TrainConfig& config) {
  validate(strategy, net.num_layers());
  if (config.batch_size < 1) throw ValidationError("batch_size", "must be positive");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate", "must be positive");
  if (data.train_x.rows() == 0) throw ValidationError("data", "empty training set");

  struct Phase {
    int stage;
    std::int64_t epochs;
  };
  std::vector<Phase> phases;
  if (const auto* two = std::get_if<TwoStageStrategy>(&strategy)) {
    phases = {{1, two->stage1_epochs}, {2, two->stage2_epochs}};
  } else {
    phases = {{1, config.epochs}};
  }

  TrainResult result;
  Rng rng(config.seed);
  const auto n = static_cast<std::size_t>(data.train_x.rows());
  std::vector<std::size_t> order(n);
  std::int64_t epoch = 0;
  for (const auto& phase : phases) {
    for (std::int64_t e = 0; e < phase.epochs; ++e) {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

      for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
        const auto stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
        const std::span<const std::size_t> rows(order.data() + start, stop - start);
        std::vector<std::int64_t> golds;
        for (auto r : rows) golds.push_back(data.train_y[r]);
        const auto cache = forward_all_exits(net, rows_of(data.train_x, rows));
        const auto objective = resolve_objective(strategy, net.num_layers(), result.steps, phase.stage);
        const auto grads = backward(net, cache, golds, objective);
        apply_update(net, grads, objective, config.learning_rate);
        ++result.steps;
      }

      EpochRecord record;
      record.epoch = ++epoch;
      record.stage = phase.stage;
      const auto cache = forward_all_exits(net, data.train_x);
      record.exit_loss = exit_losses(cache, data.train_y);
      for (std::size_t l = 0; l < record.exit_loss.size(); ++l) {
        if (!std::isfinite(record.exit_loss[l])) {
          throw Error(ErrorCode::kDivergence, "non-finite loss at exit " + std::to_string(l + 1) +
                                                  " after epoch " + std::to_string(record.epoch) +
                                                  "; lower the learning rate");
        }
      }
      record.exit_accuracy = exit_accuracies(net, data.train_x, data.train_y);
      result.history.push_back(std::move(record));
    }
  }
  result.net = std::move(net);
  return result;
}

LogitsFile export_logits(const MultiExitNet& net, const Matrix& features) {
  const auto cache = forward_all_exits(net, features);
  LogitsFile file;
  file.task_kind = TaskKind::kClassification;
  file.num_exits = net.num_layers();
  file.num_labels = net.num_labels();
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    ExitOutputs sample;
    sample.index = r;
    for (const auto& logits : cache.logits) {
      sample.logits.emplace_back(logits.row(r).data(), logits.row(r).data() + logits.cols());
    }
    file.samples.push_back(std::move(sample));
  }
  return file;
}

TrainingJob training_job_from_json(const nlohmann::json& j) {
  TrainingJob job;
  try {
    job.num_layers = j.value("num_layers", job.num_layers);
    job.width = j.value("width", job.width);
    job.num_labels = j.value("num_labels", job.num_labels);
    job.seed = j.value("seed", job.seed);
    job.train.epochs = j.value("epochs", job.train.epochs);
    job.train.learning_rate = j.value("learning_rate", job.train.learning_rate);
    job.train.batch_size = j.value("batch_size", job.train.batch_size);
    job.train.seed = job.seed;

    const auto name = j.value("strategy", std::string("sum"));
    if (name == "sum") {
      job.strategy = SumStrategy{};
    } else if (name == "ge") {
      job.strategy = EquilibriumStrategy{};
    } else if (name == "weighted") {
      job.strategy = WeightedStrategy{};
    } else if (name == "grouped") {
      GroupedStrategy g;
      if (j.contains("groups")) {
        g.groups = j.at("groups").get<std::vector<std::vector<std::int64_t>>>();
      } else {
        g.groups = interleaved_groups(job.num_layers, j.value("num_groups", std::int64_t{2}));
      }
      g.equilibrium = j.value("equilibrium", false);
      job.strategy = std::move(g);
    } else if (name == "two_stage") {
      job.strategy = TwoStageStrategy{j.value("stage1_epochs", job.train.epochs),
                                      j.value("stage2_epochs", job.train.epochs)};
    } else {
      throw ValidationError("strategy", "unknown strategy '" + name + "'");
    }

    job.data.seed = job.seed;
    job.data.width = job.width;
    job.data.num_labels = job.num_labels;
    if (j.contains("data")) {
      const auto& d = j.at("data");
      job.data.samples = d.value("samples", job.data.samples);
      job.data.separation = d.value("separation", job.data.separation);
      job.data.test_fraction = d.value("test_fraction", job.data.test_fraction);
      job.data.seed = d.value("seed", job.data.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("training config: ") + e.what());
  }
  validate(job.strategy, job.num_layers);
  return job;
}

JobOutput run_training_job(const TrainingJob& job) {
  auto data = make_synthetic_dataset(job.data);
  auto result = train(init_network(job.num_layers, job.width, job.num_labels, job.seed), data, job.strategy,
                      job.train);
  return {std::move(data), std::move(result)};
}

nlohmann::json to_json(const TrainingJob& job) {
  nlohmann::json j{{"num_layers", job.num_layers},
                   {"width", job.width},
                   {"num_labels", job.num_labels},
                   {"seed", job.seed},
                   {"strategy", strategy_name(job.strategy)},
                   {"epochs", job.train.epochs},
                   {"learning_rate", job.train.learning_rate},
                   {"batch_size", job.train.batch_size},
                   {"data",
                    {{"samples", job.data.samples},
                     {"separation", job.data.separation},
                     {"test_fraction", job.data.test_fraction},
                     {"seed", job.data.seed}}}};
  if (const auto* g = std::get_if<GroupedStrategy>(&job.strategy)) {
    j["groups"] = g->groups;
    j["equilibrium"] = g->equilibrium;
  } else if (const auto* t = std::get_if<TwoStageStrategy>(&job.strategy)) {
    j["stage1_epochs"] = t->stage1_epochs;
    j["stage2_epochs"] = t->stage2_epochs;
  }
  return j;
}

nlohmann::json to_json(const MultiExitNet& net) {
  nlohmann::json j{{"num_layers", net.num_layers()}, {"width", net.width()}, {"num_labels", net.num_labels()}};
  auto blocks = nlohmann::json::array();
  for (const auto& b : net.blocks) {
    blocks.push_back({{"weight", matrix_json(b.weight)},
                      {"bias", std::vector<double>(b.bias.data(), b.bias.data() + b.bias.size())}});
  }
  auto heads = nlohmann::json::array();
  for (const auto& h : net.heads) {
    heads.push_back({{"weight", matrix_json(h.weight)},
                     {"bias", std::vector<double>(h.bias.data(), h.bias.data() + h.bias.size())}});
  }
  j["blocks"] = std::move(blocks);
  j["heads"] = std::move(heads);
  return j;
}

MultiExitNet network_from_json(const nlohmann::json& j) {
  MultiExitNet net;
  try {
    for (const auto& b : j.at("blocks")) {
      const auto bias = b.at("bias").get<std::vector<double>>();
      net.blocks.push_back({matrix_from_json(b.at("weight")), Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()))});
    }
    for (const auto& h : j.at("heads")) {
      const auto bias = h.at("bias").get<std::vector<double>>();
      net.heads.push_back({matrix_from_json(h.at("weight")), Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("network file: ") + e.what());
  }
  if (net.blocks.empty() || net.blocks.size() != net.heads.size()) {
    throw Error(ErrorCode::kSchema, "network file needs one head per block");
  }
  return net;
}

nlohmann::json to_json(const TrainResult& result) {
  auto history = nlohmann::json::array();
  for (const auto& r : result.history) {
    history.push_back({{"epoch", r.epoch},
                       {"stage", r.stage},
                       {"exit_loss", r.exit_loss},
                       {"exit_accuracy", r.exit_accuracy}});
  }
  return {{"steps", result.steps}, {"history", std::move(history)}};
}

}  // namespace elue
