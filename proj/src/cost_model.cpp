#include "elue/cost_model.hpp"

#include "elue/error.hpp"

namespace elue {

namespace {

using C = FlopsConvention;

std::int64_t embedding_params(const ModelSpec& s) {
  return (s.vocab_size + s.max_positions + s.num_segment_types) * s.hidden_size + 2 * s.hidden_size;
}

std::int64_t layer_params(std::int64_t d, std::int64_t ffn) {
  const std::int64_t attention = 4 * (d * d + d);
  const std::int64_t feed_forward = (d * ffn + ffn) + (ffn * d + d);
  const std::int64_t layer_norms = 2 * (2 * d);
  return attention + feed_forward + layer_norms;
}

[[noreturn]] void shape_error(const ModuleDecl& decl, const Shape& shape, const std::string& why) {
  throw Error(ErrorCode::kShape, "module '" + decl.id + "' (" +
                                     std::string(module_kind_name(decl.kind)) + ") given input " +
                                     to_string(shape) + ": " + why);
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(shape.dims[i]);
  }
  return out + ")";
}

ParamCount count_params(const ModelSpec& spec) {
  validate(spec);
  ParamCount count;
  for (const auto& decl : spec.modules) {
    switch (decl.kind) {
      case ModuleKind::kEmbedding:
        count.backbone += embedding_params(spec);
        break;
      case ModuleKind::kTransformerLayer:
        count.backbone += layer_params(spec.hidden_size, spec.ffn_of(decl));
        break;
      case ModuleKind::kExitClassifier: {
        const auto labels = spec.labels_of(decl);
        count.exit_heads += spec.hidden_size * labels + labels;
        break;
      }
    }
  }
  return count;
}

Flops embedding_flops(std::int64_t n, std::int64_t d) {
  // word + position + segment: two adds per element. Lookups are free.
  return 2 * C::kAdd * n * d + C::layer_norm(n, d);
}

Flops attention_flops(std::int64_t n, std::int64_t d, std::int64_t h) {
  const Flops projections = 4 * C::matmul(n, d, d);   // Q, K, V, output
  const Flops scores = C::matmul(n, d, n);            // summed over heads
  const Flops scaling = C::kMultiply * h * n * n;
  const Flops softmax = h * n * C::softmax_row(n);
  const Flops context = C::matmul(n, n, d);
  return projections + scores + scaling + softmax + context;
}

Flops feed_forward_flops(std::int64_t n, std::int64_t d, std::int64_t ffn) {
  return C::matmul(n, d, ffn) + C::kGelu * n * ffn + C::matmul(n, ffn, d);
}

Flops transformer_layer_flops(std::int64_t n, std::int64_t d, std::int64_t h, std::int64_t ffn) {
  const Flops residuals = 2 * C::kAdd * n * d;
  return attention_flops(n, d, h) + feed_forward_flops(n, d, ffn) + 2 * C::layer_norm(n, d) +
         residuals;
}

Flops exit_classifier_flops(std::int64_t d, std::int64_t labels) {
  return C::matmul(1, d, labels);
}

Flops module_flops(const ModuleDecl& decl, const Shape& shape, const ModelSpec& spec) {
  for (auto dim : shape.dims) {
    if (dim <= 0) shape_error(decl, shape, "dimensions must be positive");
  }
  const auto d = spec.hidden_size;
  switch (decl.kind) {
    case ModuleKind::kEmbedding:
      if (shape.arity() != 1) shape_error(decl, shape, "expected shape (n)");
      if (shape.dims[0] > spec.max_positions) {
        shape_error(decl, shape, "sequence longer than max_positions " +
                                     std::to_string(spec.max_positions));
      }
      return embedding_flops(shape.dims[0], d);
    case ModuleKind::kTransformerLayer:
      if (shape.arity() != 2) shape_error(decl, shape, "expected shape (n," + std::to_string(d) + ")");
      if (shape.dims[1] != d) {
        shape_error(decl, shape, "hidden dimension must equal " + std::to_string(d));
      }
      return transformer_layer_flops(shape.dims[0], d, spec.heads_of(decl), spec.ffn_of(decl));
    case ModuleKind::kExitClassifier:
      if (shape.arity() != 1) shape_error(decl, shape, "expected shape (" + std::to_string(d) + ")");
      if (shape.dims[0] != d) {
        shape_error(decl, shape, "hidden dimension must equal " + std::to_string(d));
      }
      return exit_classifier_flops(d, spec.labels_of(decl));
  }
  return 0;
}

std::vector<TraceStep> forward_steps(const ModelSpec& spec, std::int64_t seq_len,
                                     std::int64_t exit_layer) {
  if (exit_layer < 1 || exit_layer > spec.num_layers) {
    throw Error(ErrorCode::kOutOfRange, "exit layer " + std::to_string(exit_layer) +
                                            " outside 1.." + std::to_string(spec.num_layers));
  }
  if (seq_len < 1) throw Error(ErrorCode::kOutOfRange, "sequence length must be positive");
  const ModuleDecl* emb = nullptr;
  for (const auto& decl : spec.modules) {
    if (decl.kind == ModuleKind::kEmbedding) emb = &decl;
  }
  if (!emb) throw Error(ErrorCode::kUnknownModule, "spec has no embedding module");
  const auto head = exit_id(exit_layer);
  if (!spec.find(head)) throw Error(ErrorCode::kUnknownModule, "spec has no module '" + head + "'");

  std::vector<TraceStep> steps;
  steps.reserve(static_cast<std::size_t>(exit_layer) + 2);
  steps.push_back({Shape{{seq_len}}, emb->id});
  for (std::int64_t l = 1; l <= exit_layer; ++l) {
    steps.push_back({Shape{{seq_len, spec.hidden_size}}, layer_id(l)});
  }
  steps.push_back({Shape{{spec.hidden_size}}, head});
  return steps;
}

Flops forward_flops(const ModelSpec& spec, std::int64_t seq_len, std::int64_t exit_layer) {
  Flops total = 0;
  for (const auto& step : forward_steps(spec, seq_len, exit_layer)) {
    total += module_flops(*spec.find(step.module_id), step.shape, spec);
  }
  return total;
}

}  // namespace elue
