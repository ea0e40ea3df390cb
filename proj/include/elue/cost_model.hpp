#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elue/flops_convention.hpp"
#include "elue/model_spec.hpp"

namespace elue {

// Input shape of one module invocation: (n) or (n, d).
struct Shape {
  std::vector<std::int64_t> dims;

  std::size_t arity() const { return dims.size(); }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

// One executed module and the shape of its input.
struct TraceStep {
  Shape shape;
  std::string module_id;

  bool operator==(const TraceStep&) const = default;
};

struct ParamCount {
  std::int64_t backbone = 0;    // embeddings + transformer layers
  std::int64_t exit_heads = 0;  // all ExitClassifier modules
  std::int64_t total() const { return backbone + exit_heads; }
};

ParamCount count_params(const ModelSpec& spec);

// Closed forms, exposed for testing against the scalar-op oracle.
Flops embedding_flops(std::int64_t seq_len, std::int64_t hidden);
Flops attention_flops(std::int64_t seq_len, std::int64_t hidden, std::int64_t heads);
Flops feed_forward_flops(std::int64_t seq_len, std::int64_t hidden, std::int64_t ffn);
Flops transformer_layer_flops(std::int64_t seq_len, std::int64_t hidden, std::int64_t heads,
                              std::int64_t ffn);
Flops exit_classifier_flops(std::int64_t hidden, std::int64_t labels);

// Cost of one invocation. Throws kShape on arity or hidden-size mismatch.
Flops module_flops(const ModuleDecl& decl, const Shape& input_shape, const ModelSpec& spec);

// The module invocations of a forward pass that leaves at `exit_layer`:
// emb, layer_1..layer_{exit_layer}, exit_{exit_layer}.
std::vector<TraceStep> forward_steps(const ModelSpec& spec, std::int64_t seq_len,
                                     std::int64_t exit_layer);

Flops forward_flops(const ModelSpec& spec, std::int64_t seq_len, std::int64_t exit_layer);

}  // namespace elue
