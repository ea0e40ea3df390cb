#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace elue {

enum class ModuleKind { kEmbedding, kTransformerLayer, kExitClassifier };

std::string_view module_kind_name(ModuleKind kind);
ModuleKind parse_module_kind(std::string_view name);

// One entry of the module catalog. Unset overrides inherit from ModelSpec.
struct ModuleDecl {
  std::string id;
  ModuleKind kind = ModuleKind::kTransformerLayer;
  std::optional<std::int64_t> num_heads;   // TransformerLayer only
  std::optional<std::int64_t> ffn_size;    // TransformerLayer only
  std::optional<std::int64_t> num_labels;  // ExitClassifier only

  bool operator==(const ModuleDecl&) const = default;
};

struct ModelSpec {
  std::string model_name;
  std::int64_t hidden_size = 0;
  std::int64_t num_layers = 0;
  std::int64_t num_heads = 0;
  std::int64_t ffn_size = 0;
  std::int64_t vocab_size = 0;
  std::int64_t max_positions = 0;
  std::int64_t num_segment_types = 0;
  std::int64_t num_labels = 0;
  std::vector<ModuleDecl> modules;

  const ModuleDecl* find(std::string_view id) const;

  std::int64_t heads_of(const ModuleDecl& decl) const { return decl.num_heads.value_or(num_heads); }
  std::int64_t ffn_of(const ModuleDecl& decl) const { return decl.ffn_size.value_or(ffn_size); }
  std::int64_t labels_of(const ModuleDecl& decl) const { return decl.num_labels.value_or(num_labels); }

  bool operator==(const ModelSpec&) const = default;
};

// "emb", "layer_1".."layer_L", "exit_1".."exit_L".
std::vector<ModuleDecl> default_catalog(std::int64_t num_layers);

std::string layer_id(std::int64_t layer);
std::string exit_id(std::int64_t layer);

// Builds a spec with the default catalog and validates it.
ModelSpec make_model_spec(std::string name, std::int64_t hidden_size, std::int64_t num_layers,
                          std::int64_t num_heads, std::int64_t ffn_size, std::int64_t vocab_size,
                          std::int64_t max_positions, std::int64_t num_segment_types,
                          std::int64_t num_labels);

// Throws ValidationError naming the first offending field.
void validate(const ModelSpec& spec);

ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec load_model_spec(const std::filesystem::path& path);
ModelSpec parse_model_spec(std::string_view text);

}  // namespace elue
