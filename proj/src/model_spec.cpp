#include "elue/model_spec.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "elue/error.hpp"

namespace elue {

namespace {

// Returns k for ids of the form "<prefix>k" with k a positive decimal, else 0.
std::int64_t numbered_suffix(std::string_view id, std::string_view prefix) {
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return 0;
  std::int64_t value = 0;
  for (char c : id.substr(prefix.size())) {
    if (c < '0' || c > '9') return 0;
    value = value * 10 + (c - '0');
    if (value > 1'000'000) return 0;
  }
  return id[prefix.size()] == '0' ? 0 : value;
}

void require_positive(std::int64_t value, const std::string& field) {
  if (value <= 0) throw ValidationError(field, "must be a positive integer, got " + std::to_string(value));
}

std::int64_t get_int(const nlohmann::json& j, const char* key, bool required = true,
                     std::int64_t fallback = 0) {
  if (!j.contains(key)) {
    if (required) throw ValidationError(key, "missing required field");
    return fallback;
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(key, "must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

std::string_view module_kind_name(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::kEmbedding: return "Embedding";
    case ModuleKind::kTransformerLayer: return "TransformerLayer";
    case ModuleKind::kExitClassifier: return "ExitClassifier";
  }
  return "?";
}

ModuleKind parse_module_kind(std::string_view name) {
  if (name == "Embedding") return ModuleKind::kEmbedding;
  if (name == "TransformerLayer") return ModuleKind::kTransformerLayer;
  if (name == "ExitClassifier") return ModuleKind::kExitClassifier;
  throw ValidationError("modules.kind", "unknown module kind '" + std::string(name) + "'");
}

const ModuleDecl* ModelSpec::find(std::string_view id) const {
  for (const auto& decl : modules) {
    if (decl.id == id) return &decl;
  }
  return nullptr;
}

std::string layer_id(std::int64_t layer) { return "layer_" + std::to_string(layer); }
std::string exit_id(std::int64_t layer) { return "exit_" + std::to_string(layer); }

std::vector<ModuleDecl> default_catalog(std::int64_t num_layers) {
  std::vector<ModuleDecl> catalog;
  catalog.push_back({"emb", ModuleKind::kEmbedding, {}, {}, {}});
  for (std::int64_t l = 1; l <= num_layers; ++l) {
    catalog.push_back({layer_id(l), ModuleKind::kTransformerLayer, {}, {}, {}});
  }
  for (std::int64_t l = 1; l <= num_layers; ++l) {
    catalog.push_back({exit_id(l), ModuleKind::kExitClassifier, {}, {}, {}});
  }
  return catalog;
}

ModelSpec make_model_spec(std::string name, std::int64_t hidden_size, std::int64_t num_layers,
                          std::int64_t num_heads, std::int64_t ffn_size, std::int64_t vocab_size,
                          std::int64_t max_positions, std::int64_t num_segment_types,
                          std::int64_t num_labels) {
  ModelSpec spec{std::move(name), hidden_size,   num_layers,        num_heads,  ffn_size,
                 vocab_size,      max_positions, num_segment_types, num_labels, {}};
  if (num_layers > 0) spec.modules = default_catalog(num_layers);
  validate(spec);
  return spec;
}

void validate(const ModelSpec& spec) {
  require_positive(spec.hidden_size, "hidden_size");
  require_positive(spec.num_layers, "num_layers");
  require_positive(spec.num_heads, "num_heads");
  require_positive(spec.ffn_size, "ffn_size");
  require_positive(spec.vocab_size, "vocab_size");
  require_positive(spec.max_positions, "max_positions");
  require_positive(spec.num_labels, "num_labels");
  if (spec.num_segment_types < 0) {
    throw ValidationError("num_segment_types", "must be non-negative");
  }
  if (spec.hidden_size % spec.num_heads != 0) {
    throw ValidationError("num_heads", "num_heads (" + std::to_string(spec.num_heads) +
                                           ") must divide hidden_size (" +
                                           std::to_string(spec.hidden_size) + ")");
  }

  std::set<std::string> seen;
  std::set<std::int64_t> layers;
  int embeddings = 0;
  for (const auto& decl : spec.modules) {
    if (decl.id.empty()) throw ValidationError("modules.id", "module id must be non-empty");
    for (char c : decl.id) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
      if (!ok) throw ValidationError("modules.id", "illegal character in module id '" + decl.id + "'");
    }
    if (!seen.insert(decl.id).second) {
      throw ValidationError("modules.id", "duplicate module id '" + decl.id + "'");
    }
    const std::string where = "modules[" + decl.id + "]";
    switch (decl.kind) {
      case ModuleKind::kEmbedding:
        ++embeddings;
        if (decl.num_heads || decl.ffn_size || decl.num_labels) {
          throw ValidationError(where, "Embedding takes no dimension overrides");
        }
        break;
      case ModuleKind::kTransformerLayer: {
        const auto k = numbered_suffix(decl.id, "layer_");
        if (k < 1 || k > spec.num_layers) {
          throw ValidationError(where, "transformer layers must be named layer_1..layer_" +
                                           std::to_string(spec.num_layers));
        }
        layers.insert(k);
        if (decl.num_labels) throw ValidationError(where + ".num_labels", "not valid on a layer");
        const auto heads = spec.heads_of(decl);
        require_positive(heads, where + ".num_heads");
        require_positive(spec.ffn_of(decl), where + ".ffn_size");
        if (spec.hidden_size % heads != 0) {
          throw ValidationError(where + ".num_heads", "must divide hidden_size");
        }
        break;
      }
      case ModuleKind::kExitClassifier: {
        const auto k = numbered_suffix(decl.id, "exit_");
        if (k < 1 || k > spec.num_layers) {
          throw ValidationError(where, "exit modules must be numbered exit_1..exit_" +
                                           std::to_string(spec.num_layers));
        }
        if (decl.num_heads || decl.ffn_size) {
          throw ValidationError(where, "exit classifiers only take a num_labels override");
        }
        require_positive(spec.labels_of(decl), where + ".num_labels");
        break;
      }
    }
  }
  if (embeddings != 1) {
    throw ValidationError("modules", "exactly one Embedding module required, found " +
                                         std::to_string(embeddings));
  }
  if (static_cast<std::int64_t>(layers.size()) != spec.num_layers) {
    throw ValidationError("modules", "catalog must declare layer_1..layer_" +
                                         std::to_string(spec.num_layers));
  }
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("<root>", "model spec must be a JSON object");
  ModelSpec spec;
  if (j.contains("model_name")) {
    if (!j.at("model_name").is_string()) throw ValidationError("model_name", "must be a string");
    spec.model_name = j.at("model_name").get<std::string>();
  }
  spec.hidden_size = get_int(j, "hidden_size");
  spec.num_layers = get_int(j, "num_layers");
  spec.num_heads = get_int(j, "num_heads");
  spec.ffn_size = get_int(j, "ffn_size");
  spec.vocab_size = get_int(j, "vocab_size");
  spec.max_positions = get_int(j, "max_positions");
  spec.num_segment_types = get_int(j, "num_segment_types", false, 0);
  spec.num_labels = get_int(j, "num_labels");

  if (j.contains("modules")) {
    const auto& mods = j.at("modules");
    if (!mods.is_array()) throw ValidationError("modules", "must be an array");
    for (const auto& m : mods) {
      if (!m.is_object() || !m.contains("id") || !m.contains("kind") || !m.at("id").is_string() ||
          !m.at("kind").is_string()) {
        throw ValidationError("modules", "each module needs string fields 'id' and 'kind'");
      }
      ModuleDecl decl;
      decl.id = m.at("id").get<std::string>();
      decl.kind = parse_module_kind(m.at("kind").get<std::string>());
      if (m.contains("num_heads")) decl.num_heads = get_int(m, "num_heads");
      if (m.contains("ffn_size")) decl.ffn_size = get_int(m, "ffn_size");
      if (m.contains("num_labels")) decl.num_labels = get_int(m, "num_labels");
      spec.modules.push_back(std::move(decl));
    }
  } else if (spec.num_layers > 0) {
    spec.modules = default_catalog(spec.num_layers);
  }
  validate(spec);
  return spec;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["model_name"] = spec.model_name;
  j["hidden_size"] = spec.hidden_size;
  j["num_layers"] = spec.num_layers;
  j["num_heads"] = spec.num_heads;
  j["ffn_size"] = spec.ffn_size;
  j["vocab_size"] = spec.vocab_size;
  j["max_positions"] = spec.max_positions;
  j["num_segment_types"] = spec.num_segment_types;
  j["num_labels"] = spec.num_labels;
  auto mods = nlohmann::json::array();
  for (const auto& decl : spec.modules) {
    nlohmann::json m{{"id", decl.id}, {"kind", module_kind_name(decl.kind)}};
    if (decl.num_heads) m["num_heads"] = *decl.num_heads;
    if (decl.ffn_size) m["ffn_size"] = *decl.ffn_size;
    if (decl.num_labels) m["num_labels"] = *decl.num_labels;
    mods.push_back(std::move(m));
  }
  j["modules"] = std::move(mods);
  return j;
}

ModelSpec parse_model_spec(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("model spec is not valid JSON: ") + e.what());
  }
  return model_spec_from_json(j);
}

ModelSpec load_model_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read model spec " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_spec(buf.str());
}

}  // namespace elue
