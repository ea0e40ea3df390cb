#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace elue {

std::string sha256_hex(std::string_view bytes);

struct StoredRecord {
  std::string id;
  std::string bytes;  // canonical submission bytes; sha256(bytes) == id
  std::int64_t submitted_at_ms = 0;
};

// Append-only directory of canonical submission bytes:
//   <root>/records/<id>.json   canonical bytes
//   <root>/records/<id>.meta   {"submitted_at_ms": ...}
//   <root>/index.json          derived, rebuildable from the records
// Every file is written to a temporary name and renamed into place.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // False when the id already exists; the existing record is left untouched.
  bool append(const StoredRecord& record);

  std::optional<StoredRecord> get(const std::string& id) const;

  // All records, ordered by (submitted_at_ms, id). Throws kIo on a record whose
  // bytes do not hash to its id.
  std::vector<StoredRecord> load_all() const;

  void write_index(const nlohmann::json& index) const;
  std::optional<nlohmann::json> read_index() const;

 private:
  std::filesystem::path record_path(const std::string& id, const char* ext) const;

  std::filesystem::path root_;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace elue
