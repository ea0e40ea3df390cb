#include "elue/store.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>

#include "elue/error.hpp"
#include "elue/evaluate.hpp"

namespace elue {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into '" + path.string() + "'");
  }
}

RecordStore::RecordStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "records", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create store at '" + root_.string() + "': " + ec.message());
}

fs::path RecordStore::record_path(const std::string& id, const char* ext) const {
  return root_ / "records" / (id + ext);
}

bool RecordStore::append(const StoredRecord& record) {
  if (record.id != sha256_hex(record.bytes)) {
    throw Error(ErrorCode::kInvalidArgument, "record id does not match its content hash");
  }
  const auto bytes_path = record_path(record.id, ".json");
  if (fs::exists(bytes_path)) return false;
  // Metadata lands first; the bytes file appearing is the commit point.
  write_file_atomic(record_path(record.id, ".meta"),
                    nlohmann::json{{"submitted_at_ms", record.submitted_at_ms}}.dump());
  write_file_atomic(bytes_path, record.bytes);
  return true;
}

std::optional<StoredRecord> RecordStore::get(const std::string& id) const {
  if (id.size() != 2 * SHA256_DIGEST_LENGTH ||
      !std::all_of(id.begin(), id.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  const auto bytes_path = record_path(id, ".json");
  if (!fs::exists(bytes_path)) return std::nullopt;
  StoredRecord r;
  r.id = id;
  r.bytes = read_text_file(bytes_path);
  if (sha256_hex(r.bytes) != id) throw Error(ErrorCode::kIo, "record " + id + " is corrupt");
  const auto meta = nlohmann::json::parse(read_text_file(record_path(id, ".meta")), nullptr, false);
  if (meta.is_discarded() || !meta.contains("submitted_at_ms")) {
    throw Error(ErrorCode::kIo, "record " + id + " has unreadable metadata");
  }
  r.submitted_at_ms = meta.at("submitted_at_ms").get<std::int64_t>();
  return r;
}

std::vector<StoredRecord> RecordStore::load_all() const {
  std::vector<StoredRecord> out;
  for (const auto& entry : fs::directory_iterator(root_ / "records")) {
    if (entry.path().extension() != ".json") continue;
    if (auto r = get(entry.path().stem().string())) out.push_back(std::move(*r));
  }
  std::sort(out.begin(), out.end(), [](const StoredRecord& a, const StoredRecord& b) {
    return a.submitted_at_ms != b.submitted_at_ms ? a.submitted_at_ms < b.submitted_at_ms : a.id < b.id;
  });
  return out;
}

void RecordStore::write_index(const nlohmann::json& index) const {
  write_file_atomic(root_ / "index.json", index.dump(2) + "\n");
}

std::optional<nlohmann::json> RecordStore::read_index() const {
  const auto path = root_ / "index.json";
  if (!fs::exists(path)) return std::nullopt;
  auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace elue
