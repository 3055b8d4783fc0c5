#pragma once

// Append-only response store: one ResponseRecord per line as JSON (responses.jsonl).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "isobank/error.hpp"

namespace isobank {

enum class ResponderKind { lm, student };

std::string_view to_string(ResponderKind k);
ResponderKind responder_kind_from_string(std::string_view s);

struct ResponseRecord {
  std::string responder_id; // model name or pseudonymous student id
  ResponderKind responder_kind = ResponderKind::lm;
  std::string bank_id;
  std::string item_id;
  int attempt = 1;
  std::string answer_text; // empty for student records
  bool correct = false;
  std::string timestamp;   // ISO 8601 UTC
  std::optional<std::int64_t> latency_ms;   // lm only
  std::optional<std::string> parse_status;  // lm only: ok | repaired | failed
  std::optional<std::string> transport_error;

  bool operator==(const ResponseRecord&) const = default;
};

using RecordKey = std::tuple<std::string, std::string, std::string, int>;
RecordKey key_of(const ResponseRecord& r);

std::string record_to_json_line(const ResponseRecord& r);
ResponseRecord record_from_json_line(std::string_view line);

std::string utc_timestamp_now();

// Loads an existing store (if any) and appends new records under a single writer lock.
class ResponseStore {
public:
  explicit ResponseStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  bool contains(const RecordKey& key) const;

  // Appends and flushes one line. Returns false (and writes nothing) when the key already exists.
  bool append(const ResponseRecord& record);

  std::vector<ResponseRecord> records() const;
  std::size_t size() const;

  // Lines skipped while loading: a torn final line or duplicate keys.
  const std::vector<std::string>& load_warnings() const { return warnings_; }

private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<ResponseRecord> records_;
  std::set<RecordKey> keys_;
  std::vector<std::string> warnings_;
  std::ofstream out_;
};

// Reads all records of a store file without opening it for writing.
std::vector<ResponseRecord> read_store(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

} // namespace isobank
