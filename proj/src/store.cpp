#include "isobank/store.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace isobank {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

std::string_view to_string(ResponderKind k) { return k == ResponderKind::lm ? "lm" : "student"; }

ResponderKind responder_kind_from_string(std::string_view s) {
  if (s == "lm") return ResponderKind::lm;
  if (s == "student") return ResponderKind::student;
  throw ParseError(fmt::format("unknown responder_kind '{}'", s));
}

RecordKey key_of(const ResponseRecord& r) { return {r.responder_id, r.bank_id, r.item_id, r.attempt}; }

std::string record_to_json_line(const ResponseRecord& r) {
  ojson j;
  j["responder_id"] = r.responder_id;
  j["responder_kind"] = std::string(to_string(r.responder_kind));
  j["bank_id"] = r.bank_id;
  j["item_id"] = r.item_id;
  j["attempt"] = r.attempt;
  j["answer_text"] = r.answer_text;
  j["correct"] = r.correct;
  j["timestamp"] = r.timestamp;
  if (r.latency_ms)
    j["latency_ms"] = *r.latency_ms;
  if (r.parse_status)
    j["parse_status"] = *r.parse_status;
  if (r.transport_error)
    j["transport_error"] = *r.transport_error;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ResponseRecord record_from_json_line(std::string_view line) {
  const json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("record is not a JSON object");
  try {
    ResponseRecord r;
    r.responder_id = j.at("responder_id").get<std::string>();
    r.responder_kind = responder_kind_from_string(j.at("responder_kind").get<std::string>());
    r.bank_id = j.at("bank_id").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    r.attempt = j.value("attempt", 1);
    r.answer_text = j.value("answer_text", "");
    r.correct = j.at("correct").get<bool>();
    r.timestamp = j.value("timestamp", "");
    if (j.contains("latency_ms"))
      r.latency_ms = j["latency_ms"].get<std::int64_t>();
    if (j.contains("parse_status"))
      r.parse_status = j["parse_status"].get<std::string>();
    if (j.contains("transport_error"))
      r.transport_error = j["transport_error"].get<std::string>();
    if (r.attempt < 1)
      throw ParseError("attempt must be >= 1");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(ms));
}

namespace {

// Calls `sink` for every record. A malformed final line is a torn write and only warns.
template <typename Sink>
void scan_store(const std::filesystem::path& path, std::vector<std::string>* warnings, Sink&& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    lines.push_back(std::move(line));
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      sink(record_from_json_line(line), i + 1);
    } catch (const ParseError& e) {
      if (i + 1 == lines.size()) {
        if (warnings)
          warnings->push_back(fmt::format("{}:{}: skipping torn final line ({})", path.string(), i + 1, e.what()));
        continue;
      }
      throw ParseError(fmt::format("{}:{}: {}", path.string(), i + 1, e.what()));
    }
  }
}

} // namespace

std::vector<ResponseRecord> read_store(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  if (!std::filesystem::exists(path))
    throw IoError(fmt::format("response store '{}' does not exist", path.string()));
  std::vector<ResponseRecord> out;
  std::set<RecordKey> keys;
  scan_store(path, warnings, [&](ResponseRecord r, size_t line) {
    if (!keys.insert(key_of(r)).second) {
      if (warnings)
        warnings->push_back(fmt::format("{}:{}: duplicate record for {}/{}/{} attempt {} ignored", path.string(), line,
                                        r.responder_id, r.bank_id, r.item_id, r.attempt));
      return;
    }
    out.push_back(std::move(r));
  });
  return out;
}

ResponseStore::ResponseStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_))
    records_ = read_store(path_, &warnings_);
  for (const auto& r : records_)
    keys_.insert(key_of(r));

  // A final line without a newline is either a complete record (start appends on a fresh line)
  // or a torn write, which is cut off so later appends do not bury it mid-file.
  bool needs_newline = false;
  if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
    std::string text;
    {
      std::ifstream in(path_, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    if (text.back() != '\n') {
      const size_t start = text.find_last_of('\n') == std::string::npos ? 0 : text.find_last_of('\n') + 1;
      bool complete = true;
      try {
        record_from_json_line(std::string_view(text).substr(start));
      } catch (const ParseError&) {
        complete = false;
      }
      if (complete)
        needs_newline = true;
      else
        std::filesystem::resize_file(path_, start);
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_)
    throw IoError(fmt::format("cannot open response store '{}' for append", path_.string()));
  if (needs_newline)
    out_ << '\n' << std::flush;
}

bool ResponseStore::contains(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  return keys_.count(key) > 0;
}

bool ResponseStore::append(const ResponseRecord& record) {
  std::lock_guard lock(mutex_);
  if (!keys_.insert(key_of(record)).second)
    return false;
  out_ << record_to_json_line(record) << '\n' << std::flush;
  if (!out_)
    throw IoError(fmt::format("failed appending to '{}'", path_.string()));
  records_.push_back(record);
  return true;
}

std::vector<ResponseRecord> ResponseStore::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t ResponseStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

} // namespace isobank
