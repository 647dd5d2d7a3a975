// dialogos/event_store.hpp — append-only event log.
//
// Storage format: newline-delimited JSON, one record per line, compact, keys
// sorted. The first line may be a header {"format":"1","kind":"log_meta"}.
//
// Invariants:
//   - seq is strictly increasing and gapless from 1.
//   - a record is written and fsync'ed before append() returns it.
//   - a failed append leaves both the file and the in-memory view unchanged.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogos/conversation.hpp"

namespace dialogos {

enum class EventKind {
  intervention_posted,
  context_attached,
  context_opened,
  message_opened,
  profile_upserted,
  offers_set,
  presence_changed,
  channel_created,
};

inline constexpr std::string_view kLogFormatVersion = "1";

std::string_view kind_name(EventKind kind) noexcept;
std::optional<EventKind> parse_kind(std::string_view name) noexcept;

struct EventRecord {
  Seq seq = 0;
  TimestampMs ts = 0;
  EventKind kind = EventKind::channel_created;
  nlohmann::json payload;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Throws SCHEMA_VIOLATION when `payload` does not fit `kind`.
void validate_payload(EventKind kind, const nlohmann::json& payload);

nlohmann::json record_to_json(const EventRecord& record);
std::string record_to_line(const EventRecord& record);

// Parses a whole log; throws CORRUPT_LOG carrying the first bad seq (the seq
// the offending line should have had).
std::vector<EventRecord> parse_log(std::string_view text);
std::vector<EventRecord> read_log_file(const std::string& path);
std::string emit_log(std::span<const EventRecord> records, bool with_header = true);

class EventLog {
 public:
  // In-memory log.
  EventLog() = default;
  // File-backed log: existing contents are parsed (CORRUPT_LOG on damage),
  // new records are appended durably. A missing file is created with a header.
  static EventLog open(const std::string& path);

  EventLog(EventLog&&) noexcept;
  EventLog& operator=(EventLog&&) noexcept;
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog();

  // Throws SCHEMA_VIOLATION or STORAGE_FAILURE; the log is unchanged on throw.
  const EventRecord& append(EventKind kind, nlohmann::json payload, TimestampMs ts);

  [[nodiscard]] std::span<const EventRecord> records() const noexcept { return records_; }
  [[nodiscard]] Seq last_seq() const noexcept { return records_.empty() ? 0 : records_.back().seq; }
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::vector<EventRecord> records_;
  std::string path_;
  int fd_ = -1;
};

}  // namespace dialogos
