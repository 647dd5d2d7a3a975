#include "dialogos/event_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dialogos/error.hpp"

namespace dialogos {

using nlohmann::json;

std::string_view kind_name(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::intervention_posted: return "intervention_posted";
    case EventKind::context_attached: return "context_attached";
    case EventKind::context_opened: return "context_opened";
    case EventKind::message_opened: return "message_opened";
    case EventKind::profile_upserted: return "profile_upserted";
    case EventKind::offers_set: return "offers_set";
    case EventKind::presence_changed: return "presence_changed";
    case EventKind::channel_created: return "channel_created";
  }
  return "";
}

std::optional<EventKind> parse_kind(std::string_view name) noexcept {
  for (EventKind k : {EventKind::intervention_posted, EventKind::context_attached,
                      EventKind::context_opened, EventKind::message_opened,
                      EventKind::profile_upserted, EventKind::offers_set,
                      EventKind::presence_changed, EventKind::channel_created}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void violation(EventKind kind, const std::string& what) {
  throw Error(Errc::schema_violation, std::string(kind_name(kind)) + ": " + what);
}

struct Schema {
  EventKind kind;
  const json& payload;

  const json* get(const char* key, bool required) const {
    auto it = payload.find(key);
    if (it == payload.end()) {
      if (required) violation(kind, std::string("missing '") + key + "'");
      return nullptr;
    }
    return &*it;
  }
  void text(const char* key, bool required = true, bool non_empty = true) const {
    if (const json* v = get(key, required)) {
      if (!v->is_string()) violation(kind, std::string("'") + key + "' must be a string");
      if (non_empty && v->get_ref<const std::string&>().empty()) {
        violation(kind, std::string("'") + key + "' must not be empty");
      }
    }
  }
  void id(const char* key, bool required = true) const {
    if (const json* v = get(key, required)) {
      const bool positive = v->is_number_unsigned() ? v->get<std::uint64_t>() > 0
                            : v->is_number_integer() && v->get<std::int64_t>() > 0;
      if (!positive) {
        violation(kind, std::string("'") + key + "' must be a positive integer");
      }
    }
  }
  void strings(const char* key, bool required = true) const {
    if (const json* v = get(key, required)) {
      if (!v->is_array()) violation(kind, std::string("'") + key + "' must be an array");
      for (const auto& e : *v) {
        if (!e.is_string()) violation(kind, std::string("'") + key + "' must hold strings");
      }
    }
  }
  void one_of(const char* key, std::initializer_list<std::string_view> values,
              bool required = true) const {
    if (const json* v = get(key, required)) {
      if (v->is_string()) {
        for (auto allowed : values) {
          if (v->get_ref<const std::string&>() == allowed) return;
        }
      }
      violation(kind, std::string("'") + key + "' has an unexpected value");
    }
  }
  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : payload.items()) {
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) violation(kind, "unexpected key '" + k + "'");
    }
  }
};

}  // namespace

void validate_payload(EventKind kind, const json& payload) {
  if (!payload.is_object()) violation(kind, "payload must be an object");
  const Schema s{kind, payload};
  switch (kind) {
    case EventKind::channel_created:
      s.only({"channel", "mode"});
      s.text("channel");
      s.one_of("mode", {"chat", "forum"});
      break;
    case EventKind::intervention_posted:
      s.only({"channel", "author", "act", "body", "parent", "mode"});
      s.text("channel");
      s.text("author");
      s.text("act");
      s.text("body", true, false);
      s.id("parent", false);
      s.one_of("mode", {"contextual", "global"}, false);
      break;
    case EventKind::context_attached:
      s.only({"intervention", "activity", "concepts"});
      s.id("intervention");
      s.text("activity", false);
      s.strings("concepts");
      break;
    case EventKind::context_opened:
      s.only({"user", "object"});
      s.text("user");
      s.text("object");
      break;
    case EventKind::message_opened:
      s.only({"user", "message", "mode"});
      s.text("user");
      s.id("message");
      s.one_of("mode", {"contextual", "global"});
      break;
    case EventKind::profile_upserted: {
      s.only({"profile", "document"});
      const bool has_profile = payload.contains("profile");
      const bool has_document = payload.contains("document");
      if (has_profile == has_document) violation(kind, "exactly one of profile|document required");
      const json& body = has_profile ? payload["profile"] : payload["document"];
      if (!body.is_object()) violation(kind, "profile/document must be an object");
      const Schema inner{kind, body};
      inner.text("id");
      inner.text("name", false, false);
      inner.text("title", false, false);
      inner.strings("competences", false);
      inner.strings("offers", false);
      inner.strings("contacts", false);
      inner.strings("tags", false);
      inner.one_of("presence", {"connected", "offline"}, false);
      if (const json* progress = inner.get("progress", false)) {
        if (!progress->is_object()) violation(kind, "'progress' must be an object");
        for (const auto& [course, v] : progress->items()) {
          if (!v.is_number()) violation(kind, "progress values must be numbers");
        }
      }
      break;
    }
    case EventKind::offers_set:
      s.only({"user", "offers"});
      s.text("user");
      s.strings("offers");
      break;
    case EventKind::presence_changed:
      s.only({"user", "state"});
      s.text("user");
      s.one_of("state", {"connected", "offline"});
      break;
  }
}

json record_to_json(const EventRecord& record) {
  return json{{"seq", record.seq},
              {"ts", record.ts},
              {"kind", kind_name(record.kind)},
              {"payload", record.payload}};
}

std::string record_to_line(const EventRecord& record) { return record_to_json(record).dump(); }

namespace {

std::string header_line() {
  return json{{"kind", "log_meta"}, {"format", kLogFormatVersion}}.dump();
}

[[noreturn]] void corrupt(Seq expected, std::size_t line_no, const std::string& why) {
  throw Error(Errc::corrupt_log, "first bad seq " + std::to_string(expected) + " (line " +
                                     std::to_string(line_no) + "): " + why)
      .with_bad_seq(expected);
}

}  // namespace

std::vector<EventRecord> parse_log(std::string_view text) {
  std::vector<EventRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const Seq expected = out.empty() ? 1 : out.back().seq + 1;
    if (line.empty()) {
      // blank lines are tolerated only at the very end
      if (pos >= text.size() || text.find_first_not_of("\r\n", pos) == std::string_view::npos) break;
      corrupt(expected, line_no, "empty line");
    }

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) corrupt(expected, line_no, "not a JSON object");
    if (line_no == 1 && j.contains("kind") && j["kind"] == "log_meta") {
      if (!j.contains("format") || j["format"] != kLogFormatVersion) {
        corrupt(expected, line_no, "unsupported log format");
      }
      continue;
    }

    auto seq = j.find("seq");
    auto ts = j.find("ts");
    auto kind = j.find("kind");
    auto payload = j.find("payload");
    if (seq == j.end() || !seq->is_number_unsigned()) corrupt(expected, line_no, "missing seq");
    if (seq->get<Seq>() != expected) {
      corrupt(expected, line_no, "found seq " + std::to_string(seq->get<Seq>()));
    }
    if (ts == j.end() || !ts->is_number_integer()) corrupt(expected, line_no, "missing ts");
    std::optional<EventKind> k =
        kind != j.end() && kind->is_string() ? parse_kind(kind->get<std::string>()) : std::nullopt;
    if (!k) corrupt(expected, line_no, "unknown kind");
    if (payload == j.end()) corrupt(expected, line_no, "missing payload");
    if (j.size() != 4) corrupt(expected, line_no, "unexpected record keys");
    try {
      validate_payload(*k, *payload);
    } catch (const Error& e) {
      corrupt(expected, line_no, e.detail());
    }
    out.push_back(EventRecord{expected, ts->get<TimestampMs>(), *k, std::move(*payload)});
  }
  return out;
}

std::vector<EventRecord> read_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::storage_failure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

std::string emit_log(std::span<const EventRecord> records, bool with_header) {
  std::string out;
  if (with_header) out += header_line() + '\n';
  for (const auto& r : records) out += record_to_line(r) + '\n';
  return out;
}

namespace {

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

EventLog EventLog::open(const std::string& path) {
  EventLog log;
  log.path_ = path;
  struct stat st {};
  const bool exists = ::stat(path.c_str(), &st) == 0;
  if (exists && st.st_size > 0) log.records_ = read_log_file(path);

  log.fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (log.fd_ < 0) {
    throw Error(Errc::storage_failure, "cannot open " + path + ": " + std::strerror(errno));
  }
  if (!exists || st.st_size == 0) {
    if (!write_all(log.fd_, header_line() + '\n') || ::fsync(log.fd_) != 0) {
      throw Error(Errc::storage_failure, "cannot write header to " + path);
    }
  }
  return log;
}

EventLog::EventLog(EventLog&& other) noexcept
    : records_(std::move(other.records_)), path_(std::move(other.path_)), fd_(other.fd_) {
  other.fd_ = -1;
}

EventLog& EventLog::operator=(EventLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    records_ = std::move(other.records_);
    path_ = std::move(other.path_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

const EventRecord& EventLog::append(EventKind kind, json payload, TimestampMs ts) {
  validate_payload(kind, payload);
  EventRecord record{last_seq() + 1, ts, kind, std::move(payload)};
  if (fd_ >= 0) {
    const off_t before = ::lseek(fd_, 0, SEEK_END);
    const std::string line = record_to_line(record) + '\n';
    if (!write_all(fd_, line) || ::fsync(fd_) != 0) {
      const int err = errno;
      if (before >= 0 && ::ftruncate(fd_, before) != 0) {
        // the partial line stays; the next open reports it as CORRUPT_LOG
      }
      throw Error(Errc::storage_failure, path_ + ": " + std::strerror(err));
    }
  }
  records_.push_back(std::move(record));
  return records_.back();
}

}  // namespace dialogos
