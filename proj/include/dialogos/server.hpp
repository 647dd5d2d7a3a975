// dialogos/server.hpp — wire protocol v1, frame handling, and the sequencer.
//
// Frames are compact JSON objects, one per LF-terminated line, discriminated
// by "t". handle_frame() is a pure function of (frame, connection state,
// world snapshot, clock): every state change it wants is returned as events
// for the Hub to append. The Hub is the single sequencer: it appends, folds,
// answers the sender (ack first) and fans events out per broadcast_policy().
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogos/error.hpp"
#include "dialogos/event_store.hpp"
#include "dialogos/world.hpp"

namespace dialogos {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 64 * 1024;

using ConnectionId = std::uint64_t;

struct ConnectionState {
  ConnectionId id = 0;
  std::optional<UserId> user;  // set by hello
  std::set<ChannelId> joined;
  std::set<ChannelId> subscribed;  // joined channels that receive pushes
  int version = 0;

  friend bool operator==(const ConnectionState&, const ConnectionState&) = default;
};

struct PendingEvent {
  EventKind kind;
  nlohmann::json payload;

  friend bool operator==(const PendingEvent&, const PendingEvent&) = default;
};

// An empty channel addresses every authenticated connection (presence).
struct ChannelBroadcast {
  ChannelId channel;
  nlohmann::json frame;

  friend bool operator==(const ChannelBroadcast&, const ChannelBroadcast&) = default;
};

struct FrameOutcome {
  ConnectionState next;
  std::vector<PendingEvent> events;
  std::vector<nlohmann::json> replies;        // to the sender, in order
  std::vector<ChannelBroadcast> broadcasts;   // routed by broadcast_policy

  friend bool operator==(const FrameOutcome&, const FrameOutcome&) = default;
};

nlohmann::json error_frame(const Error& e);

FrameOutcome handle_frame(std::string_view line, const ConnectionState& state,
                          const WorldState& world, TimestampMs now);

// chat: every connection that joined the channel; forum: subscribers only.
std::set<ConnectionId> broadcast_policy(ChannelMode mode, const ChannelId& channel,
                                        const std::map<ConnectionId, ConnectionState>& connections);

// Owns the log and the live world. Thread-safe; every mutation is serialized.
class Hub {
 public:
  using Sink = std::function<void(const std::string& line)>;

  Hub(WorldConfig config, EventLog log);

  ConnectionId connect(Sink sink);
  void receive(ConnectionId id, std::string_view line, TimestampMs now);
  void disconnect(ConnectionId id, TimestampMs now);

  // Appends an operator event (bootstrap, resets) outside any connection.
  void append_system(EventKind kind, nlohmann::json payload, TimestampMs now);
  // Marks every user the log believes connected as offline.
  void reset_presence(TimestampMs now);

  // Copies taken under the lock.
  [[nodiscard]] WorldState snapshot() const;
  [[nodiscard]] std::vector<EventRecord> log_snapshot() const;
  [[nodiscard]] Seq seq_horizon() const;
  [[nodiscard]] std::size_t connection_count() const;

 private:
  struct Connection {
    ConnectionState state;
    Sink sink;
  };

  void send(ConnectionId id, const nlohmann::json& frame);
  void commit(const PendingEvent& event, TimestampMs now);
  std::map<ConnectionId, ConnectionState> states() const;

  mutable std::mutex mu_;
  EventLog log_;
  WorldState world_;
  std::map<ConnectionId, Connection> connections_;
  ConnectionId next_id_ = 1;
};

}  // namespace dialogos
