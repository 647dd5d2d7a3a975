// dialogos/conversation.hpp — per-channel forests of act-typed interventions.
//
// The same tree model serves synchronous chat and asynchronous forum
// channels. A tree is written by exactly one sequencer; every insertion is
// checked against the grammar (parent act or ROOT, same-author flag).
//
// Intervention ids are the global event sequence numbers assigned by the
// event store, so id == seq and ids are monotonically ordered.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dialogos/grammar.hpp"

namespace dialogos {

using InterventionId = std::uint64_t;
using Seq = std::uint64_t;
using TimestampMs = std::int64_t;
using UserId = std::string;
using ChannelId = std::string;

inline constexpr std::size_t kMaxBodyBytes = 16 * 1024;

struct Intervention {
  InterventionId id = 0;
  ChannelId channel;
  std::optional<InterventionId> parent;
  ActId act;
  UserId author;
  std::string body;
  TimestampMs ts = 0;
  Seq seq = 0;

  friend bool operator==(const Intervention&, const Intervention&) = default;
};

class ConversationTree {
 public:
  explicit ConversationTree(ChannelId channel = {}) : channel_(std::move(channel)) {}

  [[nodiscard]] const ChannelId& channel() const noexcept { return channel_; }

  // Checks an insertion without mutating the tree. Throws UNKNOWN_PARENT,
  // UNKNOWN_ACT, EMPTY_BODY, BODY_TOO_LARGE, or ACT_FORBIDDEN (with the
  // legal successor set attached).
  void check_insert(const ActGrammar& grammar, std::optional<InterventionId> parent,
                    const ActId& act, const UserId& author, const std::string& body) const;

  // Appends a node whose id and seq are `seq`; seq must exceed every seq
  // already in the tree.
  const Intervention& insert(const ActGrammar& grammar, std::optional<InterventionId> parent,
                             ActId act, UserId author, std::string body, TimestampMs ts, Seq seq);

  // Convenience for standalone use: seq = last seq + 1.
  const Intervention& insert(const ActGrammar& grammar, std::optional<InterventionId> parent,
                             ActId act, UserId author, std::string body, TimestampMs ts);

  [[nodiscard]] bool contains(InterventionId id) const { return nodes_.count(id) != 0; }
  // Throws UNKNOWN_NODE.
  [[nodiscard]] const Intervention& node(InterventionId id) const;

  [[nodiscard]] const std::vector<InterventionId>& roots() const noexcept { return roots_; }
  [[nodiscard]] const std::vector<InterventionId>& children(InterventionId id) const;
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
  [[nodiscard]] Seq last_seq() const noexcept { return last_seq_; }

  // All nodes in ascending seq.
  [[nodiscard]] std::vector<const Intervention*> messages() const;

  // Depth-first pre-order: roots ascending seq, children ascending seq.
  [[nodiscard]] std::vector<InterventionId> linearize() const;

  // Root ancestor of `id`. Throws UNKNOWN_NODE.
  [[nodiscard]] InterventionId thread_of(InterventionId id) const;

  friend bool operator==(const ConversationTree&, const ConversationTree&) = default;

 private:
  ChannelId channel_;
  std::map<InterventionId, Intervention> nodes_;
  std::vector<InterventionId> roots_;
  std::map<InterventionId, std::vector<InterventionId>> children_;
  Seq last_seq_ = 0;
};

}  // namespace dialogos
