// dialogos/world.hpp — the state folded from the event log.
//
// The live server and replay share WorldState::apply, so a world rebuilt from
// a log is identical to the live world at the same seq. state_hash() digests
// a canonical serialization (sorted keys, sorted ids) with SHA-256.
#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dialogos/conversation.hpp"
#include "dialogos/event_store.hpp"
#include "dialogos/forum.hpp"
#include "dialogos/grammar.hpp"
#include "dialogos/peer.hpp"

namespace dialogos {

enum class ChannelMode { chat, forum };

std::string_view mode_name(ChannelMode mode) noexcept;
std::optional<ChannelMode> parse_mode(std::string_view s) noexcept;

struct Channel {
  ChannelId id;
  ChannelMode mode = ChannelMode::forum;
  ConversationTree tree;

  friend bool operator==(const Channel&, const Channel&) = default;
};

// Immutable inputs every fold needs.
struct WorldConfig {
  std::shared_ptr<const ActGrammar> grammar;
  std::shared_ptr<const CourseManifest> manifest;
};

class WorldState {
 public:
  explicit WorldState(WorldConfig config);

  // Folds one record. The record's seq must be last_seq() + 1. Throws the
  // semantic error (UNKNOWN_CHANNEL, ACT_FORBIDDEN, DANGLING_REF, ...) on a
  // record the live server would never have produced; the world is then
  // unchanged.
  void apply(const EventRecord& record);

  [[nodiscard]] const WorldConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ActGrammar& grammar() const noexcept { return *config_.grammar; }
  [[nodiscard]] const CourseManifest& manifest() const noexcept { return *config_.manifest; }

  [[nodiscard]] const std::map<ChannelId, Channel, std::less<>>& channels() const noexcept {
    return channels_;
  }
  [[nodiscard]] const Channel* find_channel(std::string_view id) const;
  // Channel holding an intervention, or nullptr.
  [[nodiscard]] const Channel* channel_of(InterventionId id) const;
  [[nodiscard]] const AttachmentMap& attachments() const noexcept { return attachments_; }
  [[nodiscard]] const Directory& directory() const noexcept { return directory_; }
  [[nodiscard]] Seq last_seq() const noexcept { return last_seq_; }

  [[nodiscard]] nlohmann::json canonical_json() const;
  [[nodiscard]] std::string state_hash() const;

 private:
  WorldConfig config_;
  std::map<ChannelId, Channel, std::less<>> channels_;
  std::map<InterventionId, ChannelId> node_channel_;
  AttachmentMap attachments_;
  Directory directory_;
  Seq last_seq_ = 0;
};

// Folds `records` from an empty world. Throws CORRUPT_LOG naming the first
// record that breaks seq continuity or cannot be applied.
WorldState replay(std::span<const EventRecord> records, const WorldConfig& config);

nlohmann::json intervention_to_json(const Intervention& node);

}  // namespace dialogos
