// dialogos/peer.hpp — peer-help directory, similarity search, and the peer graph.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogos/conversation.hpp"
#include "dialogos/fraction.hpp"

namespace dialogos {

using Tag = std::string;
using TagSet = std::set<Tag>;

enum class Presence { connected, offline };
enum class EntityKind { user, document };
enum class DisplayClass { self, connected, contact_offline, stranger, document };

std::string_view presence_name(Presence p) noexcept;
std::optional<Presence> parse_presence(std::string_view s) noexcept;
std::string_view display_class_name(DisplayClass c) noexcept;

// Lowercases ASCII letters and trims whitespace; empty tags are dropped.
TagSet normalize_tags(const std::vector<std::string>& raw);

struct PeerProfile {
  UserId id;
  std::string name;
  TagSet competences;
  TagSet offers;
  std::map<std::string, double> progress;  // course id -> fraction in [0,1]
  Presence presence = Presence::offline;
  std::set<UserId> contacts;

  friend bool operator==(const PeerProfile&, const PeerProfile&) = default;
};

struct PeerDocument {
  std::string id;
  std::string title;
  TagSet tags;

  friend bool operator==(const PeerDocument&, const PeerDocument&) = default;
};

struct MatchResult {
  std::string entity;
  EntityKind kind = EntityKind::user;
  Fraction score;
  DisplayClass display_class = DisplayClass::stranger;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
Fraction jaccard(const TagSet& a, const TagSet& b);

// Display class of a user entity as seen by `requester`.
DisplayClass classify(const PeerProfile& requester, const PeerProfile& entity);

class Directory {
 public:
  // Throws MALFORMED_DOC when the profile breaks an invariant (empty id,
  // progress outside [0,1], self in contacts). Tags are normalised.
  void upsert_profile(PeerProfile profile);
  void upsert_document(PeerDocument document);

  // Throws UNKNOWN_USER.
  const PeerProfile& set_offers(const UserId& user, TagSet offers);
  // Presence is tracked for any user id, with or without a profile.
  void set_presence(const UserId& user, Presence presence);

  [[nodiscard]] bool has_user(std::string_view id) const;
  // Throws UNKNOWN_USER.
  [[nodiscard]] const PeerProfile& profile(std::string_view id) const;
  [[nodiscard]] Presence presence(std::string_view id) const;
  [[nodiscard]] const std::map<UserId, PeerProfile, std::less<>>& profiles() const noexcept {
    return profiles_;
  }
  [[nodiscard]] const std::map<std::string, PeerDocument, std::less<>>& documents() const noexcept {
    return documents_;
  }
  [[nodiscard]] const std::map<UserId, Presence, std::less<>>& presence_table() const noexcept {
    return presence_;
  }

  friend bool operator==(const Directory&, const Directory&) = default;

 private:
  std::map<UserId, PeerProfile, std::less<>> profiles_;
  std::map<std::string, PeerDocument, std::less<>> documents_;
  std::map<UserId, Presence, std::less<>> presence_;
};

// Ranked candidates for `requester`: users other than the requester scored
// against competences ∪ offers, documents against their tags. Zero scores
// are dropped; order is score desc, connected before everything else, then
// id asc (users before documents on equal ids); at most k results.
// Throws UNKNOWN_USER; k must be >= 1.
std::vector<MatchResult> match_peers(const Directory& directory, const UserId& requester,
                                     const TagSet& query, std::size_t k);

struct SummaryCard {
  std::string name;
  std::vector<Tag> top_tags;  // up to three, alphabetical
  std::optional<Presence> presence;
};

struct PeerGraphNode {
  std::string id;
  EntityKind kind = EntityKind::user;
  DisplayClass display_class = DisplayClass::stranger;
  SummaryCard card;
};

struct PeerGraphEdge {
  std::string from;
  std::string to;
  double weight = 0.0;
};

struct PeerGraph {
  std::vector<PeerGraphNode> nodes;  // requester first
  std::vector<PeerGraphEdge> edges;
};

PeerGraph peer_graph_model(const Directory& directory, const UserId& requester,
                           const std::vector<MatchResult>& results);

// Bootstrap document: {"profiles":[...], "documents":[...]}.
Directory load_directory(const nlohmann::json& doc);
Directory load_directory_file(const std::string& path);

nlohmann::json profile_to_json(const PeerProfile& p);
PeerProfile profile_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const PeerDocument& d);
PeerDocument document_from_json(const nlohmann::json& j);
nlohmann::json match_to_json(const MatchResult& r);
nlohmann::json graph_to_json(const PeerGraph& g);

}  // namespace dialogos
