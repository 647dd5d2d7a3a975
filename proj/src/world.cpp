#include "dialogos/world.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "dialogos/error.hpp"

namespace dialogos {

using nlohmann::json;

std::string_view mode_name(ChannelMode mode) noexcept {
  return mode == ChannelMode::chat ? "chat" : "forum";
}

std::optional<ChannelMode> parse_mode(std::string_view s) noexcept {
  if (s == "chat") return ChannelMode::chat;
  if (s == "forum") return ChannelMode::forum;
  return std::nullopt;
}

WorldState::WorldState(WorldConfig config) : config_(std::move(config)) {
  if (!config_.grammar || !config_.manifest) {
    throw std::invalid_argument("world needs a grammar and a manifest");
  }
}

const Channel* WorldState::find_channel(std::string_view id) const {
  auto it = channels_.find(id);
  return it == channels_.end() ? nullptr : &it->second;
}

const Channel* WorldState::channel_of(InterventionId id) const {
  auto it = node_channel_.find(id);
  return it == node_channel_.end() ? nullptr : find_channel(it->second);
}

namespace {

std::set<std::string> string_set(const json& arr) {
  std::set<std::string> out;
  for (const auto& v : arr) out.insert(v.get<std::string>());
  return out;
}

std::vector<std::string> string_vector(const json& arr) {
  std::vector<std::string> out;
  for (const auto& v : arr) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

void WorldState::apply(const EventRecord& record) {
  if (record.seq != last_seq_ + 1) {
    throw Error(Errc::corrupt_log, "expected seq " + std::to_string(last_seq_ + 1))
        .with_bad_seq(last_seq_ + 1);
  }
  validate_payload(record.kind, record.payload);
  const json& p = record.payload;

  // Each branch validates fully before its first mutation.
  switch (record.kind) {
    case EventKind::channel_created: {
      const auto id = p["channel"].get<std::string>();
      if (find_channel(id)) throw Error(Errc::channel_exists, "channel '" + id + "' exists");
      channels_.emplace(id, Channel{id, *parse_mode(p["mode"].get<std::string>()), ConversationTree(id)});
      break;
    }
    case EventKind::intervention_posted: {
      const auto id = p["channel"].get<std::string>();
      auto it = channels_.find(id);
      if (it == channels_.end()) throw Error(Errc::unknown_channel, "no channel '" + id + "'");
      std::optional<InterventionId> parent;
      if (p.contains("parent")) parent = p["parent"].get<InterventionId>();
      it->second.tree.insert(grammar(), parent, p["act"].get<std::string>(),
                             p["author"].get<std::string>(), p["body"].get<std::string>(),
                             record.ts, record.seq);
      node_channel_[record.seq] = id;
      break;
    }
    case EventKind::context_attached: {
      const auto node = p["intervention"].get<InterventionId>();
      const Channel* ch = channel_of(node);
      if (!ch) throw Error(Errc::unknown_node, "no intervention " + std::to_string(node));
      std::optional<std::string> activity;
      if (p.contains("activity")) activity = p["activity"].get<std::string>();
      attach_context(attachments_, ch->tree, manifest(), node, std::move(activity),
                     string_set(p["concepts"]));
      break;
    }
    case EventKind::context_opened:
      (void)manifest().object(p["object"].get<std::string>());
      break;
    case EventKind::message_opened: {
      const auto node = p["message"].get<InterventionId>();
      if (!channel_of(node)) throw Error(Errc::unknown_node, "no intervention " + std::to_string(node));
      break;
    }
    case EventKind::profile_upserted:
      if (p.contains("profile")) {
        directory_.upsert_profile(profile_from_json(p["profile"]));
      } else {
        directory_.upsert_document(document_from_json(p["document"]));
      }
      break;
    case EventKind::offers_set:
      directory_.set_offers(p["user"].get<std::string>(), normalize_tags(string_vector(p["offers"])));
      break;
    case EventKind::presence_changed:
      directory_.set_presence(p["user"].get<std::string>(), *parse_presence(p["state"].get<std::string>()));
      break;
  }
  last_seq_ = record.seq;
}

json intervention_to_json(const Intervention& n) {
  json j{{"id", n.id},     {"channel", n.channel}, {"act", n.act}, {"author", n.author},
         {"body", n.body}, {"ts", n.ts},           {"seq", n.seq}};
  j["parent"] = n.parent ? json(*n.parent) : json(nullptr);
  return j;
}

json WorldState::canonical_json() const {
  json channels = json::object();
  for (const auto& [id, ch] : channels_) {
    json nodes = json::array();
    for (const Intervention* n : ch.tree.messages()) nodes.push_back(intervention_to_json(*n));
    channels[id] = json{{"mode", mode_name(ch.mode)}, {"interventions", std::move(nodes)}};
  }
  json attachments = json::array();
  for (const auto& [id, a] : attachments_) {
    attachments.push_back({{"intervention", id},
                           {"activity", a.activity ? json(*a.activity) : json(nullptr)},
                           {"concepts", a.concepts}});
  }
  json profiles = json::array();
  for (const auto& [id, p] : directory_.profiles()) profiles.push_back(profile_to_json(p));
  json documents = json::array();
  for (const auto& [id, d] : directory_.documents()) documents.push_back(document_to_json(d));
  json presence = json::object();
  for (const auto& [user, state] : directory_.presence_table()) presence[user] = presence_name(state);

  return json{{"last_seq", last_seq_},     {"channels", std::move(channels)},
              {"attachments", std::move(attachments)}, {"profiles", std::move(profiles)},
              {"documents", std::move(documents)},     {"presence", std::move(presence)}};
}

std::string WorldState::state_hash() const {
  const std::string text = canonical_json().dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

WorldState replay(std::span<const EventRecord> records, const WorldConfig& config) {
  WorldState world(config);
  for (const auto& r : records) {
    try {
      world.apply(r);
    } catch (const Error& e) {
      const Seq bad = e.code() == Errc::corrupt_log && e.bad_seq() ? *e.bad_seq() : r.seq;
      throw Error(Errc::corrupt_log, "first bad seq " + std::to_string(bad) + ": " +
                                         std::string(code_name(e.code())) + " " + e.detail())
          .with_bad_seq(bad);
    }
  }
  return world;
}

}  // namespace dialogos
