#include "dialogos/server.hpp"

#include <algorithm>

namespace dialogos {

using nlohmann::json;

json error_frame(const Error& e) {
  json f{{"t", "error"}, {"code", code_name(e.code())}, {"detail", e.detail()}};
  if (e.code() == Errc::act_forbidden) f["allowed"] = e.allowed();
  return f;
}

namespace {

[[noreturn]] void bad_frame(const std::string& why) { throw Error(Errc::bad_frame, why); }

const json& require(const json& f, const char* key) {
  auto it = f.find(key);
  if (it == f.end()) bad_frame(std::string("missing '") + key + "'");
  return *it;
}

std::string text(const json& f, const char* key) {
  const json& v = require(f, key);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    bad_frame(std::string("'") + key + "' must be a non-empty string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_text(const json& f, const char* key) {
  if (!f.contains(key) || f[key].is_null()) return std::nullopt;
  return text(f, key);
}

std::uint64_t positive_id(const json& v, const char* key) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    bad_frame(std::string("'") + key + "' must be a positive integer");
  }
  return v.get<std::uint64_t>();
}

std::optional<InterventionId> optional_id(const json& f, const char* key) {
  if (!f.contains(key) || f[key].is_null()) return std::nullopt;
  return positive_id(f[key], key);
}

std::vector<std::string> strings(const json& v, const char* key) {
  if (!v.is_array()) bad_frame(std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad_frame(std::string("'") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

const Channel& channel_for(const WorldState& world, const std::string& id) {
  const Channel* ch = world.find_channel(id);
  if (!ch) throw Error(Errc::unknown_channel, "no channel '" + id + "'");
  return *ch;
}

json act_list(const ActGrammar& grammar, const ActSet& ids) {
  json list = json::array();
  // grammar order, which is the order the menu shows
  for (const auto& a : grammar.acts()) {
    if (ids.count(a.id) == 0) continue;
    json item{{"id", a.id}, {"label", a.label}, {"category", a.category}};
    if (a.opener) item["opener"] = *a.opener;
    list.push_back(std::move(item));
  }
  return list;
}

struct Dispatch {
  const json& frame;
  const WorldState& world;
  FrameOutcome& out;

  const UserId& user() const { return *out.next.user; }
  Seq next_seq() const { return world.last_seq() + out.events.size() + 1; }

  void hello() {
    if (out.next.user) bad_frame("already authenticated");
    const std::string user = text(frame, "user");
    const json& version = require(frame, "version");
    if (!version.is_number_integer()) bad_frame("'version' must be an integer");
    if (version.get<std::int64_t>() != kProtocolVersion) {
      throw Error(Errc::unsupported_version, "server speaks protocol version 1");
    }
    out.next.user = user;
    out.next.version = kProtocolVersion;
    out.replies.push_back({{"t", "welcome"}, {"seq", world.last_seq()}, {"version", kProtocolVersion}});
    if (world.directory().presence(user) != Presence::connected) {
      out.events.push_back({EventKind::presence_changed, {{"user", user}, {"state", "connected"}}});
      out.broadcasts.push_back({"", {{"t", "presence"}, {"user", user}, {"state", "connected"}}});
    }
  }

  void join() {
    const std::string id = text(frame, "channel");
    bool subscribe = false;
    if (frame.contains("subscribe")) {
      if (!frame["subscribe"].is_boolean()) bad_frame("'subscribe' must be a boolean");
      subscribe = frame["subscribe"].get<bool>();
    }
    const Channel& ch = channel_for(world, id);
    if (out.next.joined.count(id) != 0) throw Error(Errc::already_joined, "already joined '" + id + "'");
    out.next.joined.insert(id);
    if (ch.mode == ChannelMode::chat || subscribe) out.next.subscribed.insert(id);

    json nodes = json::array();
    for (InterventionId n : ch.tree.linearize()) nodes.push_back(intervention_to_json(ch.tree.node(n)));
    out.replies.push_back({{"t", "joined"},
                           {"channel", id},
                           {"mode", mode_name(ch.mode)},
                           {"interventions", std::move(nodes)}});
  }

  void post() {
    const std::string id = text(frame, "channel");
    const std::string act = text(frame, "act");
    const json& body_v = require(frame, "body");
    if (!body_v.is_string()) bad_frame("'body' must be a string");
    const std::string body = body_v.get<std::string>();
    const std::optional<InterventionId> parent = optional_id(frame, "parent");

    std::optional<std::string> ctx_activity;
    std::set<std::string> ctx_concepts;
    const bool contextual = frame.contains("ctx") && !frame["ctx"].is_null();
    if (contextual) {
      const json& ctx = frame["ctx"];
      if (!ctx.is_object()) bad_frame("'ctx' must be an object");
      ctx_activity = optional_text(ctx, "activity");
      if (ctx.contains("concepts")) {
        auto list = strings(ctx["concepts"], "concepts");
        ctx_concepts.insert(list.begin(), list.end());
      }
    }

    const Channel& ch = channel_for(world, id);
    if (out.next.joined.count(id) == 0) throw Error(Errc::not_joined, "join '" + id + "' first");
    ch.tree.check_insert(world.grammar(), parent, act, user(), body);
    if (contextual) check_context_refs(world.manifest(), ctx_activity, ctx_concepts);

    const Seq seq = next_seq();
    json payload{{"channel", id},
                 {"author", user()},
                 {"act", act},
                 {"body", body},
                 {"mode", contextual ? "contextual" : "global"}};
    if (parent) payload["parent"] = *parent;
    out.events.push_back({EventKind::intervention_posted, payload});

    Intervention node{seq, id, parent, act, user(), body, now, seq};
    json event{{"t", "event"}, {"intervention", intervention_to_json(node)}};
    if (contextual) {
      json attach{{"intervention", seq}, {"concepts", ctx_concepts}};
      if (ctx_activity) attach["activity"] = *ctx_activity;
      out.events.push_back({EventKind::context_attached, attach});
      event["ctx"] = attach;
    }
    out.replies.push_back({{"t", "ack"}, {"id", seq}, {"seq", seq}});
    out.broadcasts.push_back({id, std::move(event)});
  }

  void act_menu() {
    const Channel& ch = channel_for(world, text(frame, "channel"));
    const std::optional<InterventionId> node = optional_id(frame, "node");
    ActSet acts;
    if (node) {
      if (!ch.tree.contains(*node)) {
        throw Error(Errc::unknown_parent, "no intervention " + std::to_string(*node));
      }
      const Intervention& n = ch.tree.node(*node);
      acts = world.grammar().successors(ActRef::act(n.act), n.author == user());
    } else {
      acts = world.grammar().successors(ActRef::root(), false);
    }
    json reply{{"t", "acts"}, {"channel", ch.id}, {"list", act_list(world.grammar(), acts)}};
    reply["node"] = node ? json(*node) : json(nullptr);
    out.replies.push_back(std::move(reply));
  }

  void context_open() {
    const std::string object = text(frame, "object");
    (void)world.manifest().object(object);
    std::vector<InterventionId> activity;
    std::vector<InterventionId> content;
    for (const auto& [id, ch] : world.channels()) {
      auto a = contextual_view(ch.tree, world.attachments(), world.manifest(), object, ContextTab::activity);
      auto c = contextual_view(ch.tree, world.attachments(), world.manifest(), object, ContextTab::content);
      activity.insert(activity.end(), a.begin(), a.end());
      content.insert(content.end(), c.begin(), c.end());
    }
    std::sort(activity.begin(), activity.end());
    std::sort(content.begin(), content.end());
    out.events.push_back({EventKind::context_opened, {{"user", user()}, {"object", object}}});
    out.replies.push_back({{"t", "views"}, {"object", object}, {"activity", activity}, {"content", content}});
  }

  void open() {
    const InterventionId message = positive_id(require(frame, "message"), "message");
    const std::string mode = text(frame, "mode");
    if (mode != "contextual" && mode != "global") bad_frame("'mode' must be contextual|global");
    if (!world.channel_of(message)) {
      throw Error(Errc::unknown_node, "no intervention " + std::to_string(message));
    }
    out.events.push_back({EventKind::message_opened, {{"user", user()}, {"message", message}, {"mode", mode}}});
  }

  void peer_query() {
    const TagSet tags = normalize_tags(strings(require(frame, "tags"), "tags"));
    const json& k = require(frame, "k");
    if (!k.is_number_unsigned() || k.get<std::uint64_t>() == 0 || k.get<std::uint64_t>() > 1000) {
      bad_frame("'k' must be an integer in [1, 1000]");
    }
    auto results = match_peers(world.directory(), user(), tags, k.get<std::size_t>());
    json list = json::array();
    for (const auto& r : results) list.push_back(match_to_json(r));
    out.replies.push_back({{"t", "peers"},
                           {"results", std::move(list)},
                           {"graph", graph_to_json(peer_graph_model(world.directory(), user(), results))}});
  }

  void offers_set() {
    const TagSet tags = normalize_tags(strings(require(frame, "tags"), "tags"));
    PeerProfile updated = world.directory().profile(user());
    updated.offers = tags;
    out.events.push_back({EventKind::offers_set, {{"user", user()}, {"offers", tags}}});
    out.replies.push_back({{"t", "profile"}, {"profile", profile_to_json(updated)}});
  }

  TimestampMs now;
};

}  // namespace

FrameOutcome handle_frame(std::string_view line, const ConnectionState& state,
                          const WorldState& world, TimestampMs now) {
  FrameOutcome out{state, {}, {}, {}};
  try {
    if (line.size() > kMaxFrameBytes) bad_frame("frame exceeds 64 KiB");
    const json frame = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (frame.is_discarded() || !frame.is_object()) bad_frame("frame is not a JSON object");
    const std::string t = text(frame, "t");

    Dispatch d{frame, world, out, now};
    using Handler = void (Dispatch::*)();
    static const std::map<std::string, Handler, std::less<>> kHandlers{
        {"hello", &Dispatch::hello},
        {"join", &Dispatch::join},
        {"post", &Dispatch::post},
        {"act_menu", &Dispatch::act_menu},
        {"context_open", &Dispatch::context_open},
        {"open", &Dispatch::open},
        {"peer_query", &Dispatch::peer_query},
        {"offers_set", &Dispatch::offers_set},
    };
    auto it = kHandlers.find(t);
    if (it == kHandlers.end()) bad_frame("unknown frame type '" + t + "'");
    if (t != "hello" && !state.user) throw Error(Errc::unauthenticated, "send hello first");
    (d.*(it->second))();
  } catch (const Error& e) {
    out = FrameOutcome{state, {}, {error_frame(e)}, {}};
  } catch (const nlohmann::json::exception& e) {
    out = FrameOutcome{state, {}, {error_frame(Error(Errc::bad_frame, e.what()))}, {}};
  }
  return out;
}

std::set<ConnectionId> broadcast_policy(ChannelMode mode, const ChannelId& channel,
                                        const std::map<ConnectionId, ConnectionState>& connections) {
  std::set<ConnectionId> out;
  for (const auto& [id, c] : connections) {
    const auto& members = mode == ChannelMode::chat ? c.joined : c.subscribed;
    if (members.count(channel) != 0) out.insert(id);
  }
  return out;
}

Hub::Hub(WorldConfig config, EventLog log)
    : log_(std::move(log)), world_(replay(log_.records(), config)) {}

ConnectionId Hub::connect(Sink sink) {
  std::lock_guard lock(mu_);
  const ConnectionId id = next_id_++;
  connections_.emplace(id, Connection{ConnectionState{id, std::nullopt, {}, {}, 0}, std::move(sink)});
  return id;
}

void Hub::send(ConnectionId id, const json& frame) {
  auto it = connections_.find(id);
  if (it == connections_.end()) return;
  it->second.sink(frame.dump(-1, ' ', false, json::error_handler_t::replace) + '\n');
}

std::map<ConnectionId, ConnectionState> Hub::states() const {
  std::map<ConnectionId, ConnectionState> out;
  for (const auto& [id, c] : connections_) out.emplace(id, c.state);
  return out;
}

void Hub::commit(const PendingEvent& event, TimestampMs now) {
  const EventRecord& record = log_.append(event.kind, event.payload, now);
  world_.apply(record);
}

void Hub::receive(ConnectionId id, std::string_view line, TimestampMs now) {
  std::lock_guard lock(mu_);
  auto it = connections_.find(id);
  if (it == connections_.end()) return;

  FrameOutcome outcome = handle_frame(line, it->second.state, world_, now);
  try {
    for (const auto& e : outcome.events) commit(e, now);
  } catch (const Error& e) {
    send(id, error_frame(e));
    return;
  }
  it->second.state = std::move(outcome.next);
  for (const auto& reply : outcome.replies) send(id, reply);

  const auto table = states();
  for (const auto& b : outcome.broadcasts) {
    if (b.channel.empty()) {
      for (const auto& [cid, c] : connections_) {
        if (c.state.user) send(cid, b.frame);
      }
      continue;
    }
    const Channel* ch = world_.find_channel(b.channel);
    if (!ch) continue;
    for (ConnectionId r : broadcast_policy(ch->mode, b.channel, table)) send(r, b.frame);
  }
}

void Hub::disconnect(ConnectionId id, TimestampMs now) {
  std::lock_guard lock(mu_);
  auto it = connections_.find(id);
  if (it == connections_.end()) return;
  const std::optional<UserId> user = it->second.state.user;
  connections_.erase(it);
  if (!user) return;
  for (const auto& [cid, c] : connections_) {
    if (c.state.user == user) return;
  }
  try {
    commit({EventKind::presence_changed, {{"user", *user}, {"state", "offline"}}}, now);
  } catch (const Error&) {
    return;
  }
  const json frame{{"t", "presence"}, {"user", *user}, {"state", "offline"}};
  for (const auto& [cid, c] : connections_) {
    if (c.state.user) send(cid, frame);
  }
}

void Hub::append_system(EventKind kind, json payload, TimestampMs now) {
  std::lock_guard lock(mu_);
  commit({kind, std::move(payload)}, now);
}

void Hub::reset_presence(TimestampMs now) {
  std::lock_guard lock(mu_);
  std::vector<UserId> stale;
  for (const auto& [user, state] : world_.directory().presence_table()) {
    if (state == Presence::connected) stale.push_back(user);
  }
  for (const auto& user : stale) {
    commit({EventKind::presence_changed, {{"user", user}, {"state", "offline"}}}, now);
  }
}

WorldState Hub::snapshot() const {
  std::lock_guard lock(mu_);
  return world_;
}

std::vector<EventRecord> Hub::log_snapshot() const {
  std::lock_guard lock(mu_);
  return {log_.records().begin(), log_.records().end()};
}

Seq Hub::seq_horizon() const {
  std::lock_guard lock(mu_);
  return world_.last_seq();
}

std::size_t Hub::connection_count() const {
  std::lock_guard lock(mu_);
  return connections_.size();
}

}  // namespace dialogos
