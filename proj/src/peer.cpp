#include "dialogos/peer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dialogos/error.hpp"

namespace dialogos {

using nlohmann::json;

std::string_view presence_name(Presence p) noexcept {
  return p == Presence::connected ? "connected" : "offline";
}

std::optional<Presence> parse_presence(std::string_view s) noexcept {
  if (s == "connected") return Presence::connected;
  if (s == "offline") return Presence::offline;
  return std::nullopt;
}

std::string_view display_class_name(DisplayClass c) noexcept {
  switch (c) {
    case DisplayClass::self: return "self";
    case DisplayClass::connected: return "connected";
    case DisplayClass::contact_offline: return "contact_offline";
    case DisplayClass::stranger: return "stranger";
    case DisplayClass::document: return "document";
  }
  return "stranger";
}

TagSet normalize_tags(const std::vector<std::string>& raw) {
  TagSet out;
  for (std::string t : raw) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    t.erase(t.begin(), std::find_if(t.begin(), t.end(), not_space));
    t.erase(std::find_if(t.rbegin(), t.rend(), not_space).base(), t.end());
    for (char& c : t) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (!t.empty()) out.insert(std::move(t));
  }
  return out;
}

namespace {

TagSet renormalize(const TagSet& tags) { return normalize_tags({tags.begin(), tags.end()}); }

}  // namespace

Fraction jaccard(const TagSet& a, const TagSet& b) {
  std::size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  const std::size_t total = a.size() + b.size() - common;
  return {static_cast<std::int64_t>(common), static_cast<std::int64_t>(total)};
}

DisplayClass classify(const PeerProfile& requester, const PeerProfile& entity) {
  if (entity.id == requester.id) return DisplayClass::self;
  if (entity.presence == Presence::connected) return DisplayClass::connected;
  if (requester.contacts.count(entity.id) != 0) return DisplayClass::contact_offline;
  return DisplayClass::stranger;
}

void Directory::upsert_profile(PeerProfile profile) {
  if (profile.id.empty()) throw Error(Errc::malformed_doc, "profile id is empty");
  if (profile.contacts.count(profile.id) != 0) {
    throw Error(Errc::malformed_doc, "profile '" + profile.id + "' lists itself as a contact");
  }
  for (const auto& [course, fraction] : profile.progress) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
      throw Error(Errc::malformed_doc, "progress for '" + course + "' is outside [0,1]");
    }
  }
  profile.competences = renormalize(profile.competences);
  profile.offers = renormalize(profile.offers);
  presence_[profile.id] = profile.presence;
  profiles_[profile.id] = std::move(profile);
}

void Directory::upsert_document(PeerDocument document) {
  if (document.id.empty()) throw Error(Errc::malformed_doc, "document id is empty");
  document.tags = renormalize(document.tags);
  documents_[document.id] = std::move(document);
}

const PeerProfile& Directory::set_offers(const UserId& user, TagSet offers) {
  auto it = profiles_.find(user);
  if (it == profiles_.end()) throw Error(Errc::unknown_user, "no profile '" + user + "'");
  it->second.offers = renormalize(offers);
  return it->second;
}

void Directory::set_presence(const UserId& user, Presence presence) {
  presence_[user] = presence;
  if (auto it = profiles_.find(user); it != profiles_.end()) it->second.presence = presence;
}

bool Directory::has_user(std::string_view id) const { return profiles_.find(id) != profiles_.end(); }

const PeerProfile& Directory::profile(std::string_view id) const {
  auto it = profiles_.find(id);
  if (it == profiles_.end()) throw Error(Errc::unknown_user, "no profile '" + std::string(id) + "'");
  return it->second;
}

Presence Directory::presence(std::string_view id) const {
  auto it = presence_.find(id);
  return it == presence_.end() ? Presence::offline : it->second;
}

std::vector<MatchResult> match_peers(const Directory& directory, const UserId& requester,
                                     const TagSet& query, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  const PeerProfile& self = directory.profile(requester);
  const TagSet q = renormalize(query);

  std::vector<MatchResult> out;
  for (const auto& [id, p] : directory.profiles()) {
    if (id == requester) continue;
    TagSet pool = p.competences;
    pool.insert(p.offers.begin(), p.offers.end());
    Fraction s = jaccard(q, pool);
    if (s.num() > 0) out.push_back({id, EntityKind::user, s, classify(self, p)});
  }
  for (const auto& [id, d] : directory.documents()) {
    Fraction s = jaccard(q, d.tags);
    if (s.num() > 0) out.push_back({id, EntityKind::document, s, DisplayClass::document});
  }

  auto rank = [](const MatchResult& r) { return r.display_class == DisplayClass::connected ? 0 : 1; };
  std::sort(out.begin(), out.end(), [&](const MatchResult& a, const MatchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    if (a.entity != b.entity) return a.entity < b.entity;
    return a.kind < b.kind;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

namespace {

std::vector<Tag> top_tags(const TagSet& tags) {
  std::vector<Tag> out;
  for (const auto& t : tags) {
    if (out.size() == 3) break;
    out.push_back(t);
  }
  return out;
}

}  // namespace

PeerGraph peer_graph_model(const Directory& directory, const UserId& requester,
                           const std::vector<MatchResult>& results) {
  PeerGraph g;
  const PeerProfile& self = directory.profile(requester);
  g.nodes.push_back({self.id, EntityKind::user, DisplayClass::self,
                     {self.name, top_tags(self.competences), self.presence}});
  for (const auto& r : results) {
    PeerGraphNode node{r.entity, r.kind, r.display_class, {}};
    if (r.kind == EntityKind::user) {
      const PeerProfile& p = directory.profile(r.entity);
      node.card = {p.name, top_tags(p.competences), p.presence};
    } else if (auto it = directory.documents().find(r.entity); it != directory.documents().end()) {
      node.card = {it->second.title, top_tags(it->second.tags), std::nullopt};
    }
    g.nodes.push_back(std::move(node));
    g.edges.push_back({requester, r.entity, r.score.value()});
  }
  return g;
}

namespace {

TagSet tag_field(const json& j, const char* key, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw Error(Errc::malformed_doc, std::string("missing '") + key + "'");
    return {};
  }
  if (!it->is_array()) throw Error(Errc::malformed_doc, std::string("'") + key + "' must be an array");
  std::vector<std::string> raw;
  for (const auto& v : *it) {
    if (!v.is_string()) throw Error(Errc::malformed_doc, std::string("'") + key + "' must hold strings");
    raw.push_back(v.get<std::string>());
  }
  return normalize_tags(raw);
}

std::string text_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(Errc::malformed_doc, std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

PeerProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::malformed_doc, "profile must be an object");
  PeerProfile p;
  p.id = text_field(j, "id");
  p.name = j.contains("name") ? text_field(j, "name") : p.id;
  p.competences = tag_field(j, "competences", false);
  p.offers = tag_field(j, "offers", false);
  if (auto it = j.find("progress"); it != j.end()) {
    if (!it->is_object()) throw Error(Errc::malformed_doc, "progress must be an object");
    for (const auto& [course, v] : it->items()) {
      if (!v.is_number()) throw Error(Errc::malformed_doc, "progress values must be numbers");
      p.progress[course] = v.get<double>();
    }
  }
  if (auto it = j.find("presence"); it != j.end()) {
    auto pr = it->is_string() ? parse_presence(it->get<std::string>()) : std::nullopt;
    if (!pr) throw Error(Errc::malformed_doc, "presence must be connected|offline");
    p.presence = *pr;
  }
  if (auto it = j.find("contacts"); it != j.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "contacts must be an array");
    for (const auto& v : *it) {
      if (!v.is_string()) throw Error(Errc::malformed_doc, "contacts must hold strings");
      p.contacts.insert(v.get<std::string>());
    }
  }
  return p;
}

json profile_to_json(const PeerProfile& p) {
  json progress = json::object();
  for (const auto& [course, v] : p.progress) progress[course] = v;
  return json{{"id", p.id},
              {"name", p.name},
              {"competences", p.competences},
              {"offers", p.offers},
              {"progress", std::move(progress)},
              {"presence", presence_name(p.presence)},
              {"contacts", p.contacts}};
}

PeerDocument document_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::malformed_doc, "document must be an object");
  PeerDocument d;
  d.id = text_field(j, "id");
  d.title = j.contains("title") ? text_field(j, "title") : d.id;
  d.tags = tag_field(j, "tags", false);
  return d;
}

json document_to_json(const PeerDocument& d) {
  return json{{"id", d.id}, {"title", d.title}, {"tags", d.tags}};
}

json match_to_json(const MatchResult& r) {
  return json{{"entity", r.entity},
              {"kind", r.kind == EntityKind::user ? "user" : "document"},
              {"score", r.score.value()},
              {"display_class", display_class_name(r.display_class)}};
}

json graph_to_json(const PeerGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json card{{"name", n.card.name}, {"top", n.card.top_tags}};
    if (n.card.presence) card["presence"] = presence_name(*n.card.presence);
    nodes.push_back({{"id", n.id},
                     {"kind", n.kind == EntityKind::user ? "user" : "document"},
                     {"display_class", display_class_name(n.display_class)},
                     {"card", std::move(card)}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

Directory load_directory(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::malformed_doc, "directory must be an object");
  Directory dir;
  if (auto it = doc.find("profiles"); it != doc.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "profiles must be an array");
    for (const auto& p : *it) dir.upsert_profile(profile_from_json(p));
  }
  if (auto it = doc.find("documents"); it != doc.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "documents must be an array");
    for (const auto& d : *it) dir.upsert_document(document_from_json(d));
  }
  return dir;
}

Directory load_directory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::malformed_doc, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::malformed_doc, path + " is not valid JSON");
  return load_directory(doc);
}

}  // namespace dialogos
