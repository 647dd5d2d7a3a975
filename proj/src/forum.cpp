#include "dialogos/forum.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dialogos/error.hpp"

namespace dialogos {

using nlohmann::json;

namespace {

void require_sorted(std::span<const Intervention* const> messages) {
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i]->seq <= messages[i - 1]->seq) {
      throw Error(Errc::unsorted_input, "seq " + std::to_string(messages[i]->seq) +
                                            " does not follow " +
                                            std::to_string(messages[i - 1]->seq));
    }
  }
}

void require_window(Duration window) {
  if (window.count() <= 0) throw std::invalid_argument("session window must be positive");
}

bool continues(const Intervention& prev, const Intervention& cur, Duration window) {
  return prev.author == cur.author && cur.ts - prev.ts <= window.count();
}

}  // namespace

std::vector<ForumSession> group_sessions(std::span<const Intervention* const> messages,
                                         Duration window) {
  require_window(window);
  require_sorted(messages);
  std::vector<ForumSession> out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const Intervention& m = *messages[i];
    if (i == 0 || !continues(*messages[i - 1], m, window)) {
      out.push_back(ForumSession{m.author, {}, m.ts, m.ts});
    }
    ForumSession& s = out.back();
    s.members.push_back(m.id);
    s.start_ts = std::min(s.start_ts, m.ts);
    s.end_ts = std::max(s.end_ts, m.ts);
  }
  return out;
}

std::size_t consecutive_count(std::span<const Intervention* const> messages, Duration window) {
  require_window(window);
  require_sorted(messages);
  std::size_t n = 0;
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (continues(*messages[i - 1], *messages[i], window)) ++n;
  }
  return n;
}

Fraction consecutive_fraction(std::span<const Intervention* const> messages, Duration window) {
  const std::size_t n = consecutive_count(messages, window);
  return {static_cast<std::int64_t>(n), static_cast<std::int64_t>(messages.size())};
}

const std::vector<InterventionId>& SessionGrid::cell(InterventionId row, std::size_t column) const {
  static const std::vector<InterventionId> kEmpty;
  auto it = cells.find({row, column});
  return it == cells.end() ? kEmpty : it->second;
}

std::size_t SessionGrid::message_count() const {
  std::size_t n = 0;
  for (const auto& [key, ids] : cells) n += ids.size();
  return n;
}

SessionGrid build_session_grid(const ConversationTree& tree, Duration window) {
  const auto messages = tree.messages();
  SessionGrid grid;
  grid.rows = tree.roots();
  grid.columns = group_sessions(messages, window);
  std::stable_sort(grid.columns.begin(), grid.columns.end(),
                   [](const ForumSession& a, const ForumSession& b) {
                     if (a.start_ts != b.start_ts) return a.start_ts < b.start_ts;
                     return a.members.front() < b.members.front();
                   });
  for (std::size_t c = 0; c < grid.columns.size(); ++c) {
    for (InterventionId id : grid.columns[c].members) {
      grid.cells[{tree.thread_of(id), c}].push_back(id);
    }
  }
  return grid;
}

CourseManifest::CourseManifest(Activity root, std::map<std::string, LearningObject> objects,
                               std::set<std::string> concepts,
                               std::vector<std::pair<std::string, std::string>> concept_edges)
    : root_(std::move(root)),
      objects_(std::move(objects)),
      concepts_(std::move(concepts)),
      concept_edges_(std::move(concept_edges)) {
  std::vector<std::pair<const Activity*, std::optional<std::string>>> stack{{&root_, std::nullopt}};
  while (!stack.empty()) {
    auto [a, parent] = stack.back();
    stack.pop_back();
    if (a->id.empty()) throw Error(Errc::malformed_doc, "activity with empty id");
    if (!parent_.emplace(a->id, parent).second) {
      throw Error(Errc::malformed_doc, "duplicate activity id '" + a->id + "'");
    }
    for (const auto& child : a->children) stack.emplace_back(&child, a->id);
  }
  for (const auto& [id, obj] : objects_) {
    if (!has_activity(obj.activity)) {
      throw Error(Errc::dangling_ref, "object '" + id + "' names missing activity '" + obj.activity + "'");
    }
    for (const auto& c : obj.concepts) {
      if (!has_concept(c)) {
        throw Error(Errc::dangling_ref, "object '" + id + "' names missing concept '" + c + "'");
      }
    }
  }
  for (const auto& [a, b] : concept_edges_) {
    if (!has_concept(a) || !has_concept(b)) {
      throw Error(Errc::dangling_ref, "concept edge " + a + " -> " + b + " names a missing concept");
    }
  }
}

bool CourseManifest::has_activity(std::string_view id) const { return parent_.find(id) != parent_.end(); }

bool CourseManifest::has_concept(std::string_view id) const {
  return concepts_.count(std::string(id)) != 0;
}

const LearningObject& CourseManifest::object(std::string_view id) const {
  auto it = objects_.find(std::string(id));
  if (it == objects_.end()) throw Error(Errc::unknown_object, "no learning object '" + std::string(id) + "'");
  return it->second;
}

std::set<std::string> CourseManifest::activity_closure(std::string_view id) const {
  if (!has_activity(id)) throw Error(Errc::dangling_ref, "no activity '" + std::string(id) + "'");
  std::set<std::string> out;
  std::vector<const Activity*> stack{&root_};
  const Activity* start = nullptr;
  while (!stack.empty() && start == nullptr) {
    const Activity* a = stack.back();
    stack.pop_back();
    if (a->id == id) start = a;
    for (const auto& c : a->children) stack.push_back(&c);
  }
  stack.assign({start});
  while (!stack.empty()) {
    const Activity* a = stack.back();
    stack.pop_back();
    out.insert(a->id);
    for (const auto& c : a->children) stack.push_back(&c);
  }
  return out;
}

namespace {

Activity parse_activity(const json& j, int depth) {
  if (depth > 256) throw Error(Errc::malformed_doc, "activity tree too deep");
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw Error(Errc::malformed_doc, "activity must be an object with a string id");
  }
  Activity a;
  a.id = j["id"].get<std::string>();
  if (auto it = j.find("title"); it != j.end()) {
    if (!it->is_string()) throw Error(Errc::malformed_doc, "activity title must be a string");
    a.title = it->get<std::string>();
  }
  if (auto it = j.find("children"); it != j.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "activity children must be an array");
    for (const auto& c : *it) a.children.push_back(parse_activity(c, depth + 1));
  }
  return a;
}

std::set<std::string> string_set(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(Errc::malformed_doc, where + " must be an array");
  std::set<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw Error(Errc::malformed_doc, where + " must hold strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

CourseManifest load_manifest(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::malformed_doc, "manifest must be an object");
  auto acts = doc.find("activities");
  if (acts == doc.end() || !acts->is_object() || acts->empty()) {
    throw Error(Errc::malformed_doc, "manifest needs a non-empty activities tree");
  }
  Activity root = parse_activity(*acts, 0);

  std::map<std::string, LearningObject> objects;
  if (auto it = doc.find("objects"); it != doc.end()) {
    if (!it->is_object()) throw Error(Errc::malformed_doc, "objects must be an object");
    for (const auto& [id, o] : it->items()) {
      if (!o.is_object() || !o.contains("activity") || !o["activity"].is_string()) {
        throw Error(Errc::malformed_doc, "object '" + id + "' needs a string activity");
      }
      LearningObject obj{o["activity"].get<std::string>(), {}};
      if (auto c = o.find("concepts"); c != o.end()) obj.concepts = string_set(*c, "concepts of " + id);
      objects.emplace(id, std::move(obj));
    }
  }

  std::set<std::string> concepts;
  if (auto it = doc.find("concepts"); it != doc.end()) concepts = string_set(*it, "concepts");

  std::vector<std::pair<std::string, std::string>> edges;
  if (auto it = doc.find("concept_edges"); it != doc.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "concept_edges must be an array");
    for (const auto& e : *it) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        throw Error(Errc::malformed_doc, "concept edge must be a pair of ids");
      }
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return CourseManifest(std::move(root), std::move(objects), std::move(concepts), std::move(edges));
}

CourseManifest load_manifest_text(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::malformed_doc, "manifest is not valid JSON");
  return load_manifest(doc);
}

CourseManifest load_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::malformed_doc, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_manifest_text(buf.str());
}

void check_context_refs(const CourseManifest& manifest, const std::optional<std::string>& activity,
                        const std::set<std::string>& concepts) {
  if (activity && !manifest.has_activity(*activity)) {
    throw Error(Errc::dangling_ref, "no activity '" + *activity + "'");
  }
  for (const auto& c : concepts) {
    if (!manifest.has_concept(c)) throw Error(Errc::dangling_ref, "no concept '" + c + "'");
  }
}

void attach_context(AttachmentMap& attachments, const ConversationTree& tree,
                    const CourseManifest& manifest, InterventionId intervention,
                    std::optional<std::string> activity, std::set<std::string> concepts) {
  if (!tree.contains(intervention)) {
    throw Error(Errc::unknown_node, "no intervention " + std::to_string(intervention));
  }
  check_context_refs(manifest, activity, concepts);
  attachments[intervention] = ContextAttachment{intervention, std::move(activity), std::move(concepts)};
}

std::vector<InterventionId> contextual_view(const ConversationTree& tree,
                                            const AttachmentMap& attachments,
                                            const CourseManifest& manifest,
                                            std::string_view object, ContextTab tab) {
  const LearningObject& obj = manifest.object(object);
  const std::set<std::string> activities =
      tab == ContextTab::activity ? manifest.activity_closure(obj.activity) : std::set<std::string>{};

  std::vector<InterventionId> out;
  // attachments are keyed by id == seq, so map order is ascending seq
  for (const auto& [id, att] : attachments) {
    if (!tree.contains(id)) continue;
    bool keep = false;
    if (tab == ContextTab::activity) {
      keep = att.activity && activities.count(*att.activity) != 0;
    } else {
      keep = std::any_of(att.concepts.begin(), att.concepts.end(),
                         [&](const std::string& c) { return obj.concepts.count(c) != 0; });
    }
    if (keep) out.push_back(id);
  }
  return out;
}

}  // namespace dialogos
