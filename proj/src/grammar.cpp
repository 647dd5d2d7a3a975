#include "dialogos/grammar.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dialogos/error.hpp"

namespace dialogos {

using nlohmann::json;

bool is_token(std::string_view s) noexcept {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; });
}

ActGrammar::ActGrammar(std::string name, std::vector<std::string> categories,
                       std::vector<SpeechAct> acts, ActSet root_successors,
                       std::map<ActId, ActSet> edges, ActSet auto_reactive)
    : name_(std::move(name)),
      categories_(std::move(categories)),
      acts_(std::move(acts)),
      root_(std::move(root_successors)),
      edges_(std::move(edges)),
      auto_reactive_(std::move(auto_reactive)) {
  if (categories_.empty()) throw Error(Errc::malformed_doc, "grammar declares no categories");
  for (const auto& c : categories_) {
    if (!is_token(c)) throw Error(Errc::malformed_doc, "category '" + c + "' is not a token");
  }
  if (acts_.empty()) throw Error(Errc::malformed_doc, "grammar has no acts");
  for (std::size_t i = 0; i < acts_.size(); ++i) {
    const SpeechAct& a = acts_[i];
    if (!is_token(a.id)) throw Error(Errc::malformed_doc, "act id '" + a.id + "' is not [a-z_]+");
    if (std::find(categories_.begin(), categories_.end(), a.category) == categories_.end()) {
      throw Error(Errc::malformed_doc, "act '" + a.id + "' has unknown category '" + a.category + "'");
    }
    if (!index_.emplace(a.id, i).second) {
      throw Error(Errc::malformed_doc, "duplicate act id '" + a.id + "'");
    }
  }

  auto require = [this](const ActId& id, const char* where) {
    if (!contains(id)) {
      throw Error(Errc::unknown_act_ref, std::string(where) + " names missing act '" + id + "'");
    }
  };
  if (root_.empty()) throw Error(Errc::empty_root, "root successor set is empty");
  for (const auto& id : root_) require(id, "root");
  for (const auto& [from, targets] : edges_) {
    require(from, "edges");
    for (const auto& to : targets) require(to, "edges");
  }
  for (const auto& id : auto_reactive_) {
    require(id, "auto_reactive");
    if (root_.count(id) != 0) {
      throw Error(Errc::malformed_doc, "auto-reactive act '" + id + "' cannot open a discussion");
    }
  }
}

bool ActGrammar::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const SpeechAct& ActGrammar::act(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::unknown_act, "no act '" + std::string(id) + "'");
  return acts_[it->second];
}

ActSet ActGrammar::successors(const ActRef& parent, bool same_author) const {
  if (parent.is_root()) return root_;
  if (!contains(parent.id())) throw Error(Errc::unknown_act, "no act '" + parent.id() + "'");
  ActSet out;
  if (auto it = edges_.find(parent.id()); it != edges_.end()) out = it->second;
  if (same_author) {
    out.insert(auto_reactive_.begin(), auto_reactive_.end());
  } else {
    // edges may name an auto-reactive act; it still needs the same author
    for (const auto& id : auto_reactive_) out.erase(id);
  }
  return out;
}

Succession ActGrammar::validate_succession(const ActRef& parent, std::string_view act,
                                           bool same_author) const {
  if (!contains(act)) throw Error(Errc::unknown_act, "no act '" + std::string(act) + "'");
  return successors(parent, same_author).count(ActId(act)) != 0 ? Succession::allowed
                                                                 : Succession::forbidden;
}

std::vector<ActId> ActGrammar::terminal_acts() const {
  std::vector<ActId> out;
  for (const auto& a : acts_) {
    if (successors(ActRef::act(a.id), true).empty()) out.push_back(a.id);
  }
  return out;
}

namespace {

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::malformed_doc, std::string("missing key '") + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) throw Error(Errc::malformed_doc, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

ActSet id_set(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(Errc::malformed_doc, where + " must be an array");
  ActSet out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error(Errc::malformed_doc, where + " must hold strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

ActGrammar load_grammar(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::malformed_doc, "grammar document must be an object");

  std::vector<std::string> categories = default_categories();
  if (auto it = doc.find("categories"); it != doc.end()) {
    if (!it->is_array()) throw Error(Errc::malformed_doc, "categories must be an array");
    categories.clear();
    for (const auto& c : *it) {
      if (!c.is_string()) throw Error(Errc::malformed_doc, "categories must hold strings");
      categories.push_back(c.get<std::string>());
    }
  }

  const json& acts_doc = field(doc, "acts");
  if (!acts_doc.is_array()) throw Error(Errc::malformed_doc, "acts must be an array");
  std::vector<SpeechAct> acts;
  for (const auto& a : acts_doc) {
    if (!a.is_object()) throw Error(Errc::malformed_doc, "act entries must be objects");
    SpeechAct act{string_field(a, "id"), string_field(a, "label"), string_field(a, "category"),
                  std::nullopt, false};
    if (auto it = a.find("opener"); it != a.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(Errc::malformed_doc, "opener must be a string");
      act.opener = it->get<std::string>();
    }
    if (auto it = a.find("placeholder"); it != a.end()) {
      if (!it->is_boolean()) throw Error(Errc::malformed_doc, "placeholder must be a boolean");
      act.placeholder = it->get<bool>();
    }
    acts.push_back(std::move(act));
  }

  ActSet root = id_set(field(doc, "root"), "root");

  std::map<ActId, ActSet> edges;
  const json& edges_doc = field(doc, "edges");
  if (!edges_doc.is_object()) throw Error(Errc::malformed_doc, "edges must be an object");
  for (const auto& [from, targets] : edges_doc.items()) {
    edges[from] = id_set(targets, "edges." + from);
  }

  ActSet auto_reactive;
  if (auto it = doc.find("auto_reactive"); it != doc.end()) {
    auto_reactive = id_set(*it, "auto_reactive");
  }

  return ActGrammar(string_field(doc, "name"), std::move(categories), std::move(acts),
                    std::move(root), std::move(edges), std::move(auto_reactive));
}

ActGrammar load_grammar_text(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(Errc::malformed_doc, "grammar document is not valid JSON");
  return load_grammar(doc);
}

ActGrammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::malformed_doc, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grammar_text(buf.str());
}

json emit_grammar(const ActGrammar& grammar) {
  json acts = json::array();
  for (const auto& a : grammar.acts()) {
    json j{{"id", a.id}, {"label", a.label}, {"category", a.category}};
    if (a.opener) j["opener"] = *a.opener;
    if (a.placeholder) j["placeholder"] = true;
    acts.push_back(std::move(j));
  }
  json edges = json::object();
  for (const auto& [from, targets] : grammar.edges()) edges[from] = targets;
  return json{{"name", grammar.name()},
              {"categories", grammar.categories()},
              {"acts", std::move(acts)},
              {"root", grammar.root_successors()},
              {"edges", std::move(edges)},
              {"auto_reactive", grammar.auto_reactive()}};
}

}  // namespace dialogos
