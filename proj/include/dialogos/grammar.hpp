// dialogos/grammar.hpp — speech acts and the act succession graph.
//
// A grammar names a vocabulary of acts, the acts that may open a discussion
// (root successors), which act may answer which (edges), and the
// auto-reactive acts an author may only attach to their own intervention.
// Grammars are immutable once loaded and safe to share across threads.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dialogos {

using ActId = std::string;
using ActSet = std::set<ActId>;

// Categories used when a grammar document does not declare its own.
inline const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> kCategories{
      "salutation", "initiatif", "reactif", "evaluatif", "auto_reactif"};
  return kCategories;
}

struct SpeechAct {
  ActId id;
  std::string label;
  std::string category;
  std::optional<std::string> opener;
  bool placeholder = false;

  friend bool operator==(const SpeechAct&, const SpeechAct&) = default;
};

// Either the start of a new discussion or an existing act.
class ActRef {
 public:
  static ActRef root() { return ActRef{}; }
  static ActRef act(ActId id) { return ActRef{std::move(id)}; }

  [[nodiscard]] bool is_root() const noexcept { return !id_.has_value(); }
  [[nodiscard]] const ActId& id() const { return id_.value(); }

  friend bool operator==(const ActRef&, const ActRef&) = default;

 private:
  ActRef() = default;
  explicit ActRef(ActId id) : id_(std::move(id)) {}
  std::optional<ActId> id_;
};

enum class Succession { allowed, forbidden };

class ActGrammar {
 public:
  // Validates every invariant; throws Error(MALFORMED_DOC | UNKNOWN_ACT_REF | EMPTY_ROOT).
  ActGrammar(std::string name, std::vector<std::string> categories, std::vector<SpeechAct> acts,
             ActSet root_successors, std::map<ActId, ActSet> edges, ActSet auto_reactive);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::vector<std::string>& categories() const noexcept { return categories_; }
  [[nodiscard]] const std::vector<SpeechAct>& acts() const noexcept { return acts_; }
  [[nodiscard]] const ActSet& root_successors() const noexcept { return root_; }
  [[nodiscard]] const std::map<ActId, ActSet>& edges() const noexcept { return edges_; }
  [[nodiscard]] const ActSet& auto_reactive() const noexcept { return auto_reactive_; }

  [[nodiscard]] bool contains(std::string_view id) const;
  // Throws UNKNOWN_ACT.
  [[nodiscard]] const SpeechAct& act(std::string_view id) const;

  // Acts legal after `parent`. Auto-reactive acts are added only when the
  // replying author wrote the parent. Throws UNKNOWN_ACT.
  [[nodiscard]] ActSet successors(const ActRef& parent, bool same_author) const;

  // Throws UNKNOWN_ACT when either parent or act is not in the vocabulary.
  [[nodiscard]] Succession validate_succession(const ActRef& parent, std::string_view act,
                                               bool same_author) const;

  // Acts with no successor even when answering themselves.
  [[nodiscard]] std::vector<ActId> terminal_acts() const;

  friend bool operator==(const ActGrammar&, const ActGrammar&) = default;

 private:
  std::string name_;
  std::vector<std::string> categories_;
  std::vector<SpeechAct> acts_;
  std::map<ActId, std::size_t, std::less<>> index_;
  ActSet root_;
  std::map<ActId, ActSet> edges_;
  ActSet auto_reactive_;
};

// Grammar-config document <-> grammar.
ActGrammar load_grammar(const nlohmann::json& doc);
ActGrammar load_grammar_text(std::string_view text);
ActGrammar load_grammar_file(const std::string& path);
nlohmann::json emit_grammar(const ActGrammar& grammar);

// True for non-empty [a-z_]+ tokens.
bool is_token(std::string_view s) noexcept;

}  // namespace dialogos
