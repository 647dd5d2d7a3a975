#include "dialogos/conversation.hpp"

#include "dialogos/error.hpp"

namespace dialogos {

void ConversationTree::check_insert(const ActGrammar& grammar, std::optional<InterventionId> parent,
                                    const ActId& act, const UserId& author,
                                    const std::string& body) const {
  const Intervention* parent_node = nullptr;
  if (parent) {
    auto it = nodes_.find(*parent);
    if (it == nodes_.end()) {
      throw Error(Errc::unknown_parent,
                  "no intervention " + std::to_string(*parent) + " in channel '" + channel_ + "'");
    }
    parent_node = &it->second;
  }
  if (!grammar.contains(act)) throw Error(Errc::unknown_act, "no act '" + act + "'");
  if (body.empty()) throw Error(Errc::empty_body, "intervention body is empty");
  if (body.size() > kMaxBodyBytes) {
    throw Error(Errc::body_too_large, std::to_string(body.size()) + " bytes exceeds 16 KiB");
  }

  const ActRef ref = parent_node ? ActRef::act(parent_node->act) : ActRef::root();
  const bool same_author = parent_node && parent_node->author == author;
  if (grammar.validate_succession(ref, act, same_author) == Succession::forbidden) {
    ActSet legal = grammar.successors(ref, same_author);
    throw Error(Errc::act_forbidden,
                "'" + act + "' cannot follow " + (ref.is_root() ? std::string("ROOT") : ref.id()))
        .with_allowed({legal.begin(), legal.end()});
  }
}

const Intervention& ConversationTree::insert(const ActGrammar& grammar,
                                             std::optional<InterventionId> parent, ActId act,
                                             UserId author, std::string body, TimestampMs ts,
                                             Seq seq) {
  check_insert(grammar, parent, act, author, body);
  if (seq <= last_seq_) {
    throw Error(Errc::unsorted_input, "seq " + std::to_string(seq) + " does not follow " +
                                          std::to_string(last_seq_));
  }

  Intervention node{seq, channel_, parent, std::move(act), std::move(author), std::move(body), ts,
                    seq};
  last_seq_ = seq;
  if (parent) {
    children_[*parent].push_back(seq);
  } else {
    roots_.push_back(seq);
  }
  return nodes_.emplace(seq, std::move(node)).first->second;
}

const Intervention& ConversationTree::insert(const ActGrammar& grammar,
                                             std::optional<InterventionId> parent, ActId act,
                                             UserId author, std::string body, TimestampMs ts) {
  return insert(grammar, parent, std::move(act), std::move(author), std::move(body), ts,
                last_seq_ + 1);
}

const Intervention& ConversationTree::node(InterventionId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::unknown_node, "no intervention " + std::to_string(id));
  return it->second;
}

const std::vector<InterventionId>& ConversationTree::children(InterventionId id) const {
  static const std::vector<InterventionId> kNone;
  auto it = children_.find(id);
  return it == children_.end() ? kNone : it->second;
}

std::vector<const Intervention*> ConversationTree::messages() const {
  std::vector<const Intervention*> out;
  out.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) out.push_back(&n);
  return out;
}

std::vector<InterventionId> ConversationTree::linearize() const {
  std::vector<InterventionId> out;
  out.reserve(nodes_.size());
  std::vector<InterventionId> stack(roots_.rbegin(), roots_.rend());
  while (!stack.empty()) {
    InterventionId id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& kids = children(id);
    stack.insert(stack.end(), kids.rbegin(), kids.rend());
  }
  return out;
}

InterventionId ConversationTree::thread_of(InterventionId id) const {
  const Intervention* n = &node(id);
  while (n->parent) n = &nodes_.at(*n->parent);
  return n->id;
}

}  // namespace dialogos
