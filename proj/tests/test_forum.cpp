#include <doctest.h>

#include <functional>
#include <random>

#include "dialogos/error.hpp"
#include "dialogos/forum.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace dialogos;
using namespace std::chrono_literals;

namespace {

const ActGrammar& splach() {
  static const ActGrammar g = load_grammar_file(std::string(DIALOGOS_DATA_DIR) + "/splach.grammar.json");
  return g;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dialogos::Error");
  return Errc::malformed_doc;
}

Intervention msg(InterventionId id, const char* author, TimestampMs ts) {
  Intervention m;
  m.id = id;
  m.seq = id;
  m.author = author;
  m.ts = ts;
  m.act = "saluer";
  m.body = "x";
  return m;
}

std::vector<const Intervention*> ptrs(const std::vector<Intervention>& v) {
  std::vector<const Intervention*> out;
  for (const auto& m : v) out.push_back(&m);
  return out;
}

// Random activity tree with `n` nodes; parent_of receives the edges.
Activity random_activity(std::mt19937_64& rng, std::size_t n,
                         std::map<std::string, std::string>& parent_of) {
  std::vector<std::string> ids{"a0"};
  for (std::size_t i = 1; i < n; ++i) {
    const std::string id = "a" + std::to_string(i);
    parent_of[id] = ids[gen::pick(rng, ids.size())];
    ids.push_back(id);
  }
  std::function<Activity(const std::string&)> build = [&](const std::string& id) {
    Activity a{id, "T " + id, {}};
    for (const auto& child : ids) {
      auto it = parent_of.find(child);
      if (it != parent_of.end() && it->second == id) a.children.push_back(build(child));
    }
    return a;
  };
  return build("a0");
}

}  // namespace

TEST_CASE("author runs in mailgroup order") {
  // a, a, b, a: one continuation out of four messages
  const std::vector<Intervention> v{msg(1, "a", 0), msg(2, "a", 60'000), msg(3, "b", 120'000),
                                    msg(4, "a", 180'000)};
  const auto p = ptrs(v);
  const auto s = group_sessions(p, 60min);
  REQUIRE(s.size() == 3);
  CHECK(s[0].members == std::vector<InterventionId>{1, 2});
  CHECK(s[0].start_ts == 0);
  CHECK(s[0].end_ts == 60'000);
  CHECK(s[2].author == "a");
  CHECK(consecutive_count(p, 60min) == 1);
  CHECK(consecutive_fraction(p, 60min) == Fraction(1, 4));
  CHECK(consecutive_fraction(p, 60min).to_fixed() == "0.2500");
}

TEST_CASE("window boundary is inclusive") {
  const std::vector<Intervention> v{msg(1, "a", 0), msg(2, "a", 3'600'000), msg(3, "a", 7'200'001)};
  const auto s = group_sessions(ptrs(v), 60min);
  REQUIRE(s.size() == 2);
  CHECK(s[0].members.size() == 2);
}

TEST_CASE("session input checks") {
  const std::vector<Intervention> v{msg(2, "a", 0), msg(1, "a", 1)};
  CHECK(code_of([&] { group_sessions(ptrs(v), 60min); }) == Errc::unsorted_input);
  CHECK_THROWS_AS(group_sessions(ptrs({}), 0ms), std::invalid_argument);
  CHECK(group_sessions(ptrs({}), 1ms).empty());
  CHECK(consecutive_fraction(ptrs({}), 1ms) == Fraction(0, 1));
}

TEST_CASE("session grid of a small forum") {
  ConversationTree t;
  const auto& g = splach();
  const auto a = t.insert(g, std::nullopt, "demander", "ana", "q", 0).id;
  const auto b = t.insert(g, a, "repondre", "bob", "r", 60'000).id;
  const auto c = t.insert(g, std::nullopt, "proposer", "bob", "p", 120'000).id;
  const auto d = t.insert(g, b, "questionner", "ana", "q2", 180'000).id;
  const auto grid = build_session_grid(t, 60min);
  CHECK(grid.rows == std::vector<InterventionId>{a, c});
  REQUIRE(grid.columns.size() == 3);
  CHECK(grid.cell(a, 0) == std::vector<InterventionId>{a});
  CHECK(grid.cell(a, 1) == std::vector<InterventionId>{b});
  CHECK(grid.cell(c, 1) == std::vector<InterventionId>{c});
  CHECK(grid.cell(a, 2) == std::vector<InterventionId>{d});
  CHECK(grid.cell(c, 0).empty());
  CHECK(grid.message_count() == 4);
}

TEST_CASE("property: sessions and grid agree with the bucketing oracle") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 60; ++round) {
    const auto t = gen::random_tree(splach(), rng, gen::pick(rng, 150), 1 + gen::pick(rng, 3));
    const auto nodes = gen::copy_nodes(t);
    const auto msgs = t.messages();
    const Duration window = std::chrono::minutes(1 + gen::pick(rng, 90));
    const auto s = group_sessions(msgs, window);
    const auto expected = oracle::sessions(nodes, window.count());
    REQUIRE(s.size() == expected.size());
    std::size_t continuations = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i].author == expected[i].first);
      CHECK(s[i].members == expected[i].second);
      continuations += s[i].members.size() - 1;
    }
    // consecutive fraction is the sum of (|s| - 1) over N
    CHECK(consecutive_fraction(msgs, window) ==
          Fraction(static_cast<std::int64_t>(continuations), static_cast<std::int64_t>(nodes.size())));

    const auto grid = build_session_grid(t, window);
    CHECK(grid.message_count() == t.size());
    const auto buckets = oracle::grid_buckets(nodes, window.count());
    CHECK(grid.cells.size() == buckets.size());
    for (const auto& [key, members] : buckets) {
      CHECK(grid.cell(key.first, key.second) == members);
    }
  }
}

TEST_CASE("property: wider windows never split more") {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 40; ++round) {
    const auto t = gen::random_tree(splach(), rng, 1 + gen::pick(rng, 100), 2);
    const auto msgs = t.messages();
    std::size_t prev = msgs.size() + 1;
    for (int minutes : {1, 5, 15, 30, 60, 120, 600}) {
      const auto n = group_sessions(msgs, std::chrono::minutes(minutes)).size();
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("manifest loading and closure") {
  const auto m = load_manifest_file(std::string(DIALOGOS_DATA_DIR) + "/course.manifest.json");
  CHECK(m.activity_count() == 2);
  CHECK(m.activity_closure("a1") == std::set<std::string>{"a1", "a2"});
  CHECK(m.activity_closure("a2") == std::set<std::string>{"a2"});
  CHECK(m.object("o3").concepts == std::set<std::string>{"c2", "c4"});
  CHECK(code_of([&] { (void)m.object("o9"); }) == Errc::unknown_object);

  auto doc = nlohmann::json::parse(R"({"activities":{"id":"a","children":[]},
    "objects":{"o":{"activity":"zz","concepts":[]}},"concepts":[]})");
  CHECK(code_of([&] { load_manifest(doc); }) == Errc::dangling_ref);
  doc["objects"]["o"]["activity"] = "a";
  doc["objects"]["o"]["concepts"] = {"k"};
  CHECK(code_of([&] { load_manifest(doc); }) == Errc::dangling_ref);
  CHECK(code_of([&] { load_manifest_text("[]"); }) == Errc::malformed_doc);
}

TEST_CASE("contextual view tabs") {
  const auto m = load_manifest_file(std::string(DIALOGOS_DATA_DIR) + "/course.manifest.json");
  ConversationTree t;
  AttachmentMap att;
  const auto& g = splach();
  const auto x = t.insert(g, std::nullopt, "demander", "a", "x", 1).id;
  const auto y = t.insert(g, std::nullopt, "demander", "a", "y", 2).id;
  const auto z = t.insert(g, std::nullopt, "demander", "a", "z", 3).id;
  t.insert(g, std::nullopt, "demander", "a", "w", 4);
  attach_context(att, t, m, x, "a1", {"c1"});
  attach_context(att, t, m, y, "a2", {});
  attach_context(att, t, m, z, std::nullopt, {"c4"});
  CHECK(contextual_view(t, att, m, "o1", ContextTab::activity) == std::vector<InterventionId>{x, y});
  CHECK(contextual_view(t, att, m, "o2", ContextTab::activity) == std::vector<InterventionId>{y});
  CHECK(contextual_view(t, att, m, "o1", ContextTab::content) == std::vector<InterventionId>{x});
  CHECK(contextual_view(t, att, m, "o3", ContextTab::content) == std::vector<InterventionId>{z});
  CHECK(code_of([&] { contextual_view(t, att, m, "nope", ContextTab::content); }) ==
        Errc::unknown_object);
  CHECK(code_of([&] { attach_context(att, t, m, 99, "a1", {}); }) == Errc::unknown_node);
  CHECK(code_of([&] { attach_context(att, t, m, x, "a9", {}); }) == Errc::dangling_ref);
  CHECK(code_of([&] { attach_context(att, t, m, x, "a1", {"c9"}); }) == Errc::dangling_ref);
  // re-attaching replaces the previous context
  attach_context(att, t, m, x, "a2", {});
  CHECK(att.at(x).activity == "a2");
  CHECK(contextual_view(t, att, m, "o1", ContextTab::content).empty());
}

TEST_CASE("property: contextual view matches the filter oracle") {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 60; ++round) {
    std::map<std::string, std::string> parent_of;
    const std::size_t n_act = 1 + gen::pick(rng, 8);
    Activity root = random_activity(rng, n_act, parent_of);
    std::set<std::string> concepts;
    const std::size_t n_con = 1 + gen::pick(rng, 6);
    for (std::size_t i = 0; i < n_con; ++i) concepts.insert("k" + std::to_string(i));
    auto random_concepts = [&] {
      std::set<std::string> out;
      for (const auto& c : concepts) {
        if (gen::pick(rng, 3) == 0) out.insert(c);
      }
      return out;
    };
    std::map<std::string, LearningObject> objects;
    for (int i = 0; i < 4; ++i) {
      objects["o" + std::to_string(i)] = {"a" + std::to_string(gen::pick(rng, n_act)), random_concepts()};
    }
    const CourseManifest m(root, objects, concepts, {});

    const auto t = gen::random_tree(splach(), rng, gen::pick(rng, 80), 3);
    AttachmentMap att;
    for (const auto* msg : t.messages()) {
      if (gen::pick(rng, 2) == 0) continue;
      std::optional<std::string> act;
      if (gen::pick(rng, 4) != 0) act = "a" + std::to_string(gen::pick(rng, n_act));
      attach_context(att, t, m, msg->id, act, random_concepts());
    }
    const auto nodes = gen::copy_nodes(t);
    for (const auto& [oid, obj] : objects) {
      CHECK(contextual_view(t, att, m, oid, ContextTab::activity) ==
            oracle::context_filter(nodes, att, parent_of, obj.activity, obj.concepts, true));
      CHECK(contextual_view(t, att, m, oid, ContextTab::content) ==
            oracle::context_filter(nodes, att, parent_of, obj.activity, obj.concepts, false));
    }
  }
}
