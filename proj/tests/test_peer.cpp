#include <doctest.h>

#include <random>

#include "dialogos/error.hpp"
#include "dialogos/peer.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace dialogos;

namespace {

Directory sample() {
  return load_directory_file(std::string(DIALOGOS_DATA_DIR) + "/directory.json");
}

std::vector<std::string> ids(const std::vector<MatchResult>& r) {
  std::vector<std::string> out;
  for (const auto& m : r) out.push_back(m.entity);
  return out;
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

TagSet random_tags(std::mt19937_64& rng, std::size_t vocab) {
  TagSet out;
  const std::size_t n = gen::pick(rng, 5);
  for (std::size_t i = 0; i < n; ++i) out.insert("t" + std::to_string(gen::pick(rng, vocab)));
  return out;
}

}  // namespace

TEST_CASE("tag normalisation") {
  CHECK(normalize_tags({" Tableur ", "STATS", "", "  ", "tableur"}) == TagSet{"stats", "tableur"});
}

TEST_CASE("jaccard") {
  CHECK(jaccard({"a", "b"}, {"b", "c"}) == Fraction(1, 3));
  CHECK(jaccard({}, {}) == Fraction(0, 1));
  CHECK(jaccard({"a"}, {"a"}) == Fraction(1, 1));
  CHECK(jaccard({"a"}, {"b"}) == Fraction(0, 1));
}

TEST_CASE("property: jaccard identities") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_tags(rng, 6);
    const auto b = random_tags(rng, 6);
    const auto j = jaccard(a, b);
    CHECK(j == jaccard(b, a));
    CHECK(j >= Fraction(0, 1));
    CHECK(j <= Fraction(1, 1));
    if (!a.empty()) CHECK(jaccard(a, a) == Fraction(1, 1));
    bool disjoint = true;
    for (const auto& t : a) disjoint = disjoint && b.count(t) == 0;
    CHECK((j == Fraction(0, 1)) == disjoint);
  }
}

TEST_CASE("single tag query over the sample directory") {
  const auto dir = sample();
  const auto r = match_peers(dir, "moi", {"tableur"}, 10);
  CHECK(ids(r) == std::vector<std::string>{"anna", "bilan.pps", "catherine", "cecile", "marie"});
  for (const auto& m : r) CHECK(m.score == Fraction(1, 2));
  CHECK(r[0].display_class == DisplayClass::connected);
  CHECK(r[1].display_class == DisplayClass::document);
  CHECK(r[1].kind == EntityKind::document);
  CHECK(r[2].display_class == DisplayClass::stranger);
  CHECK(r[3].display_class == DisplayClass::contact_offline);
}

TEST_CASE("two tag query ranks by score then presence then id") {
  const auto dir = sample();
  const auto r = match_peers(dir, "moi", {"tableur", "statistiques"}, 10);
  CHECK(ids(r) == std::vector<std::string>{"anna", "marie", "bilan.pps", "catherine", "cecile",
                                           "frederique", "guillaume", "km.doc"});
  CHECK(r[0].score == Fraction(1, 1));
  CHECK(r[2].score == Fraction(1, 3));
  CHECK(match_peers(dir, "moi", {"tableur", "statistiques"}, 3).size() == 3);
  CHECK(match_peers(dir, "moi", {"nothing"}, 3).empty());
}

TEST_CASE("offers count toward matching and presence changes rank") {
  auto dir = sample();
  dir.set_offers("frederique", {"tableur"});
  dir.set_presence("marie", Presence::connected);
  const auto r = match_peers(dir, "moi", {"tableur"}, 10);
  CHECK(ids(r) == std::vector<std::string>{"anna", "marie", "bilan.pps", "catherine", "cecile",
                                           "frederique"});
  CHECK(r[5].score == Fraction(1, 3));
  CHECK(code_of([&] { dir.set_offers("ghost", {}); }) == Errc::unknown_user);
  CHECK(code_of([&] { (void)match_peers(dir, "ghost", {"x"}, 1); }) == Errc::unknown_user);
  CHECK_THROWS_AS((void)match_peers(dir, "moi", {"x"}, 0), std::invalid_argument);
}

TEST_CASE("profile invariants") {
  Directory dir;
  CHECK(code_of([&] { dir.upsert_profile({"", "x", {}, {}, {}, Presence::offline, {}}); }) ==
        Errc::malformed_doc);
  CHECK(code_of([&] { dir.upsert_profile({"a", "x", {}, {}, {{"c", 1.5}}, Presence::offline, {}}); }) ==
        Errc::malformed_doc);
  CHECK(code_of([&] { dir.upsert_profile({"a", "x", {}, {}, {}, Presence::offline, {"a"}}); }) ==
        Errc::malformed_doc);
  CHECK_NOTHROW(dir.upsert_profile({"a", "x", {"Tag"}, {}, {{"c", 1.0}}, Presence::offline, {}}));
  CHECK(dir.profile("a").competences == TagSet{"tag"});
}

TEST_CASE("peer graph model") {
  const auto dir = sample();
  const auto r = match_peers(dir, "moi", {"tableur"}, 10);
  const auto g = peer_graph_model(dir, "moi", r);
  REQUIRE(g.nodes.size() == r.size() + 1);
  CHECK(g.nodes[0].id == "moi");
  CHECK(g.nodes[0].display_class == DisplayClass::self);
  CHECK(g.nodes[0].card.top_tags == std::vector<std::string>{"statistiques", "tableur"});
  CHECK(g.edges.size() == r.size());
  CHECK(g.edges[0].weight == doctest::Approx(0.5));
  CHECK(g.nodes[2].card.name == "Bilan");
  CHECK_FALSE(g.nodes[2].card.presence.has_value());
  const auto j = graph_to_json(g);
  CHECK(j["nodes"].size() == g.nodes.size());
}

TEST_CASE("json round trips") {
  const auto dir = sample();
  for (const auto& [id, p] : dir.profiles()) CHECK(profile_from_json(profile_to_json(p)) == p);
  for (const auto& [id, d] : dir.documents()) CHECK(document_from_json(document_to_json(d)) == d);
}

TEST_CASE("property: ranking agrees with the exhaustive oracle") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 100; ++round) {
    Directory dir;
    const std::size_t n_users = 1 + gen::pick(rng, 25);
    const std::size_t vocab = 2 + gen::pick(rng, 8);
    for (std::size_t i = 0; i < n_users; ++i) {
      PeerProfile p;
      p.id = "u" + std::to_string(i);
      p.name = "User " + std::to_string(i);
      p.competences = random_tags(rng, vocab);
      p.offers = random_tags(rng, vocab);
      p.presence = gen::pick(rng, 2) ? Presence::connected : Presence::offline;
      dir.upsert_profile(p);
    }
    for (std::size_t i = 0; i < gen::pick(rng, 8); ++i) {
      dir.upsert_document({"d" + std::to_string(i), "Doc", random_tags(rng, vocab)});
    }
    // contacts of the requester
    PeerProfile self = dir.profile("u0");
    for (std::size_t i = 1; i < n_users; ++i) {
      if (gen::pick(rng, 3) == 0) self.contacts.insert("u" + std::to_string(i));
    }
    dir.upsert_profile(self);

    auto query = random_tags(rng, vocab);
    query.insert("t0");
    const std::size_t k = 1 + gen::pick(rng, 30);
    const auto got = match_peers(dir, "u0", query, k);
    const auto want = oracle::rank_peers(dir, "u0", query, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].entity == want[i].id);
      CHECK((got[i].kind == EntityKind::document) == want[i].document);
      CHECK(got[i].score == Fraction(want[i].common, want[i].total));
      const bool contact = self.contacts.count(want[i].id) != 0;
      CHECK(display_class_name(got[i].display_class) ==
            oracle::expected_class(want[i].document, want[i].connected, contact));
    }
  }
}
