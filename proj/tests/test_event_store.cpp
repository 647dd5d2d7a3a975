#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dialogos/error.hpp"
#include "dialogos/event_store.hpp"
#include "dialogos/world.hpp"
#include "gen.hpp"

using namespace dialogos;
using nlohmann::json;

namespace {

const std::string kFixtures = std::string(DIALOGOS_DATA_DIR) + "/fixtures";

// Digest of a world with no events; frozen so canonical form changes are noticed.
const std::string kEmptyWorldHash = "867cdd3adf6b344ae7601388f990acb804ccae060a20f9009b6cd9518107afac";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dialogos_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected dialogos::Error");
  return Error(Errc::malformed_doc, "");
}

}  // namespace

TEST_CASE("payload schemas") {
  CHECK_NOTHROW(validate_payload(EventKind::channel_created, {{"channel", "g"}, {"mode", "chat"}}));
  CHECK(error_of([] { validate_payload(EventKind::channel_created, {{"channel", "g"}, {"mode", "x"}}); })
            .code() == Errc::schema_violation);
  CHECK(error_of([] {
          validate_payload(EventKind::channel_created, {{"channel", "g"}, {"mode", "chat"}, {"extra", 1}});
        }).code() == Errc::schema_violation);
  CHECK(error_of([] {
          validate_payload(EventKind::intervention_posted, {{"channel", "g"}, {"author", "a"}, {"act", "x"}});
        }).code() == Errc::schema_violation);
  CHECK_NOTHROW(validate_payload(
      EventKind::intervention_posted,
      {{"channel", "g"}, {"author", "a"}, {"act", "x"}, {"body", "b"}, {"parent", 3}, {"mode", "global"}}));
  CHECK(error_of([] {
          validate_payload(EventKind::profile_upserted, {{"profile", {{"id", "a"}}}, {"document", {{"id", "d"}}}});
        }).code() == Errc::schema_violation);
  CHECK(error_of([] { validate_payload(EventKind::presence_changed, json::array()); }).code() ==
        Errc::schema_violation);
}

TEST_CASE("fixture logs survive parse and emit unchanged") {
  for (const char* name : {"/mailgroup.events.jsonl", "/profiles.events.jsonl", "/usage.events.jsonl"}) {
    const auto text = slurp(kFixtures + name);
    const auto records = parse_log(text);
    CHECK(emit_log(records) == text);
  }
}

TEST_CASE("parse_log names the first bad seq") {
  const auto records = read_log_file(kFixtures + "/mailgroup.events.jsonl");
  const auto text = emit_log(records, false);
  SUBCASE("garbled line") {
    std::string bad = text;
    const auto third = bad.find('\n', bad.find('\n') + 1) + 1;
    bad.insert(third, "{oops");
    const auto e = error_of([&] { parse_log(bad); });
    CHECK(e.code() == Errc::corrupt_log);
    CHECK(e.bad_seq() == 3);
    CHECK(std::string(e.what()).find("first bad seq 3") != std::string::npos);
  }
  SUBCASE("seq gap") {
    auto copy = records;
    copy[3].seq = 9;
    CHECK(error_of([&] { parse_log(emit_log(copy)); }).bad_seq() == 4);
  }
  SUBCASE("unknown kind") {
    auto j = record_to_json(records[1]);
    j["kind"] = "mystery";
    std::string bad = record_to_line(records[0]) + "\n" + j.dump() + "\n";
    CHECK(error_of([&] { parse_log(bad); }).bad_seq() == 2);
  }
  SUBCASE("payload breaking its schema") {
    auto copy = records;
    copy[0].payload.erase("mode");
    CHECK(error_of([&] { parse_log(emit_log(copy)); }).bad_seq() == 1);
  }
  SUBCASE("replay rejects semantic damage") {
    auto copy = records;
    copy[2].payload["act"] = "approuver";  // not a legal reply to a question
    const auto e = error_of([&] { replay(copy, gen::fixture_config()); });
    CHECK(e.code() == Errc::corrupt_log);
    CHECK(e.bad_seq() == 3);
  }
  SUBCASE("blank trailing line is fine, an inner one is not") {
    CHECK(parse_log(text + "\n").size() == records.size());
    CHECK(error_of([&] { parse_log("\n" + text); }).bad_seq() == 1);
  }
}

TEST_CASE("file-backed log appends durably and reopens") {
  TempDir dir;
  const auto path = (dir.path / "events.jsonl").string();
  {
    auto log = EventLog::open(path);
    CHECK(log.records().empty());
    log.append(EventKind::channel_created, {{"channel", "g"}, {"mode", "forum"}}, 10);
    log.append(EventKind::presence_changed, {{"user", "a"}, {"state", "connected"}}, 11);
    CHECK(error_of([&] { log.append(EventKind::presence_changed, {{"user", "a"}}, 12); }).code() ==
          Errc::schema_violation);
    CHECK(log.last_seq() == 2);
  }
  auto again = EventLog::open(path);
  REQUIRE(again.records().size() == 2);
  CHECK(again.records()[1].payload["user"] == "a");
  again.append(EventKind::presence_changed, {{"user", "a"}, {"state", "offline"}}, 13);
  CHECK(read_log_file(path).size() == 3);
  CHECK(slurp(path).rfind(R"({"format":"1","kind":"log_meta"})", 0) == 0);

  std::ofstream(path, std::ios::app) << "{\"seq\":";
  CHECK(error_of([&] { (void)EventLog::open(path); }).bad_seq() == 4);
  CHECK(error_of([&] { (void)read_log_file((dir.path / "missing").string()); }).code() ==
        Errc::storage_failure);
}

TEST_CASE("world fold of the mailgroup fixture") {
  const auto w = replay(read_log_file(kFixtures + "/mailgroup.events.jsonl"), gen::fixture_config());
  CHECK(w.last_seq() == 5);
  const auto* ch = w.find_channel("mailgroup");
  REQUIRE(ch);
  CHECK(ch->mode == ChannelMode::forum);
  CHECK(ch->tree.size() == 4);
  CHECK(w.channel_of(4) == ch);
  CHECK(w.channel_of(1) == nullptr);
}

TEST_CASE("world rejects events the server would never produce") {
  WorldState w(gen::fixture_config());
  w.apply({1, 0, EventKind::channel_created, {{"channel", "g"}, {"mode", "chat"}}});
  const auto before = w.state_hash();
  CHECK(error_of([&] { w.apply({2, 0, EventKind::channel_created, {{"channel", "g"}, {"mode", "chat"}}}); })
            .code() == Errc::channel_exists);
  CHECK(error_of([&] {
          w.apply({2, 0, EventKind::intervention_posted,
                   {{"channel", "h"}, {"author", "a"}, {"act", "saluer"}, {"body", "x"}}});
        }).code() == Errc::unknown_channel);
  CHECK(error_of([&] { w.apply({2, 0, EventKind::context_opened, {{"user", "a"}, {"object", "o9"}}}); })
            .code() == Errc::unknown_object);
  CHECK(error_of([&] { w.apply({2, 0, EventKind::offers_set, {{"user", "a"}, {"offers", json::array()}}}); })
            .code() == Errc::unknown_user);
  CHECK(error_of([&] { w.apply({5, 0, EventKind::presence_changed, {{"user", "a"}, {"state", "offline"}}}); })
            .code() == Errc::corrupt_log);
  CHECK(w.state_hash() == before);
  CHECK(w.last_seq() == 1);
}

TEST_CASE("empty world digest is frozen") {
  WorldState w(gen::fixture_config());
  CHECK(w.state_hash() == kEmptyWorldHash);
  CHECK(w.state_hash().size() == 64);
}

TEST_CASE("property: replay equals the live fold and is idempotent") {
  std::mt19937_64 rng(37);
  std::map<EventKind, int> seen;
  for (int round = 0; round < 40; ++round) {
    WorldState live(gen::fixture_config());
    const auto records = gen::random_events(live, rng, 1 + gen::pick(rng, 400));
    for (const auto& r : records) ++seen[r.kind];
    const auto text = emit_log(records);
    const auto parsed = parse_log(text);
    REQUIRE(parsed == records);
    CHECK(emit_log(parsed) == text);
    const auto a = replay(parsed, gen::fixture_config());
    const auto b = replay(parsed, gen::fixture_config());
    CHECK(a.state_hash() == live.state_hash());
    CHECK(a.state_hash() == b.state_hash());
    CHECK(a.canonical_json() == live.canonical_json());
  }
  // the generator exercises every kind
  CHECK(seen.size() == 8);
}
