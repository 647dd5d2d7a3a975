// dialogos/cli.hpp — command-line front end.
//
// Exit codes: 0 ok, 1 runtime data error, 2 usage or load error.
#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dialogos/analytics.hpp"
#include "dialogos/event_store.hpp"
#include "dialogos/forum.hpp"
#include "dialogos/grammar.hpp"

namespace dialogos::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// <int><unit>, unit in {s, m, h}; throws std::invalid_argument.
Duration parse_duration(std::string_view text);

struct CorpusSpec {
  std::size_t users = 2;
  std::size_t messages = 1;
  double consecutive = 0.0;
  std::uint64_t seed = 1;
  ChannelId channel = "general";
};

struct Corpus {
  std::vector<EventRecord> records;
  std::size_t consecutive = 0;  // messages continuing their author's run
  std::size_t messages = 0;
};

// Seeded synthetic forum whose consecutive fraction is the achievable value
// nearest spec.consecutive. Every message obeys `grammar`.
Corpus generate_corpus(const CorpusSpec& spec, const ActGrammar& grammar);

// Session listing, the consecutive fraction, and optionally the grid.
std::string sessions_report(const ConversationTree& tree, Duration window, bool grid);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dialogos::cli
