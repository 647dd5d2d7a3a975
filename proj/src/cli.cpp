#include "dialogos/cli.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dialogos/error.hpp"
#include "dialogos/server.hpp"
#include "dialogos/tcp_server.hpp"
#include "dialogos/world.hpp"

#ifndef DIALOGOS_DATA_DIR
#define DIALOGOS_DATA_DIR "data"
#endif

namespace dialogos::cli {

using nlohmann::json;

Duration parse_duration(std::string_view text) {
  if (text.size() < 2) throw std::invalid_argument("duration must look like 90s, 60m or 2h");
  const char unit = text.back();
  const std::string_view digits = text.substr(0, text.size() - 1);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      digits.size() > 9) {
    throw std::invalid_argument("duration must look like 90s, 60m or 2h");
  }
  const std::int64_t n = std::stoll(std::string(digits));
  if (n == 0) throw std::invalid_argument("duration must be positive");
  switch (unit) {
    case 's': return std::chrono::seconds(n);
    case 'm': return std::chrono::minutes(n);
    case 'h': return std::chrono::hours(n);
    default: throw std::invalid_argument("duration unit must be s, m or h");
  }
}

namespace {

// Uniform draw in [0, bound) independent of the standard library's
// distribution implementations, so corpora are identical across toolchains.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

template <typename Set>
const typename Set::value_type& pick(std::mt19937_64& rng, const Set& s) {
  auto it = s.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(draw(rng, s.size())));
  return *it;
}

constexpr TimestampMs kCorpusEpoch = 1'700'000'000'000;

}  // namespace

Corpus generate_corpus(const CorpusSpec& spec, const ActGrammar& grammar) {
  if (spec.users == 0) throw std::invalid_argument("--users must be at least 1");
  if (spec.messages == 0) throw std::invalid_argument("--messages must be at least 1");
  if (!(spec.consecutive >= 0.0 && spec.consecutive <= 1.0)) {
    throw std::invalid_argument("--consecutive must lie in [0, 1]");
  }

  std::mt19937_64 rng(spec.seed);
  const std::size_t m = spec.messages;
  std::size_t target = static_cast<std::size_t>(std::llround(spec.consecutive * static_cast<double>(m)));
  target = std::min(target, m - 1);
  if (spec.users == 1) target = m - 1;

  // positions 1..m-1 that continue the previous author's run
  std::vector<std::size_t> positions(m - 1);
  std::iota(positions.begin(), positions.end(), 1);
  for (std::size_t i = 0; i < target; ++i) {
    std::swap(positions[i], positions[i + draw(rng, positions.size() - i)]);
  }
  std::vector<bool> continues(m, false);
  for (std::size_t i = 0; i < target; ++i) continues[positions[i]] = true;

  EventLog log;
  TimestampMs ts = kCorpusEpoch;
  std::vector<UserId> users;
  for (std::size_t u = 1; u <= spec.users; ++u) {
    users.push_back("u" + std::to_string(u));
    log.append(EventKind::profile_upserted,
               {{"profile", {{"id", users.back()}, {"name", "User " + std::to_string(u)}}}}, ts);
  }
  log.append(EventKind::channel_created, {{"channel", spec.channel}, {"mode", "forum"}}, ts);

  WorldConfig config{std::make_shared<const ActGrammar>(grammar),
                     std::make_shared<const CourseManifest>(
                         Activity{"course", "course", {}}, std::map<std::string, LearningObject>{},
                         std::set<std::string>{}, std::vector<std::pair<std::string, std::string>>{})};
  WorldState world(config);
  for (const auto& r : log.records()) world.apply(r);

  const ConversationTree& tree = world.find_channel(spec.channel)->tree;
  std::vector<InterventionId> nodes;
  std::size_t author = draw(rng, users.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0 && !continues[i]) {
      author = (author + 1 + draw(rng, users.size() - 1)) % users.size();
    }
    ts += 60'000;

    std::optional<InterventionId> parent;
    ActId act;
    if (!nodes.empty() && draw(rng, 3) != 0) {
      const Intervention& p = tree.node(nodes[draw(rng, nodes.size())]);
      ActSet legal = grammar.successors(ActRef::act(p.act), p.author == users[author]);
      if (!legal.empty()) {
        parent = p.id;
        act = pick(rng, legal);
      }
    }
    if (!parent) act = pick(rng, grammar.root_successors());

    json payload{{"channel", spec.channel},
                 {"author", users[author]},
                 {"act", act},
                 {"body", "message " + std::to_string(i + 1)},
                 {"mode", "global"}};
    if (parent) payload["parent"] = *parent;
    const EventRecord& record = log.append(EventKind::intervention_posted, std::move(payload), ts);
    world.apply(record);
    nodes.push_back(record.seq);
  }

  Corpus out;
  out.records.assign(log.records().begin(), log.records().end());
  out.messages = tree.size();
  out.consecutive = consecutive_count(tree.messages(), kDefaultSessionWindow);
  return out;
}

namespace {

std::string join_ids(const std::vector<InterventionId>& ids) {
  std::string out;
  for (InterventionId id : ids) {
    if (!out.empty()) out += ',';
    out += std::to_string(id);
  }
  return out;
}

}  // namespace

std::string sessions_report(const ConversationTree& tree, Duration window, bool grid) {
  const auto messages = tree.messages();
  std::ostringstream out;
  out << "session\tauthor\tstart_ts\tend_ts\tmembers\n";
  const auto sessions = group_sessions(messages, window);
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    out << i + 1 << '\t' << s.author << '\t' << s.start_ts << '\t' << s.end_ts << '\t'
        << join_ids(s.members) << '\n';
  }
  out << "consecutive_fraction\t" << consecutive_fraction(messages, window).to_fixed(4) << '\n';
  if (grid) {
    const SessionGrid g = build_session_grid(tree, window);
    out << '\n' << "thread";
    for (std::size_t c = 0; c < g.columns.size(); ++c) out << "\ts" << c + 1;
    out << '\n';
    for (InterventionId row : g.rows) {
      out << row;
      for (std::size_t c = 0; c < g.columns.size(); ++c) out << '\t' << join_ids(g.cell(row, c));
      out << '\n';
    }
  }
  return out.str();
}

namespace {

void configure_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("dialogos");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("DIALOGOS_LOG_LEVEL")) {
    const std::string_view l(level);
    if (l == "error") spdlog::set_level(spdlog::level::err);
    if (l == "warn") spdlog::set_level(spdlog::level::warn);
    if (l == "info") spdlog::set_level(spdlog::level::info);
    if (l == "debug") spdlog::set_level(spdlog::level::debug);
  }
}

struct Paths {
  std::string grammar = std::string(DIALOGOS_DATA_DIR) + "/splach.grammar.json";
  std::string manifest = std::string(DIALOGOS_DATA_DIR) + "/course.manifest.json";
};

// Load failures are usage errors (exit 2); log damage is a data error (exit 1).
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

WorldConfig load_config(const Paths& paths) {
  try {
    return {std::make_shared<const ActGrammar>(load_grammar_file(paths.grammar)),
            std::make_shared<const CourseManifest>(load_manifest_file(paths.manifest))};
  } catch (const Error& e) {
    throw LoadError(e.what());
  }
}

std::vector<EventRecord> window_slice(std::vector<EventRecord> records, const std::string& window) {
  if (window.empty()) return records;
  const auto dots = window.find("..");
  if (dots == std::string::npos) throw std::invalid_argument("--window must look like a..b");
  const Seq from = std::stoull(window.substr(0, dots));
  const Seq to = std::stoull(window.substr(dots + 2));
  if (from > to) throw std::invalid_argument("--window start exceeds end");
  std::erase_if(records, [&](const EventRecord& r) { return r.seq < from || r.seq > to; });
  return records;
}

volatile std::sig_atomic_t g_stop = 0;

int serve(const Paths& paths, const std::string& log_path, const std::string& listen,
          const std::string& directory_path, const std::vector<std::string>& channels,
          std::ostream& out) {
  WorldConfig config = load_config(paths);
  EventLog log = EventLog::open(log_path);
  const Seq replayed = log.last_seq();
  Hub hub(config, std::move(log));

  const TimestampMs now = now_ms();
  if (!directory_path.empty()) {
    Directory dir;
    try {
      dir = load_directory_file(directory_path);
    } catch (const Error& e) {
      throw LoadError(e.what());
    }
    const WorldState w = hub.snapshot();
    for (const auto& [id, p] : dir.profiles()) {
      if (!w.directory().has_user(id)) {
        hub.append_system(EventKind::profile_upserted, {{"profile", profile_to_json(p)}}, now);
      }
    }
    for (const auto& [id, d] : dir.documents()) {
      if (w.directory().documents().count(id) == 0) {
        hub.append_system(EventKind::profile_upserted, {{"document", document_to_json(d)}}, now);
      }
    }
  }
  for (const auto& spec : channels) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string mode = colon == std::string::npos ? "forum" : spec.substr(colon + 1);
    if (!parse_mode(mode)) throw LoadError("channel mode must be chat or forum: " + spec);
    if (!hub.snapshot().find_channel(name)) {
      hub.append_system(EventKind::channel_created, {{"channel", name}, {"mode", mode}}, now);
    }
  }
  hub.reset_presence(now);

  TcpServer server(hub, listen);
  out << "dialogos listening on port " << server.port() << " (grammar " << config.grammar->name()
      << ", replayed " << replayed << " events, seq horizon " << hub.seq_horizon() << ")" << std::endl;

  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  std::thread watcher([&server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.run();
  g_stop = 1;
  watcher.join();
  spdlog::info("stopped at seq {}", hub.seq_horizon());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"dialogos: act-structured conversation server and analytics"};
  app.require_subcommand(1);
  Paths paths;

  auto* serve_cmd = app.add_subcommand("serve", "Replay the log, then serve protocol v1 over TCP");
  std::string log_path;
  std::string listen = "127.0.0.1:7070";
  std::string directory_path;
  std::vector<std::string> channels;
  serve_cmd->add_option("--grammar", paths.grammar, "Grammar config");
  serve_cmd->add_option("--manifest", paths.manifest, "Course manifest");
  serve_cmd->add_option("--log", log_path, "Event log (*.events.jsonl)")->required();
  serve_cmd->add_option("--listen", listen, "host:port");
  serve_cmd->add_option("--directory", directory_path, "Directory bootstrap file");
  serve_cmd->add_option("--channel", channels, "Channel to create, name[:chat|forum]");

  auto* report = app.add_subcommand("report", "Analytics reports");
  report->require_subcommand(1);

  auto* profiles = report->add_subcommand("profiles", "Behavior profiles as TSV");
  std::string window;
  profiles->add_option("--log", log_path, "Event log")->required();
  profiles->add_option("--window", window, "Inclusive seq range a..b");
  profiles->add_option("--grammar", paths.grammar, "Grammar config");
  profiles->add_option("--manifest", paths.manifest, "Course manifest");

  auto* sessions = report->add_subcommand("sessions", "Temporal sessions of a channel");
  std::string channel;
  std::string delta = "60m";
  bool grid = false;
  sessions->add_option("--log", log_path, "Event log")->required();
  sessions->add_option("--channel", channel, "Channel id")->required();
  sessions->add_option("--delta", delta, "Session window, e.g. 60m");
  sessions->add_flag("--grid", grid, "Also emit the session grid");
  sessions->add_option("--grammar", paths.grammar, "Grammar config");
  sessions->add_option("--manifest", paths.manifest, "Course manifest");

  auto* usage = report->add_subcommand("usage", "Contextual/global open and send ratios");
  usage->add_option("--log", log_path, "Event log")->required();

  auto* gen = app.add_subcommand("gen-corpus", "Write a seeded synthetic forum log to stdout");
  CorpusSpec spec;
  gen->add_option("--users", spec.users, "Number of users")->required();
  gen->add_option("--messages", spec.messages, "Number of messages")->required();
  gen->add_option("--consecutive", spec.consecutive, "Target consecutive fraction")->required();
  gen->add_option("--seed", spec.seed, "RNG seed")->required();
  gen->add_option("--channel", spec.channel, "Channel id");
  gen->add_option("--grammar", paths.grammar, "Grammar config");

  auto* check = app.add_subcommand("check-grammar", "Load a grammar and flag terminal acts");
  std::string grammar_file;
  check->add_option("file", grammar_file, "Grammar config")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Replay a log and print its state hash");
  replay_cmd->add_option("--log", log_path, "Event log")->required();
  replay_cmd->add_option("--grammar", paths.grammar, "Grammar config");
  replay_cmd->add_option("--manifest", paths.manifest, "Course manifest");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve_cmd) return serve(paths, log_path, listen, directory_path, channels, out);

    if (*check) {
      const ActGrammar g = load_grammar_file(grammar_file);
      std::size_t edge_count = 0;
      for (const auto& [from, targets] : g.edges()) edge_count += targets.size();
      const auto terminal = g.terminal_acts();
      out << g.name() << ": " << g.acts().size() << " acts, " << g.categories().size()
          << " categories, " << edge_count << " edges, " << g.root_successors().size()
          << " root acts, " << (terminal.empty() ? "no terminal acts" : "terminal acts present")
          << '\n';
      for (const auto& id : terminal) err << "warning: terminal act '" << id << "' has no successor\n";
      return kExitOk;
    }

    if (*gen) {
      const Corpus corpus = generate_corpus(spec, load_grammar_file(paths.grammar));
      out << emit_log(corpus.records);
      const Fraction achieved{static_cast<std::int64_t>(corpus.consecutive),
                              static_cast<std::int64_t>(corpus.messages)};
      err << "achieved consecutive fraction " << achieved.to_fixed(4) << " (" << corpus.consecutive
          << "/" << corpus.messages << ")\n";
      return kExitOk;
    }

    if (*usage) {
      const ModeUsage u = mode_usage_ratio(read_log_file(log_path));
      out << "metric\tcontextual\tglobal\tratio\n";
      out << "opened\t" << u.opened.contextual << '\t' << u.opened.global << '\t' << u.opened.to_text() << '\n';
      out << "sent\t" << u.sent.contextual << '\t' << u.sent.global << '\t' << u.sent.to_text() << '\n';
      return kExitOk;
    }

    const WorldConfig config = load_config(paths);
    const auto records = read_log_file(log_path);
    const WorldState world = replay(records, config);

    if (*replay_cmd) {
      out << "events\t" << world.last_seq() << '\n' << "state_hash\t" << world.state_hash() << '\n';
      return kExitOk;
    }
    if (*profiles) {
      out << profile_report(participation_stats(window_slice(records, window)));
      return kExitOk;
    }
    if (*sessions) {
      const Channel* ch = world.find_channel(channel);
      if (!ch) {
        err << "UNKNOWN_CHANNEL: no channel '" << channel << "'\n";
        return kExitData;
      }
      out << sessions_report(ch->tree, parse_duration(delta), grid);
      return kExitOk;
    }
  } catch (const LoadError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.code()) {
      case Errc::malformed_doc:
      case Errc::unknown_act_ref:
      case Errc::empty_root:
        return kExitUsage;
      default:
        return kExitData;
    }
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace dialogos::cli
