#include "dialogos/analytics.hpp"

#include <sstream>

#include "dialogos/error.hpp"

namespace dialogos {

const std::string_view kProfileDisclaimer =
    "# profiles describe conduct within this tool-mediated conversation only; "
    "they do not characterize how a person behaves in general";

std::string_view profile_name(Profile p) noexcept {
  switch (p) {
    case Profile::animateur: return "animateur";
    case Profile::verificateur: return "verificateur";
    case Profile::queteur: return "queteur";
    case Profile::independant: return "independant";
  }
  return "independant";
}

namespace {

void mention(ParticipationStats& stats, const nlohmann::json& payload, const char* key) {
  if (auto it = payload.find(key); it != payload.end() && it->is_string()) {
    const auto& id = it->get_ref<const std::string&>();
    stats.users.try_emplace(id, UserStats{id, 0, {}, {}, {}, {}});
  }
}

std::int64_t count(const UserStats& u, std::initializer_list<std::string_view> acts) {
  std::int64_t n = 0;
  for (auto a : acts) {
    if (auto it = u.per_act.find(std::string(a)); it != u.per_act.end()) n += it->second;
  }
  return n;
}

}  // namespace

ParticipationStats participation_stats(std::span<const EventRecord> log) {
  ParticipationStats stats;
  for (const auto& r : log) {
    const auto& p = r.payload;
    switch (r.kind) {
      case EventKind::intervention_posted: {
        mention(stats, p, "author");
        UserStats& u = stats.users.at(p["author"].get<std::string>());
        ++u.total;
        ++u.per_act[p["act"].get<std::string>()];
        break;
      }
      case EventKind::profile_upserted:
        if (auto it = p.find("profile"); it != p.end()) mention(stats, *it, "id");
        break;
      case EventKind::context_opened:
      case EventKind::message_opened:
      case EventKind::offers_set:
      case EventKind::presence_changed:
        mention(stats, p, "user");
        break;
      case EventKind::context_attached:
      case EventKind::channel_created:
        break;
    }
  }

  std::int64_t active = 0;
  std::int64_t sum = 0;
  for (auto& [id, u] : stats.users) {
    u.init = {count(u, {"proposer", "affirmer"}), u.total};
    u.eval = {count(u, {"approuver", "desapprouver"}), u.total};
    u.quest = {count(u, {"demander", "questionner"}), u.total};
    stats.max_total = std::max(stats.max_total, u.total);
    if (u.total > 0) {
      ++active;
      sum += u.total;
    }
  }
  stats.mean_total = {sum, active};
  return stats;
}

BehaviorProfile compute_profile(const ParticipationStats& stats, std::string_view user) {
  auto it = stats.users.find(user);
  if (it == stats.users.end()) throw Error(Errc::unknown_user, "no user '" + std::string(user) + "'");
  const UserStats& u = it->second;

  const Fraction half{1, 2};
  const Fraction activity{u.total, stats.max_total};
  BehaviorProfile out{u.user, Profile::independant, {}};
  out.scores[static_cast<std::size_t>(Profile::animateur)] = half * activity + half * u.init;
  out.scores[static_cast<std::size_t>(Profile::verificateur)] = u.eval;
  out.scores[static_cast<std::size_t>(Profile::queteur)] = u.quest;
  out.scores[static_cast<std::size_t>(Profile::independant)] = Fraction{1, 1} - activity;

  // strict > keeps the earlier, higher-priority profile on ties
  bool first = true;
  for (Profile p : {Profile::queteur, Profile::verificateur, Profile::animateur, Profile::independant}) {
    if (first || out.score(p) > out.score(out.profile)) out.profile = p;
    first = false;
  }
  return out;
}

std::string UsageRatio::to_text() const {
  if (is_na()) return "NA";
  if (is_infinite()) return "INF";
  return value().to_fixed(4);
}

ModeUsage mode_usage_ratio(std::span<const EventRecord> log) {
  ModeUsage usage;
  for (const auto& r : log) {
    UsageRatio* target = nullptr;
    if (r.kind == EventKind::message_opened) target = &usage.opened;
    if (r.kind == EventKind::intervention_posted) target = &usage.sent;
    if (!target) continue;
    auto mode = r.payload.find("mode");
    if (mode == r.payload.end() || !mode->is_string()) continue;
    if (*mode == "contextual") ++target->contextual;
    if (*mode == "global") ++target->global;
  }
  return usage;
}

std::string profile_report(const ParticipationStats& stats) {
  std::ostringstream out;
  out << kProfileDisclaimer << '\n';
  out << "user\tT\tinit\teval\tquest\ts_anim\ts_verif\ts_quet\ts_indep\tprofile\n";
  for (const auto& [id, u] : stats.users) {
    const BehaviorProfile b = compute_profile(stats, id);
    out << id << '\t' << u.total << '\t' << u.init.to_fixed() << '\t' << u.eval.to_fixed() << '\t'
        << u.quest.to_fixed();
    for (const Fraction& s : b.scores) out << '\t' << s.to_fixed();
    out << '\t' << profile_name(b.profile) << '\n';
  }
  return out.str();
}

}  // namespace dialogos
