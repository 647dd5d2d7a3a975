// dialogos/analytics.hpp — participation statistics, behavioral profiles,
// and contextual/global usage ratios computed from event-log slices.
//
// Profile scores (all exact ratios of counts):
//   s_anim  = 1/2 * T/max_T + 1/2 * init      init  = (proposer + affirmer) / T
//   s_verif = eval                            eval  = (approuver + desapprouver) / T
//   s_quet  = quest                           quest = (demander + questionner) / T
//   s_indep = 1 - T/max_T
// with T/max_T and every share taken as 0 when its denominator is 0. The
// profile is the argmax; ties go to queteur, then verificateur, animateur,
// independant.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "dialogos/event_store.hpp"
#include "dialogos/fraction.hpp"

namespace dialogos {

struct UserStats {
  UserId user;
  std::int64_t total = 0;
  std::map<ActId, std::int64_t> per_act;
  Fraction init;
  Fraction eval;
  Fraction quest;

  friend bool operator==(const UserStats&, const UserStats&) = default;
};

struct ParticipationStats {
  std::map<UserId, UserStats, std::less<>> users;
  std::int64_t max_total = 0;
  Fraction mean_total;  // over users with T >= 1

  friend bool operator==(const ParticipationStats&, const ParticipationStats&) = default;
};

// Every user named by any event is present, possibly with T = 0; only
// intervention_posted events count toward T.
ParticipationStats participation_stats(std::span<const EventRecord> log);

enum class Profile { animateur, verificateur, queteur, independant };
std::string_view profile_name(Profile p) noexcept;

struct BehaviorProfile {
  UserId user;
  Profile profile = Profile::independant;
  // Indexed by Profile: animateur, verificateur, queteur, independant.
  std::array<Fraction, 4> scores;

  [[nodiscard]] Fraction score(Profile p) const { return scores[static_cast<std::size_t>(p)]; }
  friend bool operator==(const BehaviorProfile&, const BehaviorProfile&) = default;
};

// Throws UNKNOWN_USER.
BehaviorProfile compute_profile(const ParticipationStats& stats, std::string_view user);

// A contextual/global count ratio; INF when only the numerator is non-zero,
// NA when both are zero.
struct UsageRatio {
  std::int64_t contextual = 0;
  std::int64_t global = 0;

  [[nodiscard]] bool is_infinite() const noexcept { return global == 0 && contextual > 0; }
  [[nodiscard]] bool is_na() const noexcept { return global == 0 && contextual == 0; }
  [[nodiscard]] Fraction value() const { return {contextual, global}; }
  [[nodiscard]] std::string to_text() const;
};

struct ModeUsage {
  UsageRatio opened;
  UsageRatio sent;
};

// Opens come from message_opened events; sends from intervention_posted
// events carrying a mode tag.
ModeUsage mode_usage_ratio(std::span<const EventRecord> log);

// Caveat written as the first line of every profile report.
extern const std::string_view kProfileDisclaimer;

// TSV: disclaimer comment line, header row, one row per user (sorted by id).
std::string profile_report(const ParticipationStats& stats);

}  // namespace dialogos
