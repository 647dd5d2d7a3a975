// dialogos/forum.hpp — temporal sessions, session grids, and contextual views.
//
// Sessions group runs of consecutive messages by one author (in global
// channel order) whose inter-message gap stays within a window. The grid
// crosses threads (rows) with sessions (columns). Contextual views filter a
// forum by the learning object currently open, either through its course
// activity (including sub-activities) or through its concepts.
#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogos/conversation.hpp"
#include "dialogos/fraction.hpp"

namespace dialogos {

using Duration = std::chrono::milliseconds;
inline constexpr Duration kDefaultSessionWindow = std::chrono::minutes(60);

struct ForumSession {
  UserId author;
  std::vector<InterventionId> members;
  TimestampMs start_ts = 0;
  TimestampMs end_ts = 0;

  friend bool operator==(const ForumSession&, const ForumSession&) = default;
};

// `messages` must be in strictly ascending seq (UNSORTED_INPUT otherwise);
// `window` must be positive.
std::vector<ForumSession> group_sessions(std::span<const Intervention* const> messages,
                                         Duration window);

// Messages whose immediate predecessor has the same author within the window.
std::size_t consecutive_count(std::span<const Intervention* const> messages, Duration window);
// consecutive_count / N, 0/1 for an empty channel.
Fraction consecutive_fraction(std::span<const Intervention* const> messages, Duration window);

struct SessionGrid {
  std::vector<InterventionId> rows;     // thread roots, ascending seq
  std::vector<ForumSession> columns;    // by start_ts, ties by first seq
  // (thread root, column index) -> messages ascending seq; only non-empty cells.
  std::map<std::pair<InterventionId, std::size_t>, std::vector<InterventionId>> cells;

  [[nodiscard]] const std::vector<InterventionId>& cell(InterventionId row, std::size_t column) const;
  [[nodiscard]] std::size_t message_count() const;
};

SessionGrid build_session_grid(const ConversationTree& tree, Duration window);

struct Activity {
  std::string id;
  std::string title;
  std::vector<Activity> children;

  friend bool operator==(const Activity&, const Activity&) = default;
};

struct LearningObject {
  std::string activity;
  std::set<std::string> concepts;

  friend bool operator==(const LearningObject&, const LearningObject&) = default;
};

class CourseManifest {
 public:
  // Throws MALFORMED_DOC (duplicate activity id) or DANGLING_REF.
  CourseManifest(Activity root, std::map<std::string, LearningObject> objects,
                 std::set<std::string> concepts,
                 std::vector<std::pair<std::string, std::string>> concept_edges);

  [[nodiscard]] const Activity& root() const noexcept { return root_; }
  [[nodiscard]] const std::map<std::string, LearningObject>& objects() const noexcept {
    return objects_;
  }
  [[nodiscard]] const std::set<std::string>& concepts() const noexcept { return concepts_; }
  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& concept_edges() const noexcept {
    return concept_edges_;
  }

  [[nodiscard]] bool has_activity(std::string_view id) const;
  [[nodiscard]] bool has_concept(std::string_view id) const;
  // Throws UNKNOWN_OBJECT.
  [[nodiscard]] const LearningObject& object(std::string_view id) const;
  // `id` and every activity below it. Throws DANGLING_REF for unknown ids.
  [[nodiscard]] std::set<std::string> activity_closure(std::string_view id) const;
  [[nodiscard]] std::size_t activity_count() const noexcept { return parent_.size(); }

 private:
  Activity root_;
  std::map<std::string, LearningObject> objects_;
  std::set<std::string> concepts_;
  std::vector<std::pair<std::string, std::string>> concept_edges_;
  std::map<std::string, std::optional<std::string>, std::less<>> parent_;
};

CourseManifest load_manifest(const nlohmann::json& doc);
CourseManifest load_manifest_text(std::string_view text);
CourseManifest load_manifest_file(const std::string& path);

struct ContextAttachment {
  InterventionId intervention = 0;
  std::optional<std::string> activity;
  std::set<std::string> concepts;

  friend bool operator==(const ContextAttachment&, const ContextAttachment&) = default;
};

// At most one attachment per intervention.
using AttachmentMap = std::map<InterventionId, ContextAttachment>;

// Stores or overwrites the attachment for `intervention`. Throws
// UNKNOWN_NODE when `tree` lacks the intervention, DANGLING_REF when the
// activity or a concept is missing from the manifest.
void attach_context(AttachmentMap& attachments, const ConversationTree& tree,
                    const CourseManifest& manifest, InterventionId intervention,
                    std::optional<std::string> activity, std::set<std::string> concepts);

// Checks the manifest references only; throws DANGLING_REF.
void check_context_refs(const CourseManifest& manifest, const std::optional<std::string>& activity,
                        const std::set<std::string>& concepts);

enum class ContextTab { activity, content };

// Messages of `tree` relevant to `object`, ascending seq. Throws UNKNOWN_OBJECT.
std::vector<InterventionId> contextual_view(const ConversationTree& tree,
                                            const AttachmentMap& attachments,
                                            const CourseManifest& manifest,
                                            std::string_view object, ContextTab tab);

}  // namespace dialogos
