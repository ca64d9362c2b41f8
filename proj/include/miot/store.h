#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "assessment.h"
#include "canonical.h"
#include "catalog.h"
#include "scoring.h"

namespace miot {

enum class HistoryKind { Created, ResponseSet, Scored, StatusChanged };

std::string_view to_string(HistoryKind kind);
HistoryKind history_kind_from_string(std::string_view text);

struct HistoryEvent {
  int sequence = 0;
  Timestamp timestamp{};
  HistoryKind kind = HistoryKind::Created;
  json payload;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

json to_json(const HistoryEvent& event);
HistoryEvent history_event_from_json(const json& doc);

/// Directory-backed store:
///
///   <root>/catalogs/<checksum>.json
///   <root>/assessments/<id>/rev-<n>.json
///   <root>/assessments/<id>/history.log
///
/// Revision files are created with an exclusive link, so two writers racing
/// for the same revision cannot both win, even across processes. Existing
/// revision files are never rewritten.
class AssessmentStore {
 public:
  using Clock = std::function<Timestamp()>;

  explicit AssessmentStore(std::filesystem::path root, Clock clock = utc_now);

  const std::filesystem::path& root() const { return root_; }

  /// Persists a snapshot and appends its history events. When
  /// `base_revision` is given it must equal the latest stored revision
  /// (ConflictError otherwise). Saving a snapshot whose responses and status
  /// are unchanged returns the current revision without writing.
  int save_assessment(const Assessment& assessment,
                      std::optional<int> base_revision = std::nullopt);

  Assessment load_assessment(const std::string& id,
                             std::optional<int> revision = std::nullopt) const;
  int latest_revision(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::vector<std::string> list_assessments() const;

  std::vector<HistoryEvent> list_history(const std::string& id) const;

  /// Appends a Scored event for the latest revision.
  void record_score(const std::string& id, const ScoreReport& report);

  /// Rebuilds a revision from history payloads alone.
  Assessment replay(const std::string& id, std::optional<int> revision = std::nullopt) const;

  void save_catalog(const ExpectationCatalog& catalog);
  ExpectationCatalog load_catalog(const std::string& checksum) const;

 private:
  std::filesystem::path assessment_dir(const std::string& id) const;
  std::mutex& lock_for(const std::string& id);
  void append_history(const std::string& id, const std::vector<HistoryEvent>& events);

  Timestamp event_time(const std::vector<HistoryEvent>& existing) const;

  std::filesystem::path root_;
  Clock clock_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace miot
