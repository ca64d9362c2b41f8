#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canonical.h"

namespace miot {

enum class GoalId { DeviceSecurity, DataSecurity, IndividualPrivacy };

inline constexpr GoalId kAllGoals[] = {GoalId::DeviceSecurity, GoalId::DataSecurity,
                                       GoalId::IndividualPrivacy};

enum class ExpectationSource { IR8228, IR8259Optional };

std::string_view to_string(GoalId goal);
std::string_view goal_title(GoalId goal);
GoalId goal_from_string(std::string_view text);
std::string_view to_string(ExpectationSource source);
ExpectationSource source_from_string(std::string_view text);

struct SubGoal {
  std::string id;
  GoalId goal = GoalId::DeviceSecurity;
  std::string title;

  friend bool operator==(const SubGoal&, const SubGoal&) = default;
};

struct Expectation {
  int id = 0;
  std::string text;
  GoalId goal = GoalId::DeviceSecurity;
  std::string sub_goal;
  std::vector<std::string> csf_refs;
  std::vector<std::string> control_refs;
  ExpectationSource source = ExpectationSource::IR8228;
  std::optional<std::string> implications;

  bool optional() const { return source == ExpectationSource::IR8259Optional; }

  friend bool operator==(const Expectation&, const Expectation&) = default;
};

inline constexpr int kCoreExpectationCount = 25;
inline constexpr int kOptionalExpectationCount = 3;

/// True for CSF subcategory and SP 800-53 tokens such as "ID.AM-1",
/// "PR.AC-1(7)" or "SI-12(1)".
bool is_reference_token(std::string_view token);

/// Immutable, integrity-checked set of Expectations. Only load_catalog
/// constructs one, so every instance satisfies the catalog invariants.
class ExpectationCatalog {
 public:
  const std::string& version() const { return version_; }
  const std::string& checksum() const { return checksum_; }

  /// Sub-goals sorted by id (canonical order).
  const std::vector<SubGoal>& sub_goals() const { return sub_goals_; }
  /// Sub-goals in presentation order: first appearance among expectations.
  std::vector<const SubGoal*> sub_goals_in_catalog_order() const;
  const SubGoal& sub_goal(std::string_view id) const;

  /// Expectations sorted by id.
  const std::vector<Expectation>& expectations() const { return expectations_; }

  const Expectation* find(int id) const;
  const Expectation& expectation_by_id(int id) const;
  std::vector<const Expectation*> expectations_for_control(std::string_view control) const;

  /// Ids in scope for an assessment: the 25 core items, plus the optional
  /// items when `include_optional` is set.
  std::vector<int> in_scope_ids(bool include_optional) const;
  bool in_scope(int id, bool include_optional) const;

  json to_json() const;
  std::string canonical() const { return canonical_dump(to_json()); }

  friend bool operator==(const ExpectationCatalog&, const ExpectationCatalog&) = default;

 private:
  friend ExpectationCatalog load_catalog(std::string_view document);

  std::string version_;
  std::vector<SubGoal> sub_goals_;
  std::vector<Expectation> expectations_;
  std::string checksum_;
};

/// Parses and integrity-checks a catalog document. Throws ParseError for
/// malformed input and IntegrityError for invariant violations. A `checksum`
/// key, when present, must equal the recomputed digest.
ExpectationCatalog load_catalog(std::string_view document);

ExpectationCatalog load_catalog_file(const std::string& path);

/// The catalog compiled into the library.
const ExpectationCatalog& default_catalog();
std::string_view default_catalog_document();

}  // namespace miot
