#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "assessment.h"
#include "catalog.h"
#include "fraction.h"

namespace miot {

/// Every mapped value is a whole number of quarters, so aggregates are
/// carried as integer quarter counts and never touch floating point.
int value_quarters(ComplianceLevel level);
Fraction score_value(ComplianceLevel level);

enum class NaMode { StrictPaper, ExcludeFromDenominator };

std::string_view to_string(NaMode mode);
/// Accepts "StrictPaper"/"strict" and "ExcludeFromDenominator"/"exclude".
NaMode na_mode_from_string(std::string_view text);

struct ScoringConfig {
  NaMode na_mode = NaMode::StrictPaper;
  Fraction acceptable_threshold{4, 5};
  Fraction correctable_floor{1, 2};
  bool include_optional_in_aggregate = false;

  /// Throws DomainError when thresholds leave [0,1] or are out of order.
  void check() const;

  friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

enum class RiskTier { Acceptable, Correctable, Unacceptable };

std::string_view to_string(RiskTier tier);
RiskTier tier_from_string(std::string_view text);

RiskTier classify_risk(const Fraction& fraction, const ScoringConfig& config = {});

enum class Mitigation { Reduce, Avoid, Accept, Transfer };

std::string_view to_string(Mitigation m);
std::vector<Mitigation> mitigation_options(RiskTier tier);

struct Aggregate {
  int sum_quarters = 0;
  int applicable_count = 0;

  /// sum / applicable_count; zero when nothing is applicable.
  Fraction fraction() const;
  Fraction sum() const { return Fraction(sum_quarters, 4); }

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct ExpectationScore {
  int expectation_id = 0;
  ComplianceLevel level = ComplianceLevel::Unknown;
  int quarters = 0;

  Fraction value() const { return Fraction(quarters, 4); }

  friend bool operator==(const ExpectationScore&, const ExpectationScore&) = default;
};

struct ScoreReport {
  std::string assessment_id;
  std::string catalog_version;
  std::string catalog_checksum;
  ScoringConfig config;
  std::vector<ExpectationScore> per_expectation;
  /// Sorted by sub-goal id; only sub-goals with at least one aggregated item.
  std::vector<std::pair<std::string, Aggregate>> subgoal_scores;
  std::vector<std::pair<GoalId, Aggregate>> goal_scores;
  Aggregate overall;
  std::optional<Aggregate> optional_scores;
  RiskTier risk_tier = RiskTier::Unacceptable;
  std::vector<int> deficiencies;

  const ExpectationScore* find(int expectation_id) const;
  const Aggregate* subgoal(std::string_view id) const;
  const Aggregate* goal(GoalId goal) const;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

/// Whether an in-scope Expectation contributes to sub-goal, goal and overall
/// aggregates under `config`.
bool counts_in_aggregate(const Expectation& expectation, const Assessment& assessment,
                         const ScoringConfig& config);

/// Scores a complete assessment. Throws CatalogMismatch,
/// IncompleteAssessment (carrying the blocking findings) or DomainError.
ScoreReport score_assessment(const Assessment& assessment, const ExpectationCatalog& catalog,
                             const ScoringConfig& config = {});

/// Aggregation without the completeness gate, for hypothetical response
/// sets. Every in-scope expectation must have a response.
ScoreReport score_responses(const Assessment& assessment, const ExpectationCatalog& catalog,
                            const ScoringConfig& config);

json to_json(const Fraction& fraction);
Fraction fraction_from_json(const json& doc);
json to_json(const ScoringConfig& config);
ScoringConfig config_from_json(const json& doc);
json to_json(const Aggregate& aggregate);
json to_json(const ScoreReport& report);
ScoreReport score_report_from_json(const json& doc);

}  // namespace miot
