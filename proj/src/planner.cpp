#include "miot/planner.h"

#include <algorithm>

namespace miot {

Assessment apply_deltas(const Assessment& assessment, const ExpectationCatalog& catalog,
                        const std::vector<WhatIfDelta>& deltas) {
  Assessment next = assessment;
  for (const WhatIfDelta& d : deltas) {
    if (!catalog.in_scope(d.expectation_id, assessment.include_optional)) {
      throw OutOfScope("expectation " + std::to_string(d.expectation_id) + " is not in scope");
    }
    auto it = next.responses.find(d.expectation_id);
    if (it == next.responses.end()) {
      throw IncompleteAssessment(
          "no response for expectation " + std::to_string(d.expectation_id),
          {Finding{d.expectation_id, Severity::Error,
                   "missing response for expectation " + std::to_string(d.expectation_id)}});
    }
    if (value_quarters(d.proposed_level) < value_quarters(it->second.level)) {
      throw DowngradeRejected("expectation " + std::to_string(d.expectation_id) + ": " +
                              std::string(to_string(d.proposed_level)) + " would lower " +
                              std::string(to_string(it->second.level)));
    }
    it->second.level = d.proposed_level;
  }
  return next;
}

ScoreReport what_if(const Assessment& assessment, const ExpectationCatalog& catalog,
                    const ScoringConfig& config, const std::vector<WhatIfDelta>& deltas) {
  // The base must pass the completeness gate; the hypothetical answers need
  // not carry evidence, so they are aggregated directly.
  score_assessment(assessment, catalog, config);
  return score_responses(apply_deltas(assessment, catalog, deltas), catalog, config);
}

RemediationPlan plan_remediation(const Assessment& assessment, const ExpectationCatalog& catalog,
                                 const ScoringConfig& config, const Fraction& target) {
  if (target < Fraction(0) || target > Fraction(1)) {
    throw DomainError("target " + to_string(target) + " outside [0,1]");
  }
  const ScoreReport base = score_assessment(assessment, catalog, config);

  RemediationPlan plan;
  plan.target_fraction = target;

  struct Candidate {
    int id;
    int quarters;
  };
  std::vector<Candidate> candidates;
  for (const ExpectationScore& s : base.per_expectation) {
    const Expectation& e = catalog.expectation_by_id(s.expectation_id);
    if (!counts_in_aggregate(e, assessment, config)) continue;
    if (s.level == ComplianceLevel::DoesNotApply || s.level == ComplianceLevel::AlternateApproach) {
      continue;
    }
    if (s.quarters < 4) candidates.push_back({s.expectation_id, s.quarters});
  }
  // Each upgrade adds (4 - quarters) to a fixed denominator, so the largest
  // gains first give the shortest prefix reaching the target.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.quarters != b.quarters ? a.quarters < b.quarters : a.id < b.id;
  });

  const int count = base.overall.applicable_count;
  const auto reaches = [&](int quarters) { return Aggregate{quarters, count}.fraction() >= target; };

  int quarters = base.overall.sum_quarters;
  bool reached = reaches(quarters);
  for (const Candidate& c : candidates) {
    if (reached) break;
    plan.deltas.push_back({c.id, ComplianceLevel::Yes});
    quarters += 4 - c.quarters;
    reached = reaches(quarters);
  }

  plan.projected_fraction =
      score_responses(apply_deltas(assessment, catalog, plan.deltas), catalog, config)
          .overall.fraction();
  plan.feasible = plan.projected_fraction >= target;
  return plan;
}

json to_json(const WhatIfDelta& d) {
  return {{"expectation_id", d.expectation_id}, {"proposed_level", to_string(d.proposed_level)}};
}

WhatIfDelta delta_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("delta must be an object");
  auto id = doc.find("expectation_id");
  auto level = doc.find("proposed_level");
  if (id == doc.end() || !id->is_number_integer()) {
    throw ParseError("delta: 'expectation_id' must be an integer");
  }
  if (level == doc.end() || !level->is_string()) {
    throw ParseError("delta: 'proposed_level' must be a string");
  }
  return {id->get<int>(), level_from_string(level->get<std::string>())};
}

json to_json(const RemediationPlan& p) {
  json deltas = json::array();
  for (const WhatIfDelta& d : p.deltas) deltas.push_back(to_json(d));
  return {{"target_fraction", to_json(p.target_fraction)},
          {"deltas", deltas},
          {"projected_fraction", to_json(p.projected_fraction)},
          {"feasible", p.feasible}};
}

}  // namespace miot
