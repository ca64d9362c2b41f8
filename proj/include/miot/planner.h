#pragma once

#include <vector>

#include "scoring.h"

namespace miot {

struct WhatIfDelta {
  int expectation_id = 0;
  ComplianceLevel proposed_level = ComplianceLevel::Yes;

  friend bool operator==(const WhatIfDelta&, const WhatIfDelta&) = default;
};

struct RemediationPlan {
  Fraction target_fraction;
  std::vector<WhatIfDelta> deltas;
  Fraction projected_fraction;
  bool feasible = false;

  friend bool operator==(const RemediationPlan&, const RemediationPlan&) = default;
};

/// Applies deltas to a copy of the assessment. Throws OutOfScope or
/// DowngradeRejected.
Assessment apply_deltas(const Assessment& assessment, const ExpectationCatalog& catalog,
                        const std::vector<WhatIfDelta>& deltas);

/// Score of the hypothetical assessment with `deltas` applied. The base
/// assessment must itself be scoreable.
ScoreReport what_if(const Assessment& assessment, const ExpectationCatalog& catalog,
                    const ScoringConfig& config, const std::vector<WhatIfDelta>& deltas);

/// Smallest set of upgrades-to-Yes that lifts overall to `target`. Ties go to
/// the lowest current value, then the lowest id. DoesNotApply and
/// AlternateApproach answers are never candidates.
RemediationPlan plan_remediation(const Assessment& assessment, const ExpectationCatalog& catalog,
                                 const ScoringConfig& config, const Fraction& target);

json to_json(const WhatIfDelta& delta);
WhatIfDelta delta_from_json(const json& doc);
json to_json(const RemediationPlan& plan);

}  // namespace miot
