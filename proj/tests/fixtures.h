#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "miot/assessment.h"
#include "miot/catalog.h"
#include "miot/fraction.h"
#include "miot/scoring.h"

namespace miot::testing {

using Levels = std::map<int, ComplianceLevel>;

/// Builds an assessment over the bundled catalog with a response per entry.
/// Every response carries the evidence its level requires, so the result is
/// Complete whenever `levels` covers the scope.
Assessment make_assessment(const Levels& levels, bool include_optional = false,
                           const std::string& id = "00000000-0000-4000-8000-000000000001");

/// Levels for every core item set to `level`.
Levels uniform(ComplianceLevel level, bool include_optional = false);

/// 1-18 Yes, 19-20 PartialHigh, 21 PartialLow, 22-23 No, 24-25 DoesNotApply.
Levels scoring_example();

/// Workbook rows 1-9 (1 No, 2-9 Yes); the remaining items Yes.
Levels workbook_example();

Assessment random_assessment(std::mt19937_64& rng);

/// Independent overall-fraction recomputation: sums per-level rational values
/// from a literal table, one Expectation at a time.
Fraction naive_overall(const Assessment& a, const ExpectationCatalog& catalog,
                       const ScoringConfig& config);

/// Literal value table used by the oracle.
Fraction oracle_value(ComplianceLevel level);

/// Minimum number of upgrades-to-Yes reaching `target`, found by enumerating
/// every subset of candidates.
int exhaustive_min_plan(const Assessment& a, const ExpectationCatalog& catalog,
                        const ScoringConfig& config, const Fraction& target);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace miot::testing
