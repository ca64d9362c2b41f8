#include "fixtures.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace miot::testing {

Assessment make_assessment(const Levels& levels, bool include_optional, const std::string& id) {
  const ExpectationCatalog& catalog = default_catalog();
  DeviceMeta d{"General Hospital", "Infusion Pump", "Acme Medical", "IP-200", "4.2.1", {}, {}};
  Assessment a = new_assessment(d, catalog, include_optional, Timestamp{}, id);
  for (const auto& [eid, level] : levels) {
    Response r;
    r.expectation_id = eid;
    r.level = level;
    r.validation_point = "evidence for " + std::to_string(eid);
    r.control_types = {ControlType::Technical};
    if (level == ComplianceLevel::DoesNotApply) r.comments = "not applicable to this device";
    a = set_response(a, catalog, r, Timestamp{});
  }
  return a;
}

Levels uniform(ComplianceLevel level, bool include_optional) {
  Levels out;
  for (int id : default_catalog().in_scope_ids(include_optional)) out[id] = level;
  return out;
}

Levels scoring_example() {
  Levels out = uniform(ComplianceLevel::Yes);
  out[19] = out[20] = ComplianceLevel::PartialHigh;
  out[21] = ComplianceLevel::PartialLow;
  out[22] = out[23] = ComplianceLevel::No;
  out[24] = out[25] = ComplianceLevel::DoesNotApply;
  return out;
}

Levels workbook_example() {
  Levels out = uniform(ComplianceLevel::Yes);
  out[1] = ComplianceLevel::No;
  return out;
}

Assessment random_assessment(std::mt19937_64& rng) {
  const bool include_optional = std::bernoulli_distribution(0.5)(rng);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(std::size(kAllLevels)) - 1);
  Levels levels;
  for (int id : default_catalog().in_scope_ids(include_optional)) levels[id] = kAllLevels[pick(rng)];
  return make_assessment(levels, include_optional);
}

Fraction oracle_value(ComplianceLevel level) {
  switch (level) {
    case ComplianceLevel::Yes: return Fraction(1);
    case ComplianceLevel::No: return Fraction(0);
    case ComplianceLevel::PartialLow: return Fraction(25, 100);
    case ComplianceLevel::PartialModerate: return Fraction(50, 100);
    case ComplianceLevel::PartialHigh: return Fraction(75, 100);
    case ComplianceLevel::DoesNotApply: return Fraction(0);
    case ComplianceLevel::AlternateApproach: return Fraction(1);
    case ComplianceLevel::Unknown: return Fraction(0);
  }
  return Fraction(0);
}

Fraction naive_overall(const Assessment& a, const ExpectationCatalog& catalog,
                       const ScoringConfig& config) {
  Fraction sum(0);
  int count = 0;
  for (const Expectation& e : catalog.expectations()) {
    if (e.optional() && !(a.include_optional && config.include_optional_in_aggregate)) continue;
    const ComplianceLevel level = a.responses.at(e.id).level;
    if (config.na_mode == NaMode::ExcludeFromDenominator && level == ComplianceLevel::DoesNotApply) {
      continue;
    }
    sum = sum + oracle_value(level);
    ++count;
  }
  return count == 0 ? Fraction(0) : sum / Fraction(count);
}

int exhaustive_min_plan(const Assessment& a, const ExpectationCatalog& catalog,
                        const ScoringConfig& config, const Fraction& target) {
  // Gains in quarters of each candidate upgrade, derived from the literal
  // value table rather than the library's quarter mapping.
  std::vector<int> gains;
  for (const auto& [id, r] : a.responses) {
    const Expectation& e = catalog.expectation_by_id(id);
    if (e.optional() && !(a.include_optional && config.include_optional_in_aggregate)) continue;
    if (r.level == ComplianceLevel::DoesNotApply || r.level == ComplianceLevel::AlternateApproach) {
      continue;
    }
    const Fraction gain = (Fraction(1) - oracle_value(r.level)) * Fraction(4);
    if (gain > Fraction(0)) gains.push_back(static_cast<int>(gain.numerator()));
  }
  int count = 0;
  Fraction base_sum(0);
  for (const auto& [id, r] : a.responses) {
    const Expectation& e = catalog.expectation_by_id(id);
    if (e.optional() && !(a.include_optional && config.include_optional_in_aggregate)) continue;
    if (config.na_mode == NaMode::ExcludeFromDenominator && r.level == ComplianceLevel::DoesNotApply) {
      continue;
    }
    base_sum = base_sum + oracle_value(r.level);
    ++count;
  }
  const auto reaches = [&](int gain_quarters) {
    if (count == 0) return Fraction(0) >= target;
    return (base_sum + Fraction(gain_quarters, 4)) / Fraction(count) >= target;
  };

  // Visit every subset; remember the largest total gain per subset size.
  const std::size_t n = gains.size();
  std::vector<int> subset_gain(std::size_t{1} << n, 0);
  std::vector<int> best_by_size(n + 1, -1);
  for (std::size_t mask = 0; mask < subset_gain.size(); ++mask) {
    if (mask != 0) {
      const int low = __builtin_ctzll(mask);
      subset_gain[mask] = subset_gain[mask & (mask - 1)] + gains[low];
    }
    int& best = best_by_size[__builtin_popcountll(mask)];
    best = std::max(best, subset_gain[mask]);
  }
  for (std::size_t k = 0; k <= n; ++k) {
    if (reaches(best_by_size[k])) return static_cast<int>(k);
  }
  return -1;  // no subset reaches the target
}

TempDir::TempDir() {
  path_ = std::filesystem::temp_directory_path() / ("miot-test-" + new_uuid());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace miot::testing
