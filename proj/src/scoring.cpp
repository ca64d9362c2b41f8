#include "miot/scoring.h"

#include <algorithm>
#include <map>

namespace miot {

int value_quarters(ComplianceLevel level) {
  switch (level) {
    case ComplianceLevel::Yes: return 4;
    case ComplianceLevel::No: return 0;
    case ComplianceLevel::PartialLow: return 1;
    case ComplianceLevel::PartialModerate: return 2;
    case ComplianceLevel::PartialHigh: return 3;
    case ComplianceLevel::DoesNotApply: return 0;
    case ComplianceLevel::AlternateApproach: return 4;
    case ComplianceLevel::Unknown: return 0;
  }
  return 0;
}

Fraction score_value(ComplianceLevel level) { return Fraction(value_quarters(level), 4); }

std::string_view to_string(NaMode mode) {
  return mode == NaMode::StrictPaper ? "StrictPaper" : "ExcludeFromDenominator";
}

NaMode na_mode_from_string(std::string_view text) {
  if (text == "StrictPaper" || text == "strict") return NaMode::StrictPaper;
  if (text == "ExcludeFromDenominator" || text == "exclude") return NaMode::ExcludeFromDenominator;
  throw ParseError("unknown na_mode '" + std::string(text) + "' (strict|exclude)");
}

void ScoringConfig::check() const {
  const Fraction zero(0), one(1);
  if (acceptable_threshold < zero || acceptable_threshold > one) {
    throw DomainError("acceptable_threshold must lie in [0,1]");
  }
  if (correctable_floor < zero || correctable_floor > one) {
    throw DomainError("correctable_floor must lie in [0,1]");
  }
  if (correctable_floor > acceptable_threshold) {
    throw DomainError("correctable_floor must not exceed acceptable_threshold");
  }
}

std::string_view to_string(RiskTier tier) {
  switch (tier) {
    case RiskTier::Acceptable: return "Acceptable";
    case RiskTier::Correctable: return "Correctable";
    case RiskTier::Unacceptable: return "Unacceptable";
  }
  return "?";
}

RiskTier tier_from_string(std::string_view text) {
  for (RiskTier t : {RiskTier::Acceptable, RiskTier::Correctable, RiskTier::Unacceptable}) {
    if (to_string(t) == text) return t;
  }
  throw ParseError("unknown risk tier '" + std::string(text) + "'");
}

RiskTier classify_risk(const Fraction& fraction, const ScoringConfig& config) {
  config.check();
  if (fraction < Fraction(0) || fraction > Fraction(1)) {
    throw DomainError("fraction " + to_string(fraction) + " outside [0,1]");
  }
  if (fraction >= config.acceptable_threshold) return RiskTier::Acceptable;
  if (fraction >= config.correctable_floor) return RiskTier::Correctable;
  return RiskTier::Unacceptable;
}

std::string_view to_string(Mitigation m) {
  switch (m) {
    case Mitigation::Reduce: return "REDUCE";
    case Mitigation::Avoid: return "AVOID";
    case Mitigation::Accept: return "ACCEPT";
    case Mitigation::Transfer: return "TRANSFER";
  }
  return "?";
}

std::vector<Mitigation> mitigation_options(RiskTier tier) {
  switch (tier) {
    case RiskTier::Acceptable: return {Mitigation::Accept};
    case RiskTier::Correctable: return {Mitigation::Reduce, Mitigation::Transfer, Mitigation::Accept};
    case RiskTier::Unacceptable: return {Mitigation::Reduce, Mitigation::Avoid, Mitigation::Transfer};
  }
  return {};
}

Fraction Aggregate::fraction() const {
  if (applicable_count == 0) return Fraction(0);
  return Fraction(sum_quarters, 4 * static_cast<std::int64_t>(applicable_count));
}

const ExpectationScore* ScoreReport::find(int expectation_id) const {
  for (const ExpectationScore& s : per_expectation) {
    if (s.expectation_id == expectation_id) return &s;
  }
  return nullptr;
}

const Aggregate* ScoreReport::subgoal(std::string_view id) const {
  for (const auto& [key, agg] : subgoal_scores) {
    if (key == id) return &agg;
  }
  return nullptr;
}

const Aggregate* ScoreReport::goal(GoalId goal) const {
  for (const auto& [key, agg] : goal_scores) {
    if (key == goal) return &agg;
  }
  return nullptr;
}

bool counts_in_aggregate(const Expectation& expectation, const Assessment& assessment,
                         const ScoringConfig& config) {
  if (!expectation.optional()) return true;
  return assessment.include_optional && config.include_optional_in_aggregate;
}

ScoreReport score_responses(const Assessment& assessment, const ExpectationCatalog& catalog,
                            const ScoringConfig& config) {
  require_pinned(assessment, catalog);
  config.check();

  ScoreReport report;
  report.assessment_id = assessment.id;
  report.catalog_version = catalog.version();
  report.catalog_checksum = catalog.checksum();
  report.config = config;

  std::map<std::string, Aggregate> by_subgoal;
  std::map<GoalId, Aggregate> by_goal;
  Aggregate optional_block;

  const auto add = [&](Aggregate& agg, const ExpectationScore& s) {
    if (config.na_mode == NaMode::ExcludeFromDenominator &&
        s.level == ComplianceLevel::DoesNotApply) {
      return;
    }
    agg.sum_quarters += s.quarters;
    agg.applicable_count += 1;
  };

  for (int id : catalog.in_scope_ids(assessment.include_optional)) {
    const Expectation& e = catalog.expectation_by_id(id);
    auto it = assessment.responses.find(id);
    if (it == assessment.responses.end()) {
      throw IncompleteAssessment("missing response for expectation " + std::to_string(id),
                                 {Finding{id, Severity::Error,
                                          "missing response for expectation " + std::to_string(id)}});
    }
    const ExpectationScore s{id, it->second.level, value_quarters(it->second.level)};
    report.per_expectation.push_back(s);

    if (e.optional()) add(optional_block, s);
    if (counts_in_aggregate(e, assessment, config)) {
      add(report.overall, s);
      add(by_subgoal[e.sub_goal], s);
      add(by_goal[e.goal], s);
    }
    const bool excluded_na = config.na_mode == NaMode::ExcludeFromDenominator &&
                             s.level == ComplianceLevel::DoesNotApply;
    if (s.quarters < 4 && !excluded_na) report.deficiencies.push_back(id);
  }

  for (const auto& [id, agg] : by_subgoal) report.subgoal_scores.emplace_back(id, agg);
  for (GoalId g : kAllGoals) {
    if (auto it = by_goal.find(g); it != by_goal.end()) report.goal_scores.emplace_back(g, it->second);
  }
  if (assessment.include_optional) report.optional_scores = optional_block;

  std::stable_sort(report.deficiencies.begin(), report.deficiencies.end(), [&](int a, int b) {
    const int va = report.find(a)->quarters;
    const int vb = report.find(b)->quarters;
    return va != vb ? va < vb : a < b;
  });

  report.risk_tier = classify_risk(report.overall.fraction(), config);
  return report;
}

ScoreReport score_assessment(const Assessment& assessment, const ExpectationCatalog& catalog,
                             const ScoringConfig& config) {
  config.check();
  auto findings = validate(assessment, catalog);
  if (has_errors(findings)) {
    std::vector<Finding> blocking;
    for (Finding& f : findings) {
      if (f.severity == Severity::Error) blocking.push_back(std::move(f));
    }
    const std::string what = "assessment " + assessment.id + " has " +
                             std::to_string(blocking.size()) + " blocking finding(s)";
    throw IncompleteAssessment(what, std::move(blocking));
  }
  return score_responses(assessment, catalog, config);
}

json to_json(const Fraction& f) {
  return {{"decimal", f.to_decimal(4)}, {"numerator", f.numerator()}, {"denominator", f.denominator()}};
}

Fraction fraction_from_json(const json& doc) {
  if (doc.is_object()) {
    auto n = doc.find("numerator");
    auto d = doc.find("denominator");
    if (n == doc.end() || d == doc.end() || !n->is_number_integer() || !d->is_number_integer()) {
      throw ParseError("fraction needs integer numerator and denominator");
    }
    return Fraction(n->get<std::int64_t>(), d->get<std::int64_t>());
  }
  if (doc.is_string()) return Fraction::parse(doc.get<std::string>());
  if (doc.is_number_integer()) return Fraction(doc.get<std::int64_t>());
  if (doc.is_number_float()) {
    // JSON numbers arrive as doubles; reparse the shortest round-trip text.
    return Fraction::parse(json(doc.get<double>()).dump());
  }
  throw ParseError("fraction must be an object, string or number");
}

json to_json(const ScoringConfig& c) {
  return {
      {"na_mode", to_string(c.na_mode)},
      {"acceptable_threshold", to_json(c.acceptable_threshold)},
      {"correctable_floor", to_json(c.correctable_floor)},
      {"include_optional_in_aggregate", c.include_optional_in_aggregate},
  };
}

ScoringConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("config must be an object");
  ScoringConfig c;
  if (auto it = doc.find("na_mode"); it != doc.end()) c.na_mode = na_mode_from_string(it->get<std::string>());
  if (auto it = doc.find("acceptable_threshold"); it != doc.end()) c.acceptable_threshold = fraction_from_json(*it);
  if (auto it = doc.find("correctable_floor"); it != doc.end()) c.correctable_floor = fraction_from_json(*it);
  if (auto it = doc.find("include_optional_in_aggregate"); it != doc.end()) {
    c.include_optional_in_aggregate = it->get<bool>();
  }
  return c;
}

json to_json(const Aggregate& a) {
  return {{"sum", a.sum().to_decimal(2)},
          {"applicable_count", a.applicable_count},
          {"fraction", to_json(a.fraction())}};
}

namespace {

Aggregate aggregate_from_json(const json& doc) {
  Aggregate a;
  const Fraction sum = Fraction::parse(doc.at("sum").get<std::string>());
  const Fraction quarters = sum * Fraction(4);
  if (quarters.denominator() != 1) throw ParseError("aggregate sum is not a multiple of 0.25");
  a.sum_quarters = static_cast<int>(quarters.numerator());
  a.applicable_count = doc.at("applicable_count").get<int>();
  if (fraction_from_json(doc.at("fraction")) != a.fraction()) {
    throw IntegrityError("aggregate fraction disagrees with sum/applicable_count");
  }
  return a;
}

}  // namespace

json to_json(const ScoreReport& r) {
  json per = json::array();
  for (const ExpectationScore& s : r.per_expectation) {
    per.push_back({{"expectation_id", s.expectation_id},
                   {"level", to_string(s.level)},
                   {"value", s.value().to_decimal(2)}});
  }
  json subs = json::object();
  for (const auto& [id, agg] : r.subgoal_scores) subs[id] = to_json(agg);
  json goals = json::object();
  for (const auto& [g, agg] : r.goal_scores) goals[std::string(to_string(g))] = to_json(agg);
  json mitigations = json::array();
  for (Mitigation m : mitigation_options(r.risk_tier)) mitigations.push_back(to_string(m));
  return {
      {"assessment_id", r.assessment_id},
      {"catalog_version", r.catalog_version},
      {"catalog_checksum", r.catalog_checksum},
      {"config", to_json(r.config)},
      {"per_expectation", per},
      {"subgoal_scores", subs},
      {"goal_scores", goals},
      {"overall", to_json(r.overall)},
      {"optional_scores", r.optional_scores ? to_json(*r.optional_scores) : json(nullptr)},
      {"risk_tier", to_string(r.risk_tier)},
      {"mitigation_options", mitigations},
      {"deficiencies", r.deficiencies},
  };
}

ScoreReport score_report_from_json(const json& doc) {
  try {
    ScoreReport r;
    r.assessment_id = doc.at("assessment_id").get<std::string>();
    r.catalog_version = doc.at("catalog_version").get<std::string>();
    r.catalog_checksum = doc.at("catalog_checksum").get<std::string>();
    r.config = config_from_json(doc.at("config"));
    for (const json& s : doc.at("per_expectation")) {
      ExpectationScore es;
      es.expectation_id = s.at("expectation_id").get<int>();
      es.level = level_from_string(s.at("level").get<std::string>());
      es.quarters = value_quarters(es.level);
      if (Fraction::parse(s.at("value").get<std::string>()) != es.value()) {
        throw IntegrityError("value for expectation " + std::to_string(es.expectation_id) +
                             " disagrees with its level");
      }
      r.per_expectation.push_back(es);
    }
    for (const auto& [id, agg] : doc.at("subgoal_scores").items()) {
      r.subgoal_scores.emplace_back(id, aggregate_from_json(agg));
    }
    for (GoalId g : kAllGoals) {
      const json& goals = doc.at("goal_scores");
      if (auto it = goals.find(std::string(to_string(g))); it != goals.end()) {
        r.goal_scores.emplace_back(g, aggregate_from_json(*it));
      }
    }
    r.overall = aggregate_from_json(doc.at("overall"));
    if (const json& opt = doc.at("optional_scores"); !opt.is_null()) {
      r.optional_scores = aggregate_from_json(opt);
    }
    r.risk_tier = tier_from_string(doc.at("risk_tier").get<std::string>());
    r.deficiencies = doc.at("deficiencies").get<std::vector<int>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed score report: ") + e.what());
  }
}

}  // namespace miot
