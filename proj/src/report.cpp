#include "miot/report.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

namespace miot::report {
namespace {

std::string trim_decimal(std::string s) {
  if (s.find('.') == std::string::npos) return s;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string pad_left(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.insert(0, width - out.size(), ' ');
  return out;
}

// Cuts at a byte limit without splitting a UTF-8 sequence.
std::string truncate(std::string_view s, std::size_t limit) {
  if (s.size() <= limit) return std::string(s);
  std::size_t cut = limit - 3;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut)) + "...";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// XML comments may not contain "--".
std::string comment_safe(std::string s) {
  for (std::size_t pos = s.find("--"); pos != std::string::npos; pos = s.find("--")) {
    s.replace(pos, 2, "- ");
  }
  return s;
}

void require_catalog(const ScoreReport& r, const ExpectationCatalog& catalog) {
  if (r.catalog_checksum != catalog.checksum()) {
    throw CatalogMismatch("score report for " + r.assessment_id + " was produced with catalog " +
                          r.catalog_checksum + ", not " + catalog.checksum());
  }
}

std::string config_summary(const ScoringConfig& c) {
  std::string s = std::string(to_string(c.na_mode)) + ", acceptable >= " +
                  c.acceptable_threshold.to_percent() + ", correctable >= " +
                  c.correctable_floor.to_percent();
  if (c.include_optional_in_aggregate) s += ", optional items aggregated";
  return s;
}

std::string join_mitigations(RiskTier tier) {
  std::string out;
  for (Mitigation m : mitigation_options(tier)) {
    if (!out.empty()) out += ", ";
    out += to_string(m);
  }
  return out;
}

std::string level_value(ComplianceLevel level) {
  return std::string(to_string(level)) + " (" + score_value(level).to_decimal(2) + ")";
}

std::vector<std::pair<double, double>> ring(const RadarGeometry& g, std::size_t n, double f) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    pts.emplace_back(g.cx + f * g.radius * std::sin(angle), g.cy - f * g.radius * std::cos(angle));
  }
  return pts;
}

std::string points_attr(const std::vector<std::pair<double, double>>& pts) {
  std::string out;
  for (const auto& [x, y] : pts) {
    if (!out.empty()) out += ' ';
    out += fixed2(x) + "," + fixed2(y);
  }
  return out;
}

double to_double(const Fraction& f) {
  return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

}  // namespace

std::string_view to_string(RadarMode mode) {
  switch (mode) {
    case RadarMode::PerSubGoal: return "PerSubGoal";
    case RadarMode::PerGoal: return "PerGoal";
    case RadarMode::PerExpectation: return "PerExpectation";
  }
  return "?";
}

RadarMode radar_mode_from_string(std::string_view text) {
  if (text == "PerSubGoal" || text == "per-subgoal" || text == "per-sub-goal") {
    return RadarMode::PerSubGoal;
  }
  if (text == "PerGoal" || text == "per-goal") return RadarMode::PerGoal;
  if (text == "PerExpectation" || text == "per-expectation") return RadarMode::PerExpectation;
  throw ParseError("unknown radar mode '" + std::string(text) +
                   "' (per-subgoal|per-goal|per-expectation)");
}

RadarGeometry RadarGeometry::for_size(int size) {
  const double half = size / 2.0;
  const double radius = size * 0.35;
  return {half, half, radius, radius + 14.0};
}

RadarSpec radar_spec(const ScoreReport& report, const ExpectationCatalog& catalog, RadarMode mode,
                     std::optional<Fraction> threshold_ring) {
  require_catalog(report, catalog);
  RadarSpec spec;
  spec.mode = mode;
  spec.threshold_ring = threshold_ring;
  spec.assessment_id = report.assessment_id;
  spec.catalog_checksum = report.catalog_checksum;
  spec.config_summary = config_summary(report.config);

  switch (mode) {
    case RadarMode::PerSubGoal:
      for (const SubGoal* sg : catalog.sub_goals_in_catalog_order()) {
        if (const Aggregate* a = report.subgoal(sg->id)) {
          spec.axes.push_back({sg->title, a->fraction()});
        }
      }
      break;
    case RadarMode::PerGoal:
      for (GoalId g : kAllGoals) {
        if (const Aggregate* a = report.goal(g)) {
          spec.axes.push_back({std::string(goal_title(g)), a->fraction()});
        }
      }
      break;
    case RadarMode::PerExpectation:
      for (const ExpectationScore& s : report.per_expectation) {
        const Expectation& e = catalog.expectation_by_id(s.expectation_id);
        if (e.optional() && !report.config.include_optional_in_aggregate) continue;
        spec.axes.push_back({"E" + std::to_string(s.expectation_id), s.value()});
      }
      break;
  }
  return spec;
}

std::string render_radar(const RadarSpec& spec) {
  const std::size_t n = spec.axes.size();
  if (n < 3) {
    throw TooFewAxes("a radar chart needs at least 3 axes, got " + std::to_string(n));
  }
  if (spec.size < 120) throw DomainError("radar size must be at least 120 px");
  for (const RadarAxis& a : spec.axes) {
    if (a.fraction < Fraction(0) || a.fraction > Fraction(1)) {
      throw DomainError("radar axis '" + a.label + "' fraction outside [0,1]");
    }
  }
  const RadarGeometry g = RadarGeometry::for_size(spec.size);
  const std::string size = std::to_string(spec.size);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";

  std::string meta = "miot-gauge radar; mode=" + std::string(to_string(spec.mode));
  if (!spec.assessment_id.empty()) meta += "; assessment=" + spec.assessment_id;
  if (!spec.catalog_checksum.empty()) meta += "; catalog=" + spec.catalog_checksum;
  if (!spec.config_summary.empty()) meta += "; config=" + spec.config_summary;
  if (spec.generated_at) meta += "; generated=" + to_rfc3339(*spec.generated_at);
  svg << "<!-- " << comment_safe(meta) << " -->\n";

  svg << "<rect width=\"" << size << "\" height=\"" << size << "\" fill=\"#ffffff\"/>\n";
  svg << "<g class=\"grid\" fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"1\">\n";
  for (int step = 1; step <= 4; ++step) {
    svg << "<polygon class=\"ring\" data-fraction=\"" << Fraction(step, 4).to_decimal(2)
        << "\" points=\"" << points_attr(ring(g, n, step / 4.0)) << "\"/>\n";
  }
  for (const auto& [x, y] : ring(g, n, 1.0)) {
    svg << "<line class=\"spoke\" x1=\"" << fixed2(g.cx) << "\" y1=\"" << fixed2(g.cy)
        << "\" x2=\"" << fixed2(x) << "\" y2=\"" << fixed2(y) << "\"/>\n";
  }
  svg << "</g>\n";

  if (spec.threshold_ring) {
    svg << "<polygon class=\"threshold\" data-fraction=\"" << spec.threshold_ring->to_decimal(4)
        << "\" points=\"" << points_attr(ring(g, n, to_double(*spec.threshold_ring)))
        << "\" fill=\"none\" stroke=\"#d9534f\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  }

  std::vector<std::pair<double, double>> data;
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double r = to_double(spec.axes[k].fraction) * g.radius;
    data.emplace_back(g.cx + r * std::sin(angle), g.cy - r * std::cos(angle));
  }
  svg << "<polygon class=\"data\" points=\"" << points_attr(data)
      << "\" fill=\"#337ab7\" fill-opacity=\"0.35\" stroke=\"#337ab7\" stroke-width=\"2\"/>\n";

  svg << "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double s = std::sin(angle);
    const double x = g.cx + g.label_radius * s;
    const double y = g.cy - g.label_radius * std::cos(angle);
    const char* anchor = std::abs(s) < 0.1 ? "middle" : (s > 0 ? "start" : "end");
    svg << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(y) << "\" text-anchor=\"" << anchor
        << "\" dominant-baseline=\"middle\">" << xml_escape(spec.axes[k].label) << " ("
        << spec.axes[k].fraction.to_percent() << ")</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string format_ratio(const Aggregate& a) {
  return trim_decimal(a.sum().to_decimal(2)) + "/" + std::to_string(a.applicable_count) + " = " +
         a.fraction().to_percent();
}

std::string format_delta(const Fraction& delta) {
  if (delta == Fraction(0)) return "0";
  const bool negative = delta < Fraction(0);
  const Fraction mag = negative ? Fraction(0) - delta : delta;
  return (negative ? "-" : "+") + trim_decimal(mag.to_decimal(4));
}

std::string render_table(const ScoreReport& report, const ExpectationCatalog& catalog) {
  require_catalog(report, catalog);
  std::ostringstream out;
  out << "Assessment   " << report.assessment_id << "\n"
      << "Catalog      " << report.catalog_version << " sha256:" << report.catalog_checksum << "\n"
      << "Scoring      " << config_summary(report.config) << "\n\n";

  out << "  ID  " << pad("Expectation", 46) << "  " << pad("Level", 17) << "  Value  Sub-goal\n";
  for (const ExpectationScore& s : report.per_expectation) {
    const Expectation& e = catalog.expectation_by_id(s.expectation_id);
    out << pad_left(std::to_string(s.expectation_id), 4) << "  " << pad(truncate(e.text, 46), 46)
        << "  " << pad(to_string(s.level), 17) << "  " << pad_left(s.value().to_decimal(2), 5)
        << "  " << catalog.sub_goal(e.sub_goal).title << "\n";
  }

  out << "\nSub-goal\n";
  for (const SubGoal* sg : catalog.sub_goals_in_catalog_order()) {
    if (const Aggregate* a = report.subgoal(sg->id)) {
      out << "  " << pad(sg->title, 40) << "  " << format_ratio(*a) << "\n";
    }
  }
  out << "Goal\n";
  for (GoalId g : kAllGoals) {
    if (const Aggregate* a = report.goal(g)) {
      out << "  " << pad(goal_title(g), 40) << "  " << format_ratio(*a) << "\n";
    }
  }
  out << pad("Overall", 42) << "  " << format_ratio(report.overall) << "\n";
  if (report.optional_scores) {
    out << pad("Optional (IR 8259 series)", 42) << "  " << format_ratio(*report.optional_scores)
        << "\n";
  }
  out << "\nRisk tier    " << to_string(report.risk_tier) << "\n"
      << "Mitigation   " << join_mitigations(report.risk_tier) << "\n"
      << "Deficiencies ";
  if (report.deficiencies.empty()) {
    out << "none";
  } else {
    for (std::size_t i = 0; i < report.deficiencies.size(); ++i) {
      if (i) out << ", ";
      out << report.deficiencies[i];
    }
  }
  out << "\n";
  return out.str();
}

std::string render_csv(const ScoreReport& report, const ExpectationCatalog& catalog) {
  require_catalog(report, catalog);
  std::string out = "expectation_id,level,value,sub_goal,goal\n";
  for (const ExpectationScore& s : report.per_expectation) {
    const Expectation& e = catalog.expectation_by_id(s.expectation_id);
    out += std::to_string(s.expectation_id) + "," + std::string(to_string(s.level)) + "," +
           s.value().to_decimal(2) + "," + e.sub_goal + "," + std::string(to_string(e.goal)) + "\n";
  }
  return out;
}

std::string render_diff(const ScoreReport& older, const ScoreReport& newer,
                        const ExpectationCatalog& catalog) {
  if (older.catalog_checksum != newer.catalog_checksum) {
    throw CatalogMismatch("cannot diff reports scored against different catalogs (" +
                          older.catalog_checksum + " vs " + newer.catalog_checksum + ")");
  }
  require_catalog(older, catalog);

  std::set<int> ids;
  for (const ExpectationScore& s : older.per_expectation) ids.insert(s.expectation_id);
  for (const ExpectationScore& s : newer.per_expectation) ids.insert(s.expectation_id);

  std::ostringstream out;
  out << "Diff         " << older.assessment_id << " -> " << newer.assessment_id << "\n";
  int changes = 0;
  for (int id : ids) {
    const ExpectationScore* a = older.find(id);
    const ExpectationScore* b = newer.find(id);
    if (a && b && a->level == b->level) continue;
    if (changes++ == 0) out << "  ID  " << pad("Old", 26) << "    New\n";
    out << pad_left(std::to_string(id), 4) << "  " << pad(a ? level_value(a->level) : "-", 26)
        << " -> " << (b ? level_value(b->level) : "-") << "\n";
  }
  if (changes == 0) out << "no changes\n";

  const Fraction delta = newer.overall.fraction() - older.overall.fraction();
  out << "Overall      " << older.overall.fraction().to_percent() << " -> "
      << newer.overall.fraction().to_percent() << " (delta " << format_delta(delta) << ")\n";
  out << "Tier         ";
  if (older.risk_tier == newer.risk_tier) {
    out << to_string(newer.risk_tier) << " (unchanged)\n";
  } else {
    out << to_string(older.risk_tier) << " -> " << to_string(newer.risk_tier) << "\n";
  }
  return out.str();
}

std::string render_plan(const RemediationPlan& plan, const ExpectationCatalog& catalog) {
  std::ostringstream out;
  out << "Target       " << plan.target_fraction.to_percent() << "\n"
      << "Projected    " << plan.projected_fraction.to_percent() << "\n"
      << "Feasible     " << (plan.feasible ? "yes" : "no") << "\n"
      << "Upgrades     " << plan.deltas.size() << "\n";
  for (const WhatIfDelta& d : plan.deltas) {
    const Expectation& e = catalog.expectation_by_id(d.expectation_id);
    out << pad_left(std::to_string(d.expectation_id), 4) << "  -> " << pad(to_string(d.proposed_level), 5)
        << "  " << truncate(e.text, 60) << "\n";
  }
  return out.str();
}

std::string render_findings(const std::vector<Finding>& findings) {
  if (findings.empty()) return "no findings\n";
  std::ostringstream out;
  for (const Finding& f : findings) {
    out << pad("[" + std::string(to_string(f.severity)) + "]", 10)
        << (f.expectation_id ? "expectation " + std::to_string(*f.expectation_id) : "document")
        << ": " << f.message << "\n";
  }
  return out.str();
}

}  // namespace miot::report
