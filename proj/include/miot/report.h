#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catalog.h"
#include "fraction.h"
#include "planner.h"
#include "scoring.h"

namespace miot::report {

enum class RadarMode { PerSubGoal, PerGoal, PerExpectation };

std::string_view to_string(RadarMode mode);
/// Accepts PascalCase and kebab forms ("per-subgoal", "per-goal", "per-expectation").
RadarMode radar_mode_from_string(std::string_view text);

struct RadarAxis {
  std::string label;
  Fraction fraction;
};

struct RadarSpec {
  std::vector<RadarAxis> axes;
  RadarMode mode = RadarMode::PerSubGoal;
  int size = 640;
  std::optional<Fraction> threshold_ring;

  /// Provenance written into the graphic as a comment; empty fields are skipped.
  std::string assessment_id;
  std::string catalog_checksum;
  std::string config_summary;
  std::optional<Timestamp> generated_at;
};

/// Chart geometry shared by the renderer and its tests.
struct RadarGeometry {
  double cx;
  double cy;
  double radius;
  double label_radius;

  static RadarGeometry for_size(int size);
};

RadarSpec radar_spec(const ScoreReport& report, const ExpectationCatalog& catalog,
                     RadarMode mode = RadarMode::PerSubGoal,
                     std::optional<Fraction> threshold_ring = std::nullopt);

/// Standalone SVG document. Throws TooFewAxes for fewer than three axes.
std::string render_radar(const RadarSpec& spec);

std::string render_table(const ScoreReport& report, const ExpectationCatalog& catalog);
std::string render_csv(const ScoreReport& report, const ExpectationCatalog& catalog);
std::string render_diff(const ScoreReport& older, const ScoreReport& newer,
                        const ExpectationCatalog& catalog);
std::string render_plan(const RemediationPlan& plan, const ExpectationCatalog& catalog);
std::string render_findings(const std::vector<Finding>& findings);

/// "19.75/25 = 79.00%"
std::string format_ratio(const Aggregate& aggregate);
/// Signed decimal such as "+0.04" or "-0.125"; "0" when zero.
std::string format_delta(const Fraction& delta);

}  // namespace miot::report
