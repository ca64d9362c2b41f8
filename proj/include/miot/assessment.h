#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "canonical.h"
#include "catalog.h"
#include "error.h"

namespace miot {

enum class ComplianceLevel {
  Yes,
  No,
  PartialLow,
  PartialModerate,
  PartialHigh,
  DoesNotApply,
  AlternateApproach,
  Unknown,
};

inline constexpr ComplianceLevel kAllLevels[] = {
    ComplianceLevel::Yes,          ComplianceLevel::No,
    ComplianceLevel::PartialLow,   ComplianceLevel::PartialModerate,
    ComplianceLevel::PartialHigh,  ComplianceLevel::DoesNotApply,
    ComplianceLevel::AlternateApproach, ComplianceLevel::Unknown,
};

std::string_view to_string(ComplianceLevel level);
/// Accepts the PascalCase names plus the workbook abbreviations (PL, PM, PH)
/// and kebab/lower forms such as "does-not-apply".
ComplianceLevel level_from_string(std::string_view text);

/// Assessor guidance for each answer. Compliance above 75% of an
/// Expectation's requirement is answered Yes.
std::string_view level_guidance(ComplianceLevel level);

enum class ControlType { Administrative, Technical, Physical };

std::string_view to_string(ControlType type);
ControlType control_type_from_string(std::string_view text);

struct Response {
  int expectation_id = 0;
  ComplianceLevel level = ComplianceLevel::Unknown;
  std::string validation_point;
  std::optional<std::string> validation_tool;
  std::set<ControlType> control_types;
  std::optional<std::string> comments;

  friend bool operator==(const Response&, const Response&) = default;
};

/// Response-local rule violations (Error severity only).
std::vector<Finding> response_errors(const Response& response);

struct DeviceMeta {
  std::string organization;
  std::string device_name;
  std::string manufacturer;
  std::string model;
  std::optional<std::string> firmware_version;
  std::optional<std::string> sbom_ref;
  std::optional<std::string> notes;

  friend bool operator==(const DeviceMeta&, const DeviceMeta&) = default;
};

enum class AssessmentStatus { Draft, Complete };

std::string_view to_string(AssessmentStatus status);
AssessmentStatus status_from_string(std::string_view text);

struct Assessment {
  std::string id;
  DeviceMeta device;
  std::string catalog_version;
  std::string catalog_checksum;
  std::map<int, Response> responses;
  bool include_optional = false;
  Timestamp created_at{};
  Timestamp updated_at{};
  AssessmentStatus status = AssessmentStatus::Draft;

  friend bool operator==(const Assessment&, const Assessment&) = default;
};

/// Throws CatalogMismatch unless the assessment is pinned to `catalog`.
void require_pinned(const Assessment& assessment, const ExpectationCatalog& catalog);

Assessment new_assessment(const DeviceMeta& device, const ExpectationCatalog& catalog,
                          bool include_optional, Timestamp now = utc_now(),
                          std::optional<std::string> id = std::nullopt);

/// Inserts or replaces one response. Status is recomputed on the result.
/// Throws OutOfScope or ValidationError; the input is never modified.
Assessment set_response(const Assessment& assessment, const ExpectationCatalog& catalog,
                        const Response& response, Timestamp now = utc_now());

/// All findings, ordered: whole-document first, then by expectation id.
/// Error findings block completion; warnings do not.
std::vector<Finding> validate(const Assessment& assessment, const ExpectationCatalog& catalog);

bool has_errors(const std::vector<Finding>& findings);

/// Status implied by the current responses.
AssessmentStatus recompute_status(const Assessment& assessment,
                                  const ExpectationCatalog& catalog);

json to_json(const Response& response);
Response response_from_json(const json& doc);
json to_json(const DeviceMeta& device);
DeviceMeta device_from_json(const json& doc);
json to_json(const Assessment& assessment);
Assessment assessment_from_json(const json& doc);
json to_json(const Finding& finding);
json to_json(const std::vector<Finding>& findings);

std::string_view to_string(Severity severity);

}  // namespace miot
