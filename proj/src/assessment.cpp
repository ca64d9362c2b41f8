#include "miot/assessment.h"

#include <algorithm>
#include <cctype>

namespace miot {
namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool blank(const std::string& s) { return blank(std::string_view(s)); }

bool blank(const std::optional<std::string>& s) { return !s || blank(std::string_view(*s)); }

std::string normalize_token(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& obj, const char* key,
                                                const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(where + ": '" + key + "' must be a string or null");
  return it->get<std::string>();
}

std::string read_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  if (!it->is_string()) throw ParseError(where + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

Finding error_at(int id, std::string message) {
  return Finding{id, Severity::Error, std::move(message)};
}

}  // namespace

std::string_view to_string(ComplianceLevel level) {
  switch (level) {
    case ComplianceLevel::Yes: return "Yes";
    case ComplianceLevel::No: return "No";
    case ComplianceLevel::PartialLow: return "PartialLow";
    case ComplianceLevel::PartialModerate: return "PartialModerate";
    case ComplianceLevel::PartialHigh: return "PartialHigh";
    case ComplianceLevel::DoesNotApply: return "DoesNotApply";
    case ComplianceLevel::AlternateApproach: return "AlternateApproach";
    case ComplianceLevel::Unknown: return "Unknown";
  }
  return "?";
}

ComplianceLevel level_from_string(std::string_view text) {
  const std::string key = normalize_token(text);
  for (ComplianceLevel level : kAllLevels) {
    if (normalize_token(to_string(level)) == key) return level;
  }
  if (key == "pl") return ComplianceLevel::PartialLow;
  if (key == "pm") return ComplianceLevel::PartialModerate;
  if (key == "ph") return ComplianceLevel::PartialHigh;
  if (key == "na" || key == "n/a" || key == "dna") return ComplianceLevel::DoesNotApply;
  if (key == "aa") return ComplianceLevel::AlternateApproach;
  throw ParseError("unknown compliance level '" + std::string(text) + "'");
}

std::string_view level_guidance(ComplianceLevel level) {
  switch (level) {
    case ComplianceLevel::Yes:
      return "The device complies with the Expectation (more than 75% of the requirement is met).";
    case ComplianceLevel::No: return "The device does not comply with the Expectation.";
    case ComplianceLevel::PartialLow: return "Compliance is limited (0%-25%).";
    case ComplianceLevel::PartialModerate: return "Compliance is moderate (25%-50%).";
    case ComplianceLevel::PartialHigh: return "Compliance is high (50%-75%).";
    case ComplianceLevel::DoesNotApply:
      return "The Expectation does not apply to the device; an explanation is required.";
    case ComplianceLevel::AlternateApproach:
      return "An alternate approach satisfies the Expectation; record its validation point.";
    case ComplianceLevel::Unknown: return "It is unknown whether compliance is possible.";
  }
  return "";
}

std::string_view to_string(ControlType type) {
  switch (type) {
    case ControlType::Administrative: return "Administrative";
    case ControlType::Technical: return "Technical";
    case ControlType::Physical: return "Physical";
  }
  return "?";
}

ControlType control_type_from_string(std::string_view text) {
  const std::string key = normalize_token(text);
  for (ControlType t : {ControlType::Administrative, ControlType::Technical, ControlType::Physical}) {
    if (normalize_token(to_string(t)) == key) return t;
  }
  throw ParseError("unknown control type '" + std::string(text) + "'");
}

std::string_view to_string(AssessmentStatus status) {
  return status == AssessmentStatus::Draft ? "Draft" : "Complete";
}

AssessmentStatus status_from_string(std::string_view text) {
  if (text == "Draft") return AssessmentStatus::Draft;
  if (text == "Complete") return AssessmentStatus::Complete;
  throw ParseError("unknown status '" + std::string(text) + "'");
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "Error" : "Warning";
}

std::vector<Finding> response_errors(const Response& r) {
  std::vector<Finding> out;
  if (r.level == ComplianceLevel::DoesNotApply && blank(r.comments)) {
    out.push_back(error_at(r.expectation_id, "does not apply: explanation required in comments"));
  }
  if (r.level == ComplianceLevel::AlternateApproach && blank(r.validation_point)) {
    out.push_back(error_at(r.expectation_id, "alternate approach requires validation point"));
  }
  return out;
}

void require_pinned(const Assessment& assessment, const ExpectationCatalog& catalog) {
  if (assessment.catalog_checksum != catalog.checksum()) {
    throw CatalogMismatch("assessment " + assessment.id + " is pinned to catalog " +
                          assessment.catalog_version + " (" + assessment.catalog_checksum +
                          "), not " + catalog.version() + " (" + catalog.checksum() + ")");
  }
}

Assessment new_assessment(const DeviceMeta& device, const ExpectationCatalog& catalog,
                          bool include_optional, Timestamp now, std::optional<std::string> id) {
  if (blank(device.organization)) throw InvalidDevice("device: organization must not be empty");
  if (blank(device.device_name)) throw InvalidDevice("device: device_name must not be empty");
  if (id && !is_uuid(*id)) throw InvalidDevice("assessment id must be a lowercase UUID");
  Assessment a;
  a.id = id ? *id : new_uuid();
  a.device = device;
  a.catalog_version = catalog.version();
  a.catalog_checksum = catalog.checksum();
  a.include_optional = include_optional;
  a.created_at = now;
  a.updated_at = now;
  a.status = AssessmentStatus::Draft;
  return a;
}

Assessment set_response(const Assessment& assessment, const ExpectationCatalog& catalog,
                        const Response& response, Timestamp now) {
  require_pinned(assessment, catalog);
  if (!catalog.in_scope(response.expectation_id, assessment.include_optional)) {
    throw OutOfScope("expectation " + std::to_string(response.expectation_id) +
                     " is not in scope for assessment " + assessment.id);
  }
  if (auto errors = response_errors(response); !errors.empty()) {
    const std::string what = errors.front().message;
    throw ValidationError(what, std::move(errors));
  }
  Assessment next = assessment;
  next.responses[response.expectation_id] = response;
  next.updated_at = now;
  next.status = recompute_status(next, catalog);
  return next;
}

std::vector<Finding> validate(const Assessment& assessment, const ExpectationCatalog& catalog) {
  require_pinned(assessment, catalog);
  std::vector<Finding> doc_level;
  std::vector<Finding> per_item;

  if (blank(assessment.device.organization) || blank(assessment.device.device_name)) {
    doc_level.push_back({std::nullopt, Severity::Error, "device organization and name are required"});
  }
  for (const auto& [id, r] : assessment.responses) {
    if (r.expectation_id != id) {
      per_item.push_back(error_at(id, "response keyed " + std::to_string(id) +
                                          " names expectation " +
                                          std::to_string(r.expectation_id)));
    }
    if (!catalog.in_scope(id, assessment.include_optional)) {
      per_item.push_back(error_at(id, "response for out-of-scope expectation " +
                                          std::to_string(id)));
    }
  }
  for (int id : catalog.in_scope_ids(assessment.include_optional)) {
    auto it = assessment.responses.find(id);
    if (it == assessment.responses.end()) {
      per_item.push_back(error_at(id, "missing response for expectation " + std::to_string(id)));
      continue;
    }
    const Response& r = it->second;
    for (Finding& f : response_errors(r)) per_item.push_back(std::move(f));
    const bool affirmative = r.level == ComplianceLevel::Yes ||
                             r.level == ComplianceLevel::PartialLow ||
                             r.level == ComplianceLevel::PartialModerate ||
                             r.level == ComplianceLevel::PartialHigh;
    if (affirmative && blank(r.validation_point)) {
      per_item.push_back({id, Severity::Warning, "no validation point recorded"});
    }
    if (r.control_types.empty()) {
      per_item.push_back({id, Severity::Warning, "no control type recorded"});
    }
  }
  std::stable_sort(per_item.begin(), per_item.end(),
                   [](const Finding& a, const Finding& b) { return a.expectation_id < b.expectation_id; });
  doc_level.insert(doc_level.end(), per_item.begin(), per_item.end());
  return doc_level;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::Error; });
}

AssessmentStatus recompute_status(const Assessment& assessment, const ExpectationCatalog& catalog) {
  return has_errors(validate(assessment, catalog)) ? AssessmentStatus::Draft
                                                   : AssessmentStatus::Complete;
}

json to_json(const Response& r) {
  json types = json::array();
  for (ControlType t : r.control_types) types.push_back(to_string(t));
  return {
      {"expectation_id", r.expectation_id},
      {"level", to_string(r.level)},
      {"validation_point", r.validation_point},
      {"validation_tool", optional_string(r.validation_tool)},
      {"control_types", types},
      {"comments", optional_string(r.comments)},
  };
}

Response response_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("response must be an object");
  Response r;
  auto id = doc.find("expectation_id");
  if (id == doc.end() || !id->is_number_integer()) {
    throw ParseError("response: 'expectation_id' must be an integer");
  }
  r.expectation_id = id->get<int>();
  const std::string where = "response " + std::to_string(r.expectation_id);
  r.level = level_from_string(read_string(doc, "level", where));
  if (auto vp = doc.find("validation_point"); vp != doc.end() && !vp->is_null()) {
    if (!vp->is_string()) throw ParseError(where + ": 'validation_point' must be a string");
    r.validation_point = vp->get<std::string>();
  }
  r.validation_tool = read_optional_string(doc, "validation_tool", where);
  r.comments = read_optional_string(doc, "comments", where);
  if (auto ct = doc.find("control_types"); ct != doc.end() && !ct->is_null()) {
    if (!ct->is_array()) throw ParseError(where + ": 'control_types' must be an array");
    for (const json& t : *ct) {
      if (!t.is_string()) throw ParseError(where + ": control types must be strings");
      r.control_types.insert(control_type_from_string(t.get<std::string>()));
    }
  }
  return r;
}

json to_json(const DeviceMeta& d) {
  return {
      {"organization", d.organization},
      {"device_name", d.device_name},
      {"manufacturer", d.manufacturer},
      {"model", d.model},
      {"firmware_version", optional_string(d.firmware_version)},
      {"sbom_ref", optional_string(d.sbom_ref)},
      {"notes", optional_string(d.notes)},
  };
}

DeviceMeta device_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("device must be an object");
  DeviceMeta d;
  d.organization = read_string(doc, "organization", "device");
  d.device_name = read_string(doc, "device_name", "device");
  d.manufacturer = read_optional_string(doc, "manufacturer", "device").value_or("");
  d.model = read_optional_string(doc, "model", "device").value_or("");
  d.firmware_version = read_optional_string(doc, "firmware_version", "device");
  d.sbom_ref = read_optional_string(doc, "sbom_ref", "device");
  d.notes = read_optional_string(doc, "notes", "device");
  return d;
}

json to_json(const Assessment& a) {
  json responses = json::object();
  for (const auto& [id, r] : a.responses) responses[std::to_string(id)] = to_json(r);
  return {
      {"id", a.id},
      {"device", to_json(a.device)},
      {"catalog_version", a.catalog_version},
      {"catalog_checksum", a.catalog_checksum},
      {"responses", responses},
      {"include_optional", a.include_optional},
      {"created_at", to_rfc3339(a.created_at)},
      {"updated_at", to_rfc3339(a.updated_at)},
      {"status", to_string(a.status)},
  };
}

Assessment assessment_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("assessment must be an object");
  Assessment a;
  a.id = read_string(doc, "id", "assessment");
  if (!is_uuid(a.id)) throw ParseError("assessment: id '" + a.id + "' is not a lowercase UUID");
  auto dev = doc.find("device");
  if (dev == doc.end()) throw ParseError("assessment: missing key 'device'");
  a.device = device_from_json(*dev);
  a.catalog_version = read_string(doc, "catalog_version", "assessment");
  a.catalog_checksum = read_string(doc, "catalog_checksum", "assessment");
  auto inc = doc.find("include_optional");
  if (inc == doc.end() || !inc->is_boolean()) {
    throw ParseError("assessment: 'include_optional' must be a boolean");
  }
  a.include_optional = inc->get<bool>();
  a.created_at = parse_rfc3339(read_string(doc, "created_at", "assessment"));
  a.updated_at = parse_rfc3339(read_string(doc, "updated_at", "assessment"));
  a.status = status_from_string(read_string(doc, "status", "assessment"));
  auto resp = doc.find("responses");
  if (resp == doc.end() || !resp->is_object()) {
    throw ParseError("assessment: 'responses' must be an object keyed by expectation id");
  }
  for (const auto& [key, value] : resp->items()) {
    Response r = response_from_json(value);
    if (std::to_string(r.expectation_id) != key) {
      throw ParseError("assessment: response keyed '" + key + "' names expectation " +
                       std::to_string(r.expectation_id));
    }
    a.responses.emplace(r.expectation_id, std::move(r));
  }
  return a;
}

json to_json(const Finding& f) {
  return {
      {"expectation_id", f.expectation_id ? json(*f.expectation_id) : json(nullptr)},
      {"severity", to_string(f.severity)},
      {"message", f.message},
  };
}

json to_json(const std::vector<Finding>& findings) {
  json out = json::array();
  for (const Finding& f : findings) out.push_back(to_json(f));
  return out;
}

}  // namespace miot
