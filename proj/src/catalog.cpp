#include "miot/catalog.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "miot/error.h"

namespace miot {
namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> token_list(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + ": '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const json& item : v) {
    if (!item.is_string()) throw ParseError(where + ": '" + key + "' entries must be strings");
    std::string token = item.get<std::string>();
    if (!is_reference_token(token)) {
      throw IntegrityError(where + ": malformed reference token '" + token + "' in " + key);
    }
    out.push_back(std::move(token));
  }
  return out;
}

}  // namespace

std::string_view to_string(GoalId goal) {
  switch (goal) {
    case GoalId::DeviceSecurity: return "DeviceSecurity";
    case GoalId::DataSecurity: return "DataSecurity";
    case GoalId::IndividualPrivacy: return "IndividualPrivacy";
  }
  return "?";
}

std::string_view goal_title(GoalId goal) {
  switch (goal) {
    case GoalId::DeviceSecurity: return "Protect Device Security";
    case GoalId::DataSecurity: return "Protect Data Security";
    case GoalId::IndividualPrivacy: return "Protect Individuals' Privacy";
  }
  return "?";
}

GoalId goal_from_string(std::string_view text) {
  for (GoalId g : kAllGoals) {
    if (to_string(g) == text) return g;
  }
  throw ParseError("unknown goal '" + std::string(text) + "'");
}

std::string_view to_string(ExpectationSource source) {
  return source == ExpectationSource::IR8228 ? "IR8228" : "IR8259Optional";
}

ExpectationSource source_from_string(std::string_view text) {
  if (text == "IR8228") return ExpectationSource::IR8228;
  if (text == "IR8259Optional") return ExpectationSource::IR8259Optional;
  throw ParseError("unknown expectation source '" + std::string(text) + "'");
}

bool is_reference_token(std::string_view token) {
  static const std::regex kPattern(R"([A-Z]{2}(\.[A-Z]{2})?-[0-9]+(\([0-9]+\))*)");
  return std::regex_match(token.begin(), token.end(), kPattern);
}

std::vector<const SubGoal*> ExpectationCatalog::sub_goals_in_catalog_order() const {
  std::vector<const SubGoal*> out;
  std::set<std::string_view> seen;
  for (const Expectation& e : expectations_) {
    if (seen.insert(e.sub_goal).second) out.push_back(&sub_goal(e.sub_goal));
  }
  for (const SubGoal& s : sub_goals_) {
    if (seen.insert(s.id).second) out.push_back(&s);
  }
  return out;
}

const SubGoal& ExpectationCatalog::sub_goal(std::string_view id) const {
  auto it = std::lower_bound(sub_goals_.begin(), sub_goals_.end(), id,
                             [](const SubGoal& s, std::string_view v) { return s.id < v; });
  if (it == sub_goals_.end() || it->id != id) {
    throw NotFound("no sub-goal '" + std::string(id) + "'");
  }
  return *it;
}

const Expectation* ExpectationCatalog::find(int id) const {
  auto it = std::lower_bound(expectations_.begin(), expectations_.end(), id,
                             [](const Expectation& e, int v) { return e.id < v; });
  return it != expectations_.end() && it->id == id ? &*it : nullptr;
}

const Expectation& ExpectationCatalog::expectation_by_id(int id) const {
  if (const Expectation* e = find(id)) return *e;
  throw NotFound("no expectation with id " + std::to_string(id));
}

std::vector<const Expectation*> ExpectationCatalog::expectations_for_control(
    std::string_view control) const {
  std::vector<const Expectation*> out;
  for (const Expectation& e : expectations_) {
    if (std::find(e.control_refs.begin(), e.control_refs.end(), control) != e.control_refs.end()) {
      out.push_back(&e);
    }
  }
  return out;
}

std::vector<int> ExpectationCatalog::in_scope_ids(bool include_optional) const {
  std::vector<int> ids;
  for (const Expectation& e : expectations_) {
    if (include_optional || !e.optional()) ids.push_back(e.id);
  }
  return ids;
}

bool ExpectationCatalog::in_scope(int id, bool include_optional) const {
  const Expectation* e = find(id);
  return e != nullptr && (include_optional || !e->optional());
}

json ExpectationCatalog::to_json() const {
  json subs = json::array();
  for (const SubGoal& s : sub_goals_) {
    subs.push_back({{"id", s.id}, {"goal", miot::to_string(s.goal)}, {"title", s.title}});
  }
  json exps = json::array();
  for (const Expectation& e : expectations_) {
    exps.push_back({
        {"id", e.id},
        {"text", e.text},
        {"goal", miot::to_string(e.goal)},
        {"sub_goal", e.sub_goal},
        {"csf_refs", e.csf_refs},
        {"control_refs", e.control_refs},
        {"source", miot::to_string(e.source)},
        {"implications", e.implications ? json(*e.implications) : json(nullptr)},
    });
  }
  return {{"version", version_}, {"sub_goals", subs}, {"expectations", exps}};
}

ExpectationCatalog load_catalog(std::string_view document) {
  const json doc = parse_document(document);
  if (!doc.is_object()) throw ParseError("catalog: top level must be an object");

  ExpectationCatalog cat;
  cat.version_ = string_field(doc, "version", "catalog");
  if (cat.version_.empty()) throw IntegrityError("catalog: empty version");

  const json& subs = field(doc, "sub_goals", "catalog");
  if (!subs.is_array()) throw ParseError("catalog: 'sub_goals' must be an array");
  for (const json& s : subs) {
    if (!s.is_object()) throw ParseError("catalog: sub_goal entries must be objects");
    SubGoal sg;
    sg.id = string_field(s, "id", "sub_goal");
    const std::string where = "sub_goal '" + sg.id + "'";
    sg.goal = goal_from_string(string_field(s, "goal", where));
    sg.title = string_field(s, "title", where);
    if (sg.id.empty()) throw IntegrityError("sub_goal with empty id");
    cat.sub_goals_.push_back(std::move(sg));
  }
  std::sort(cat.sub_goals_.begin(), cat.sub_goals_.end(),
            [](const SubGoal& a, const SubGoal& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < cat.sub_goals_.size(); ++i) {
    if (cat.sub_goals_[i].id == cat.sub_goals_[i - 1].id) {
      throw IntegrityError("duplicate sub_goal id '" + cat.sub_goals_[i].id + "'");
    }
  }

  const json& exps = field(doc, "expectations", "catalog");
  if (!exps.is_array()) throw ParseError("catalog: 'expectations' must be an array");
  for (const json& x : exps) {
    if (!x.is_object()) throw ParseError("catalog: expectation entries must be objects");
    const json& idv = field(x, "id", "expectation");
    if (!idv.is_number_integer()) throw ParseError("expectation: 'id' must be an integer");
    Expectation e;
    e.id = idv.get<int>();
    const std::string where = "expectation " + std::to_string(e.id);
    if (e.id <= 0) throw IntegrityError(where + ": id must be positive");
    e.text = string_field(x, "text", where);
    e.goal = goal_from_string(string_field(x, "goal", where));
    e.sub_goal = string_field(x, "sub_goal", where);
    e.csf_refs = token_list(x, "csf_refs", where);
    e.control_refs = token_list(x, "control_refs", where);
    e.source = source_from_string(string_field(x, "source", where));
    if (auto it = x.find("implications"); it != x.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(where + ": 'implications' must be a string or null");
      e.implications = it->get<std::string>();
    }
    cat.expectations_.push_back(std::move(e));
  }
  std::sort(cat.expectations_.begin(), cat.expectations_.end(),
            [](const Expectation& a, const Expectation& b) { return a.id < b.id; });

  std::map<ExpectationSource, std::vector<int>> by_source;
  for (std::size_t i = 0; i < cat.expectations_.size(); ++i) {
    const Expectation& e = cat.expectations_[i];
    const std::string where = "expectation " + std::to_string(e.id);
    if (i > 0 && cat.expectations_[i - 1].id == e.id) {
      throw IntegrityError("duplicate expectation id " + std::to_string(e.id));
    }
    if (e.text.empty()) throw IntegrityError(where + ": empty text");
    if (e.source == ExpectationSource::IR8228 && e.csf_refs.empty()) {
      throw IntegrityError(where + ": IR8228 expectation needs at least one csf_ref");
    }
    auto sg = std::lower_bound(cat.sub_goals_.begin(), cat.sub_goals_.end(), e.sub_goal,
                               [](const SubGoal& s, const std::string& v) { return s.id < v; });
    if (sg == cat.sub_goals_.end() || sg->id != e.sub_goal) {
      throw IntegrityError(where + ": dangling sub_goal '" + e.sub_goal + "'");
    }
    if (sg->goal != e.goal) {
      throw IntegrityError(where + ": goal " + std::string(to_string(e.goal)) +
                           " differs from sub_goal '" + e.sub_goal + "' goal " +
                           std::string(to_string(sg->goal)));
    }
    by_source[e.source].push_back(e.id);
  }

  const auto check_group = [&](ExpectationSource source, std::size_t expected) {
    const std::vector<int>& ids = by_source[source];
    if (ids.size() != expected) {
      throw IntegrityError("catalog has " + std::to_string(ids.size()) + " " +
                           std::string(to_string(source)) + " expectations, expected " +
                           std::to_string(expected));
    }
    for (std::size_t i = 1; i < ids.size(); ++i) {
      if (ids[i] != ids[i - 1] + 1) {
        throw IntegrityError(std::string(to_string(source)) +
                             " ids are not contiguous: gap before expectation " +
                             std::to_string(ids[i]));
      }
    }
  };
  check_group(ExpectationSource::IR8228, kCoreExpectationCount);
  check_group(ExpectationSource::IR8259Optional, kOptionalExpectationCount);
  if (by_source[ExpectationSource::IR8228].front() != 1) {
    throw IntegrityError("IR8228 expectation ids must start at 1");
  }

  cat.checksum_ = sha256_hex(cat.canonical());
  if (auto it = doc.find("checksum"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != cat.checksum_) {
      throw IntegrityError("checksum mismatch: document declares " + it->dump() +
                           ", canonical content hashes to " + cat.checksum_);
    }
  }
  return cat;
}

ExpectationCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read catalog '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_catalog(buf.str());
}

const ExpectationCatalog& default_catalog() {
  static const ExpectationCatalog catalog = load_catalog(default_catalog_document());
  return catalog;
}

}  // namespace miot
