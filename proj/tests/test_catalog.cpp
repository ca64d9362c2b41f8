#include <gtest/gtest.h>

#include <set>

#include "miot/catalog.h"
#include "miot/error.h"

using namespace miot;

namespace {

json bundled() { return parse_document(default_catalog_document()); }

}  // namespace

TEST(Catalog, BundledCardinality) {
  const ExpectationCatalog& c = default_catalog();
  int core = 0, optional = 0;
  for (const Expectation& e : c.expectations()) (e.optional() ? optional : core)++;
  EXPECT_EQ(core, 25);
  EXPECT_EQ(optional, 3);
  EXPECT_EQ(c.in_scope_ids(false).size(), 25u);
  EXPECT_EQ(c.in_scope_ids(true).size(), 28u);
}

TEST(Catalog, WorkbookRowsOneToNine) {
  const ExpectationCatalog& c = default_catalog();
  const std::vector<std::vector<std::string>> csf = {
      {"ID.AM-1"},
      {"ID.AM-1(2)", "PR.DS-3"},
      {"ID.AM-1(2)(4)"},
      {"DE.CM-8", "PR.IP-1", "PR.PT-3"},
      {"PR.IP-1"},
      {"PR.IP-1(3)", "PR.PT-3"},
      {"DE.CM-8"},
      {"PR.AC-1(7)"},
      {"PR.AC-7"},
  };
  for (int id = 1; id <= 9; ++id) {
    EXPECT_EQ(c.expectation_by_id(id).csf_refs, csf[id - 1]) << "expectation " << id;
  }
  EXPECT_EQ(c.expectation_by_id(1).text, "The device has a built-in unique identifier.");
  EXPECT_EQ(c.expectation_by_id(9).text.rfind("The device can conceal password characters", 0), 0u);
  EXPECT_EQ(c.expectation_by_id(1).sub_goal, "asset_management");
  EXPECT_EQ(c.expectation_by_id(5).sub_goal, "vulnerability_management");
  EXPECT_EQ(c.expectation_by_id(8).sub_goal, "access_management");
}

TEST(Catalog, GoalsAndSubGoalsAreConsistent) {
  const ExpectationCatalog& c = default_catalog();
  for (const Expectation& e : c.expectations()) {
    EXPECT_EQ(c.sub_goal(e.sub_goal).goal, e.goal);
    for (const auto& ref : e.csf_refs) EXPECT_TRUE(is_reference_token(ref)) << ref;
  }
  std::set<GoalId> goals;
  for (const SubGoal& s : c.sub_goals()) goals.insert(s.goal);
  EXPECT_EQ(goals.size(), 3u);
  EXPECT_EQ(c.sub_goals_in_catalog_order().front()->id, "asset_management");
}

TEST(Catalog, ControlLookup) {
  const auto hits = default_catalog().expectations_for_control("CM-8");
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits.front()->id, 1);
  EXPECT_TRUE(default_catalog().expectations_for_control("ZZ-99").empty());
}

TEST(Catalog, ChecksumIsStableAndCanonical) {
  const ExpectationCatalog again = load_catalog(default_catalog_document());
  EXPECT_EQ(again.checksum(), default_catalog().checksum());
  EXPECT_EQ(again.checksum(), sha256_hex(again.canonical()));
  EXPECT_EQ(load_catalog(again.canonical()), again);
}

TEST(Catalog, RejectsTamperedChecksum) {
  json doc = bundled();
  doc["checksum"] = std::string(64, '0');
  EXPECT_THROW(load_catalog(doc.dump()), IntegrityError);
  doc["checksum"] = default_catalog().checksum();
  EXPECT_NO_THROW(load_catalog(doc.dump()));
}

TEST(Catalog, RejectsWrongCardinality) {
  json doc = bundled();
  auto& items = doc["expectations"];
  for (auto it = items.begin(); it != items.end(); ++it) {
    if ((*it)["id"] == 25) {
      items.erase(it);
      break;
    }
  }
  try {
    load_catalog(doc.dump());
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 25"), std::string::npos) << e.what();
  }
}

TEST(Catalog, RejectsDuplicateIds) {
  json doc = bundled();
  doc["expectations"][1]["id"] = 1;
  EXPECT_THROW(load_catalog(doc.dump()), IntegrityError);
}

TEST(Catalog, RejectsCoreItemWithoutCsfReference) {
  json doc = bundled();
  doc["expectations"][0]["csf_refs"] = json::array();
  EXPECT_THROW(load_catalog(doc.dump()), IntegrityError);
}

TEST(Catalog, RejectsDanglingSubGoal) {
  json doc = bundled();
  doc["expectations"][0]["sub_goal"] = "no_such_sub_goal";
  EXPECT_THROW(load_catalog(doc.dump()), IntegrityError);
}

TEST(Catalog, RejectsMalformedDocuments) {
  EXPECT_THROW(load_catalog("{"), ParseError);
  EXPECT_THROW(load_catalog("[]"), ParseError);
  json doc = bundled();
  doc["expectations"][0]["id"] = "one";
  EXPECT_THROW(load_catalog(doc.dump()), ParseError);
}

TEST(Catalog, ReferenceTokens) {
  EXPECT_TRUE(is_reference_token("PR.AC-1(7)"));
  EXPECT_TRUE(is_reference_token("SI-12(1)"));
  EXPECT_FALSE(is_reference_token("PR.AC.1"));
  EXPECT_FALSE(is_reference_token("pr.ac-1"));
}
