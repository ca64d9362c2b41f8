#include <gtest/gtest.h>

#include "fixtures.h"
#include "miot/store.h"
#include "server_harness.h"

using namespace miot;
namespace t = miot::testing;
using miot::testing::RunningServer;
using miot::testing::TempDir;

namespace {

const ExpectationCatalog& catalog() { return default_catalog(); }

class Api : public ::testing::Test {
 protected:
  TempDir dir;
  AssessmentStore store{dir.path()};
  RunningServer server{store, catalog()};
  httplib::Client& http = server.client();

  std::string create(bool include_optional = false) {
    const json body = {{"device", {{"organization", "Clinic"}, {"device_name", "Pump"},
                                   {"manufacturer", "Acme"}, {"model", "P1"}}},
                       {"include_optional", include_optional}};
    auto res = http.Post("/api/v1/assessments", body.dump(), "application/json");
    EXPECT_EQ(res->status, 201);
    EXPECT_EQ(res->get_header_value("ETag"), "\"1\"");
    return json::parse(res->body).at("id").get<std::string>();
  }

  httplib::Result put(const std::string& id, int eid, const json& body, const std::string& etag) {
    httplib::Headers headers;
    if (!etag.empty()) headers.emplace("If-Match", etag);
    return http.Put("/api/v1/assessments/" + id + "/responses/" + std::to_string(eid), headers,
                    body.dump(), "application/json");
  }

  /// Answers every core item per the given levels, following ETags.
  void answer_all(const std::string& id, const t::Levels& levels) {
    std::string etag = "\"1\"";
    for (const auto& [eid, level] : levels) {
      json body = {{"level", to_string(level)}, {"validation_point", "bench test"},
                   {"control_types", {"Technical"}}};
      if (level == ComplianceLevel::DoesNotApply) body["comments"] = "not applicable";
      auto res = put(id, eid, body, etag);
      ASSERT_EQ(res->status, 200) << res->body;
      etag = res->get_header_value("ETag");
    }
  }
};

}  // namespace

TEST_F(Api, CatalogCarriesChecksum) {
  auto res = http.Get("/api/v1/catalog");
  ASSERT_EQ(res->status, 200);
  const json doc = json::parse(res->body);
  EXPECT_EQ(doc.at("checksum"), catalog().checksum());
  EXPECT_EQ(doc.at("expectations").size(), 28u);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
}

TEST_F(Api, CreateAndFetch) {
  const std::string id = create();
  auto res = http.Get("/api/v1/assessments/" + id);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("ETag"), "\"1\"");
  EXPECT_EQ(json::parse(res->body).at("status"), "Draft");
  auto cached = http.Get("/api/v1/assessments/" + id, {{"If-None-Match", "\"1\""}});
  EXPECT_EQ(cached->status, 304);
  auto list = http.Get("/api/v1/assessments");
  EXPECT_EQ(json::parse(list->body).size(), 1u);
}

TEST_F(Api, CreateRejectsBlankDevice) {
  auto res = http.Post("/api/v1/assessments", R"({"organization":"","device_name":"x"})",
                       "application/json");
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(json::parse(res->body).at("code"), "invalid_device");
}

TEST_F(Api, PutNeedsCurrentEtag) {
  const std::string id = create();
  const json body = {{"level", "Yes"}, {"validation_point", "doc"}};
  EXPECT_EQ(put(id, 1, body, "")->status, 409);
  auto ok = put(id, 1, body, "\"1\"");
  ASSERT_EQ(ok->status, 200);
  EXPECT_EQ(ok->get_header_value("ETag"), "\"2\"");
  auto stale = put(id, 2, body, "\"1\"");
  EXPECT_EQ(stale->status, 409);
  const json err = json::parse(stale->body);
  EXPECT_EQ(err.at("code"), "conflict");
  EXPECT_TRUE(err.contains("message"));
  EXPECT_EQ(stale->get_header_value("Content-Type"), "application/problem+json");
}

TEST_F(Api, PutValidationFailures) {
  const std::string id = create();
  auto res = put(id, 24, {{"level", "DoesNotApply"}}, "\"1\"");
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(json::parse(res->body).at("findings").size(), 1u);
  EXPECT_EQ(put(id, 27, {{"level", "Yes"}}, "\"1\"")->status, 422);
  EXPECT_EQ(put(id, 1, {{"level", "Often"}}, "\"1\"")->status, 400);
  EXPECT_EQ(http.Put("/api/v1/assessments/" + id + "/responses/1", {{"If-Match", "\"1\""}}, "{",
                     "application/json")->status,
            400);
}

TEST_F(Api, UnknownIdIs404) {
  auto res = http.Get("/api/v1/assessments/00000000-0000-4000-8000-000000000000/score");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body).at("code"), "not_found");
}

TEST_F(Api, ScoreIncompleteIs422WithFindings) {
  const std::string id = create();
  auto res = http.Get("/api/v1/assessments/" + id + "/score");
  ASSERT_EQ(res->status, 422);
  const json err = json::parse(res->body);
  EXPECT_EQ(err.at("code"), "incomplete_assessment");
  EXPECT_EQ(err.at("findings").size(), 25u);
}

TEST_F(Api, ScoreWhatIfPlanRadarHistory) {
  const std::string id = create();
  answer_all(id, t::scoring_example());
  auto score = http.Get("/api/v1/assessments/" + id + "/score");
  ASSERT_EQ(score->status, 200);
  const json report = json::parse(score->body);
  EXPECT_EQ(report.at("overall").at("fraction").at("decimal"), "0.7900");
  EXPECT_EQ(report.at("risk_tier"), "Correctable");

  auto exclude = http.Get("/api/v1/assessments/" + id + "/score?na_mode=exclude");
  EXPECT_EQ(json::parse(exclude->body).at("risk_tier"), "Acceptable");
  EXPECT_EQ(http.Get("/api/v1/assessments/" + id + "/score?threshold=2")->status, 400);

  auto same = http.Post("/api/v1/assessments/" + id + "/what-if", R"({"deltas":[]})", "application/json");
  ASSERT_EQ(same->status, 200);
  EXPECT_EQ(same->body, score->body);

  auto up = http.Post("/api/v1/assessments/" + id + "/what-if",
                      R"([{"expectation_id":22,"proposed_level":"Yes"},{"expectation_id":23,"proposed_level":"Yes"}])",
                      "application/json");
  EXPECT_EQ(json::parse(up->body).at("overall").at("fraction").at("decimal"), "0.8700");
  auto down = http.Post("/api/v1/assessments/" + id + "/what-if",
                        R"([{"expectation_id":1,"proposed_level":"No"}])", "application/json");
  EXPECT_EQ(down->status, 422);
  EXPECT_EQ(json::parse(down->body).at("code"), "downgrade_rejected");

  auto plan = http.Post("/api/v1/assessments/" + id + "/plan", R"({"target":"0.80"})", "application/json");
  ASSERT_EQ(plan->status, 200) << plan->body;
  const json p = json::parse(plan->body);
  EXPECT_EQ(p.at("deltas").size(), 1u);
  EXPECT_EQ(p.at("feasible"), true);
  EXPECT_EQ(http.Post("/api/v1/assessments/" + id + "/plan", R"({"target":1.5})", "application/json")->status,
            400);

  auto radar = http.Get("/api/v1/assessments/" + id + "/radar?mode=per-expectation&no_timestamp=1");
  ASSERT_EQ(radar->status, 200);
  EXPECT_EQ(radar->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(radar->body.rfind("<?xml", 0), 0u);
  EXPECT_EQ(radar->body, http.Get("/api/v1/assessments/" + id + "/radar?mode=per-expectation&no_timestamp=1")->body);

  auto history = http.Get("/api/v1/assessments/" + id + "/history");
  const json events = json::parse(history->body);
  ASSERT_EQ(events.size(), 27u);  // Created, 25 ResponseSet, StatusChanged
  EXPECT_EQ(events.front().at("kind"), "Created");
  EXPECT_EQ(events.back().at("kind"), "StatusChanged");
}

TEST_F(Api, GetsAreSideEffectFree) {
  const std::string id = create();
  answer_all(id, t::uniform(ComplianceLevel::Yes));
  const auto before = store.list_history(id);
  http.Get("/api/v1/assessments/" + id + "/score");
  http.Get("/api/v1/assessments/" + id + "/radar");
  http.Get("/api/v1/assessments/" + id);
  EXPECT_EQ(store.list_history(id), before);
}

TEST_F(Api, RestartLosesNothing) {
  const std::string id = create();
  answer_all(id, t::workbook_example());
  AssessmentStore reopened(dir.path());
  RunningServer second(reopened, catalog());
  auto a = server.client().Get("/api/v1/assessments/" + id + "/score");
  auto b = second.client().Get("/api/v1/assessments/" + id + "/score");
  EXPECT_EQ(a->body, b->body);
}

TEST(ApiOptions, RefusesRemoteBindWithoutFlag) {
  TempDir dir;
  AssessmentStore store(dir.path());
  ServerOptions o;
  o.host = "0.0.0.0";
  o.port = 0;
  ApiServer server(store, catalog(), o);
  EXPECT_THROW(server.bind(), DomainError);
  EXPECT_TRUE(is_loopback_host("127.0.0.1"));
  EXPECT_TRUE(is_loopback_host("::1"));
  EXPECT_FALSE(is_loopback_host("10.0.0.1"));
}

TEST(ApiOptions, ServesUiDirectory) {
  TempDir dir;
  TempDir ui;
  t::write_text(ui.path() / "index.html", "<html>ok</html>");
  AssessmentStore store(dir.path());
  ServerOptions o;
  o.ui_dir = ui.path();
  RunningServer server(store, catalog(), o);
  auto res = server.client().Get("/index.html");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "<html>ok</html>");
  EXPECT_EQ(server.client().Get("/api/v1/catalog")->status, 200);
}
