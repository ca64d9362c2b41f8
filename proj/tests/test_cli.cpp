#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "fixtures.h"
#include "miot/cli.h"
#include "miot/store.h"

#include <httplib.h>

using namespace miot;
namespace t = miot::testing;
using miot::testing::TempDir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult gauge(std::vector<std::string> args) {
  args.insert(args.begin(), "miot-gauge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_assessment(const TempDir& dir, const std::string& name, const Assessment& a) {
  const auto path = dir.path() / name;
  t::write_text(path, canonical_dump(to_json(a)));
  return path.string();
}

}  // namespace

TEST(Cli, NewWritesDraft) {
  TempDir dir;
  const std::string out = (dir.path() / "a.json").string();
  const CliResult r = gauge({"new", "--org", "Clinic", "--device", "Pump", "--manufacturer", "Acme", "--model",
                     "P1", "--out", out});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const Assessment a = assessment_from_json(parse_document(t::read_text(out)));
  EXPECT_EQ(a.id + "\n", r.out);
  EXPECT_EQ(a.status, AssessmentStatus::Draft);
  EXPECT_FALSE(a.include_optional);
}

TEST(Cli, NewIsDeterministicWithFixedIdAndNoTimestamp) {
  TempDir dir;
  const std::vector<std::string> base = {"new", "--org", "C", "--device", "D", "--include-optional",
                                         "--id", "11111111-1111-4111-8111-111111111111", "--no-timestamp"};
  auto first = base, second = base;
  first.insert(first.end(), {"--out", (dir.path() / "1.json").string()});
  second.insert(second.end(), {"--out", (dir.path() / "2.json").string()});
  ASSERT_EQ(gauge(first).code, 0);
  ASSERT_EQ(gauge(second).code, 0);
  EXPECT_EQ(t::read_text(dir.path() / "1.json"), t::read_text(dir.path() / "2.json"));
}

TEST(Cli, NewUsageErrors) {
  TempDir dir;
  const CliResult missing = gauge({"new", "--device", "Pump", "--out", (dir.path() / "a.json").string()});
  EXPECT_EQ(missing.code, cli::kUsage);
  EXPECT_NE(missing.err.find("--org"), std::string::npos);
  EXPECT_EQ(gauge({"new", "--org", "C", "--device", "D", "--bogus", "--out", "x"}).code, cli::kUsage);
  EXPECT_EQ(gauge({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(gauge({}).code, cli::kUsage);
}

TEST(Cli, NewUnwritableOutput) {
  const CliResult r = gauge({"new", "--org", "C", "--device", "D", "--out", "/nonexistent-dir/sub/a.json"});
  EXPECT_EQ(r.code, cli::kStorage);
}

TEST(Cli, HelpListsEveryFlag) {
  const CliResult r = gauge({"score", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--assessment", "--catalog", "--na-mode", "--threshold", "--format",
                           "--store-dir", "--id", "--record"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, SetUpdatesFileAndValidates) {
  TempDir dir;
  const std::string path = (dir.path() / "a.json").string();
  ASSERT_EQ(gauge({"new", "--org", "C", "--device", "D", "--out", path}).code, 0);
  EXPECT_EQ(gauge({"validate", "--assessment", path}).code, cli::kFindings);
  const CliResult set = gauge({"set", "--assessment", path, "--expectation", "3", "--level", "PM",
                       "--validation-point", "manual", "--control-types", "Technical,Administrative"});
  ASSERT_EQ(set.code, 0) << set.err;
  const Assessment a = assessment_from_json(parse_document(t::read_text(path)));
  EXPECT_EQ(a.responses.at(3).level, ComplianceLevel::PartialModerate);
  EXPECT_EQ(a.responses.at(3).control_types.size(), 2u);

  EXPECT_EQ(gauge({"set", "--assessment", path, "--expectation", "24", "--level", "DoesNotApply"}).code,
            cli::kFindings);
  EXPECT_EQ(gauge({"set", "--assessment", path, "--expectation", "27", "--level", "Yes"}).code,
            cli::kFindings);
  EXPECT_EQ(gauge({"set", "--assessment", path, "--expectation", "2", "--level", "Sometimes"}).code,
            cli::kUsage);
}

TEST(Cli, ValidateCompleteAssessment) {
  TempDir dir;
  const std::string path =
      write_assessment(dir, "a.json", t::make_assessment(t::uniform(ComplianceLevel::Yes)));
  const CliResult r = gauge({"validate", "--assessment", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "no findings\n");
}

TEST(Cli, ScoreGate) {
  TempDir dir;
  const std::string yes =
      write_assessment(dir, "yes.json", t::make_assessment(t::uniform(ComplianceLevel::Yes)));
  const std::string example =
      write_assessment(dir, "ex.json", t::make_assessment(t::scoring_example()));
  EXPECT_EQ(gauge({"score", "--assessment", yes}).code, 0);
  const CliResult r = gauge({"score", "--assessment", example});
  EXPECT_EQ(r.code, cli::kFindings);
  EXPECT_NE(r.out.find("19.75/25 = 79.00%"), std::string::npos);
  EXPECT_NE(r.out.find("Correctable"), std::string::npos);
  EXPECT_EQ(gauge({"score", "--assessment", example, "--na-mode", "exclude"}).code, 0);
  EXPECT_EQ(gauge({"score", "--assessment", example, "--threshold", "0.75"}).code, 0);
  EXPECT_EQ(gauge({"score", "--assessment", example, "--na-mode", "sometimes"}).code, cli::kUsage);
  EXPECT_EQ(gauge({"score", "--assessment", example, "--format", "xml"}).code, cli::kUsage);
}

TEST(Cli, ScoreJsonIsCanonicalReport) {
  TempDir dir;
  const Assessment a = t::make_assessment(t::scoring_example());
  const std::string path = write_assessment(dir, "ex.json", a);
  const CliResult r = gauge({"score", "--assessment", path, "--format", "json"});
  EXPECT_EQ(r.out, canonical_dump(to_json(score_assessment(a, default_catalog()))));
  const CliResult csv = gauge({"score", "--assessment", path, "--format", "csv"});
  EXPECT_EQ(csv.out.rfind("expectation_id,level,value,sub_goal,goal\n", 0), 0u);
}

TEST(Cli, ScoreIncompleteListsFindings) {
  TempDir dir;
  auto levels = t::uniform(ComplianceLevel::Yes);
  levels.erase(9);
  const std::string path = write_assessment(dir, "a.json", t::make_assessment(levels));
  const CliResult r = gauge({"score", "--assessment", path});
  EXPECT_EQ(r.code, cli::kFindings);
  EXPECT_NE(r.err.find("missing response for expectation 9"), std::string::npos);
}

TEST(Cli, CatalogMismatchIsIntegrityFailure) {
  TempDir dir;
  Assessment a = t::make_assessment(t::uniform(ComplianceLevel::Yes));
  a.catalog_checksum = std::string(64, 'b');
  const std::string path = write_assessment(dir, "a.json", a);
  EXPECT_EQ(gauge({"score", "--assessment", path}).code, cli::kIntegrity);
  t::write_text(dir.path() / "bad-catalog.json", "{\"version\":\"x\"}");
  const std::string good = write_assessment(dir, "b.json", t::make_assessment(t::uniform(ComplianceLevel::Yes)));
  EXPECT_EQ(gauge({"score", "--assessment", good, "--catalog", (dir.path() / "bad-catalog.json").string()}).code,
            cli::kIntegrity);
}

TEST(Cli, MissingInputIsStorageFailure) {
  EXPECT_EQ(gauge({"score", "--assessment", "/nonexistent/a.json"}).code, cli::kStorage);
  TempDir dir;
  t::write_text(dir.path() / "junk.json", "{not json");
  EXPECT_EQ(gauge({"score", "--assessment", (dir.path() / "junk.json").string()}).code, cli::kStorage);
}

TEST(Cli, EnvironmentFallbackAndFlagPrecedence) {
  TempDir dir;
  const std::string example =
      write_assessment(dir, "ex.json", t::make_assessment(t::scoring_example()));
  ::setenv("MIOT_NA_MODE", "exclude", 1);
  EXPECT_EQ(gauge({"score", "--assessment", example}).code, 0);
  EXPECT_EQ(gauge({"score", "--assessment", example, "--na-mode", "strict"}).code, cli::kFindings);
  ::unsetenv("MIOT_NA_MODE");
  ::setenv("MIOT_ASSESSMENT", example.c_str(), 1);
  EXPECT_EQ(gauge({"score"}).code, cli::kFindings);
  ::unsetenv("MIOT_ASSESSMENT");
}

TEST(Cli, Radar) {
  TempDir dir;
  const std::string path = write_assessment(dir, "a.json", t::make_assessment(t::scoring_example()));
  const std::string svg = (dir.path() / "r.svg").string();
  ASSERT_EQ(gauge({"radar", "--assessment", path, "--out", svg, "--no-timestamp"}).code, 0);
  const std::string doc = t::read_text(svg);
  EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n') > 0, true);
  EXPECT_NE(doc.find("class=\"data\""), std::string::npos);
  EXPECT_NE(doc.find(">Asset Management ("), std::string::npos);

  const CliResult per = gauge({"radar", "--assessment", path, "--mode", "per-expectation", "--no-timestamp"});
  ASSERT_EQ(per.code, 0);
  std::size_t spokes = 0;
  for (auto pos = per.out.find("class=\"spoke\""); pos != std::string::npos;
       pos = per.out.find("class=\"spoke\"", pos + 1)) {
    ++spokes;
  }
  EXPECT_EQ(spokes, 25u);
  EXPECT_EQ(per.out, gauge({"radar", "--assessment", path, "--mode", "per-expectation", "--no-timestamp"}).out);

  auto levels = t::uniform(ComplianceLevel::Yes);
  levels.erase(1);
  const std::string draft = write_assessment(dir, "d.json", t::make_assessment(levels));
  EXPECT_EQ(gauge({"radar", "--assessment", draft}).code, cli::kFindings);
}

TEST(Cli, Plan) {
  TempDir dir;
  const std::string path = write_assessment(dir, "a.json", t::make_assessment(t::scoring_example()));
  const CliResult one = gauge({"plan", "--assessment", path, "--target", "0.80"});
  EXPECT_EQ(one.code, 0);
  EXPECT_NE(one.out.find("Upgrades     1"), std::string::npos) << one.out;
  const CliResult met = gauge({"plan", "--assessment", path, "--target", "0.5"});
  EXPECT_EQ(met.code, 0);
  EXPECT_NE(met.out.find("Upgrades     0"), std::string::npos) << met.out;
  EXPECT_EQ(gauge({"plan", "--assessment", path, "--target", "1.0"}).code, cli::kFindings);
  EXPECT_EQ(gauge({"plan", "--assessment", path, "--target", "2"}).code, cli::kUsage);
}

TEST(Cli, Diff) {
  TempDir dir;
  const Assessment a = t::make_assessment(t::scoring_example());
  const std::string old_path = write_assessment(dir, "old.json", a);
  const CliResult same = gauge({"diff", "--old", old_path, "--new", old_path});
  EXPECT_EQ(same.code, 0);
  EXPECT_NE(same.out.find("no changes"), std::string::npos);

  auto levels = t::scoring_example();
  levels[22] = ComplianceLevel::Yes;
  const std::string new_path = write_assessment(dir, "new.json", t::make_assessment(levels));
  const CliResult changed = gauge({"diff", "--old", old_path, "--new", new_path});
  EXPECT_NE(changed.out.find("(delta +0.04)"), std::string::npos) << changed.out;
  EXPECT_NE(changed.out.find("Correctable -> Acceptable"), std::string::npos) << changed.out;

  // Score reports are accepted in place of assessments.
  const std::string report = (dir.path() / "old-report.json").string();
  t::write_text(report, gauge({"score", "--assessment", old_path, "--format", "json"}).out);
  EXPECT_EQ(gauge({"diff", "--old", report, "--new", new_path}).out, changed.out);
}

TEST(Cli, StoreWorkflowAndHistory) {
  TempDir dir;
  const std::string store = dir.str();
  const CliResult created = gauge({"new", "--org", "C", "--device", "D", "--store-dir", store});
  ASSERT_EQ(created.code, 0) << created.err;
  const std::string id = created.out.substr(0, created.out.size() - 1);
  for (const auto& [eid, level] : t::scoring_example()) {
    std::vector<std::string> args = {"set", "--store-dir", store, "--id", id, "--expectation",
                                     std::to_string(eid), "--level", std::string(to_string(level)),
                                     "--validation-point", "bench"};
    if (level == ComplianceLevel::DoesNotApply) args.insert(args.end(), {"--comment", "n/a"});
    ASSERT_EQ(gauge(args).code, 0);
  }
  EXPECT_EQ(gauge({"score", "--store-dir", store, "--id", id, "--record"}).code, cli::kFindings);
  const CliResult h = gauge({"history", "--store-dir", store, "--id", id});
  ASSERT_EQ(h.code, 0);
  EXPECT_EQ(std::count(h.out.begin(), h.out.end(), '\n'), 28);  // Created, 25 sets, status, score
  EXPECT_NE(h.out.find("Draft -> Complete"), std::string::npos);
  EXPECT_NE(h.out.find("0.7900 Correctable"), std::string::npos);
  EXPECT_EQ(gauge({"score", "--store-dir", store, "--id", id, "--revision", "3"}).code, cli::kFindings);
  EXPECT_EQ(gauge({"history", "--store-dir", store, "--id", "00000000-0000-4000-8000-000000000000"}).code,
            cli::kStorage);
}

TEST(Cli, ServeOnOccupiedPort) {
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  TempDir dir;
  const CliResult r = gauge({"serve", "--addr", "127.0.0.1:" + std::to_string(port), "--store-dir", dir.str()});
  EXPECT_EQ(r.code, cli::kStorage);
  EXPECT_EQ(gauge({"serve", "--addr", "0.0.0.0:0", "--store-dir", dir.str()}).code, cli::kUsage);
}
