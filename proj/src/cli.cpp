#include "miot/cli.h"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "miot/assessment.h"
#include "miot/catalog.h"
#include "miot/planner.h"
#include "miot/report.h"
#include "miot/scoring.h"
#include "miot/server.h"
#include "miot/store.h"

namespace miot::cli {
namespace {

namespace fs = std::filesystem;

/// Unwinds a command with a specific exit status; the message goes to stderr.
struct Exit {
  int code;
  std::string message;
};

[[noreturn]] void usage(const std::string& message) { throw Exit{kUsage, message}; }

std::string env_name(const std::string& flag) {
  std::string out = "MIOT_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Registers --name with a MIOT_NAME environment fallback.
template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name));
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& target, const std::string& help) {
  return app->add_flag("--" + name, target, help)->envname(env_name(name));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp-" + new_uuid();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + path);
    out << bytes;
    out.flush();
    if (!out) throw StorageError("cannot write " + path);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError("cannot write " + path);
  }
}

struct SourceFlags {
  std::string assessment;
  std::string store_dir;
  std::string id;
  int revision = 0;
  std::string catalog;
};

void add_source(CLI::App* app, SourceFlags& f) {
  opt(app, "assessment", f.assessment, "Assessment document path");
  opt(app, "store-dir", f.store_dir, "Store directory (use with --id)");
  opt(app, "id", f.id, "Assessment id in the store");
  opt(app, "revision", f.revision, "Store revision (default latest)");
  opt(app, "catalog", f.catalog, "Catalog document (default: bundled catalog)");
}

struct Loaded {
  Assessment assessment;
  ExpectationCatalog catalog;
  std::optional<int> revision;
};

ExpectationCatalog load_catalog_flag(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const StorageError& e) {
    throw Exit{kStorage, e.what()};
  }
  try {
    return load_catalog(text);
  } catch (const Error& e) {
    throw Exit{kIntegrity, std::string("catalog: ") + e.what()};
  }
}

ExpectationCatalog resolve_catalog(const SourceFlags& f, const Assessment& a) {
  if (!f.catalog.empty()) return load_catalog_flag(f.catalog);
  if (a.catalog_checksum != default_catalog().checksum() && !f.store_dir.empty()) {
    try {
      return AssessmentStore(f.store_dir).load_catalog(a.catalog_checksum);
    } catch (const NotFound&) {
    }
  }
  return default_catalog();
}

Loaded load_source(const SourceFlags& f) {
  Loaded out{Assessment{}, default_catalog(), std::nullopt};
  if (!f.assessment.empty()) {
    out.assessment = assessment_from_json(parse_document(read_file(f.assessment)));
  } else if (!f.store_dir.empty() && !f.id.empty()) {
    AssessmentStore store(f.store_dir);
    const int rev = f.revision > 0 ? f.revision : store.latest_revision(f.id);
    out.assessment = store.load_assessment(f.id, rev);
    out.revision = rev;
  } else {
    usage("give --assessment, or --store-dir with --id");
  }
  out.catalog = resolve_catalog(f, out.assessment);
  return out;
}

void persist(const SourceFlags& f, const Assessment& a, std::optional<int> base) {
  if (!f.assessment.empty()) {
    write_file(f.assessment, canonical_dump(to_json(a)));
  } else {
    AssessmentStore(f.store_dir).save_assessment(a, base);
  }
}

struct ConfigFlags {
  std::string na_mode = "strict";
  std::string threshold = "0.80";
  std::string correctable_floor = "0.50";
  bool include_optional_in_aggregate = false;
};

void add_config(CLI::App* app, ConfigFlags& f) {
  opt(app, "na-mode", f.na_mode, "DoesNotApply handling: strict|exclude")->capture_default_str();
  opt(app, "threshold", f.threshold, "Acceptable threshold fraction")->capture_default_str();
  opt(app, "correctable-floor", f.correctable_floor, "Correctable floor fraction")
      ->capture_default_str();
  flag(app, "include-optional-in-aggregate", f.include_optional_in_aggregate,
       "Count optional IR 8259 items in the overall score");
}

Fraction parse_fraction_flag(const std::string& name, const std::string& value) {
  try {
    return Fraction::parse(value);
  } catch (const Error& e) {
    usage("--" + name + ": " + e.what());
  }
}

ScoringConfig make_config(const ConfigFlags& f) {
  ScoringConfig c;
  try {
    c.na_mode = na_mode_from_string(f.na_mode);
  } catch (const Error& e) {
    usage(std::string("--na-mode: ") + e.what());
  }
  c.acceptable_threshold = parse_fraction_flag("threshold", f.threshold);
  c.correctable_floor = parse_fraction_flag("correctable-floor", f.correctable_floor);
  c.include_optional_in_aggregate = f.include_optional_in_aggregate;
  try {
    c.check();
  } catch (const DomainError& e) {
    usage(e.what());
  }
  return c;
}

Timestamp command_time(bool no_timestamp) { return no_timestamp ? Timestamp{} : utc_now(); }

int print_incomplete(const IncompleteAssessment& e, std::ostream& err) {
  err << e.what() << "\n" << report::render_findings(e.findings());
  return kFindings;
}

// --- commands ---------------------------------------------------------------

struct NewFlags {
  std::string org, device, manufacturer, model, firmware, sbom, notes, out, store_dir, id, catalog;
  bool include_optional = false;
  bool no_timestamp = false;
};

int cmd_new(const NewFlags& f, std::ostream& out) {
  if (f.out.empty() && f.store_dir.empty()) usage("give --out or --store-dir");
  const ExpectationCatalog catalog = f.catalog.empty() ? default_catalog() : load_catalog_flag(f.catalog);
  DeviceMeta d;
  d.organization = f.org;
  d.device_name = f.device;
  d.manufacturer = f.manufacturer;
  d.model = f.model;
  if (!f.firmware.empty()) d.firmware_version = f.firmware;
  if (!f.sbom.empty()) d.sbom_ref = f.sbom;
  if (!f.notes.empty()) d.notes = f.notes;
  Assessment a;
  try {
    a = new_assessment(d, catalog, f.include_optional, command_time(f.no_timestamp),
                       f.id.empty() ? std::nullopt : std::optional<std::string>(f.id));
  } catch (const InvalidDevice& e) {
    usage(e.what());
  }
  if (!f.out.empty()) write_file(f.out, canonical_dump(to_json(a)));
  if (!f.store_dir.empty()) {
    AssessmentStore store(f.store_dir);
    store.save_catalog(catalog);
    store.save_assessment(a, 0);
  }
  out << a.id << "\n";
  return kSuccess;
}

struct SetFlags {
  SourceFlags source;
  int expectation = 0;
  std::string level, validation_point, validation_tool, control_types, comment;
  bool no_timestamp = false;
};

int cmd_set(const SetFlags& f, std::ostream& out, std::ostream& err) {
  Loaded l = load_source(f.source);
  Response r;
  r.expectation_id = f.expectation;
  try {
    r.level = level_from_string(f.level);
    std::stringstream types(f.control_types);
    for (std::string t; std::getline(types, t, ',');) {
      if (!t.empty()) r.control_types.insert(control_type_from_string(t));
    }
  } catch (const ParseError& e) {
    usage(e.what());
  }
  r.validation_point = f.validation_point;
  if (!f.validation_tool.empty()) r.validation_tool = f.validation_tool;
  if (!f.comment.empty()) r.comments = f.comment;
  try {
    const Assessment next = set_response(l.assessment, l.catalog, r, command_time(f.no_timestamp));
    persist(f.source, next, l.revision);
    out << "expectation " << r.expectation_id << " = " << to_string(r.level) << "; status "
        << to_string(next.status) << "\n";
  } catch (const ValidationError& e) {
    err << report::render_findings(e.findings());
    return kFindings;
  }
  return kSuccess;
}

struct ValidateFlags {
  SourceFlags source;
  std::string format = "table";
};

int cmd_validate(const ValidateFlags& f, std::ostream& out) {
  const Loaded l = load_source(f.source);
  const auto findings = validate(l.assessment, l.catalog);
  if (f.format == "json") {
    out << canonical_dump(to_json(findings));
  } else {
    out << report::render_findings(findings);
  }
  return has_errors(findings) ? kFindings : kSuccess;
}

struct ScoreFlags {
  SourceFlags source;
  ConfigFlags config;
  std::string format = "table";
  bool record = false;
};

int cmd_score(const ScoreFlags& f, std::ostream& out, std::ostream& err) {
  const ScoringConfig config = make_config(f.config);
  const Loaded l = load_source(f.source);
  ScoreReport r;
  try {
    r = score_assessment(l.assessment, l.catalog, config);
  } catch (const IncompleteAssessment& e) {
    return print_incomplete(e, err);
  }
  if (f.format == "json") {
    out << canonical_dump(to_json(r));
  } else if (f.format == "csv") {
    out << report::render_csv(r, l.catalog);
  } else {
    out << report::render_table(r, l.catalog);
  }
  if (f.record) {
    if (f.source.store_dir.empty()) usage("--record needs --store-dir and --id");
    AssessmentStore(f.source.store_dir).record_score(l.assessment.id, r);
  }
  return r.risk_tier == RiskTier::Acceptable ? kSuccess : kFindings;
}

struct RadarFlags {
  SourceFlags source;
  ConfigFlags config;
  std::string mode = "per-subgoal";
  std::string threshold_ring;
  std::string out;
  int size = 640;
  bool no_timestamp = false;
};

int cmd_radar(const RadarFlags& f, std::ostream& out, std::ostream& err) {
  const ScoringConfig config = make_config(f.config);
  report::RadarMode mode{};
  try {
    mode = report::radar_mode_from_string(f.mode);
  } catch (const ParseError& e) {
    usage(e.what());
  }
  std::optional<Fraction> ring;
  if (!f.threshold_ring.empty()) ring = parse_fraction_flag("threshold-ring", f.threshold_ring);
  const Loaded l = load_source(f.source);
  ScoreReport r;
  try {
    r = score_assessment(l.assessment, l.catalog, config);
  } catch (const IncompleteAssessment& e) {
    return print_incomplete(e, err);
  }
  report::RadarSpec spec = report::radar_spec(r, l.catalog, mode, ring);
  spec.size = f.size;
  if (!f.no_timestamp) spec.generated_at = utc_now();
  const std::string svg = report::render_radar(spec);
  if (f.out.empty()) {
    out << svg;
  } else {
    write_file(f.out, svg);
  }
  return kSuccess;
}

struct PlanFlags {
  SourceFlags source;
  ConfigFlags config;
  std::string target;
  std::string format = "table";
};

int cmd_plan(const PlanFlags& f, std::ostream& out, std::ostream& err) {
  const ScoringConfig config = make_config(f.config);
  const Fraction target = parse_fraction_flag("target", f.target);
  if (target < Fraction(0) || target > Fraction(1)) usage("--target must lie in [0,1]");
  const Loaded l = load_source(f.source);
  RemediationPlan plan;
  try {
    plan = plan_remediation(l.assessment, l.catalog, config, target);
  } catch (const IncompleteAssessment& e) {
    return print_incomplete(e, err);
  }
  if (f.format == "json") {
    out << canonical_dump(to_json(plan));
  } else {
    out << report::render_plan(plan, l.catalog);
  }
  return plan.feasible ? kSuccess : kFindings;
}

struct DiffFlags {
  std::string old_path, new_path, catalog;
  ConfigFlags config;
};

int cmd_diff(const DiffFlags& f, std::ostream& out, std::ostream& err) {
  const ScoringConfig config = make_config(f.config);
  const ExpectationCatalog catalog = f.catalog.empty() ? default_catalog() : load_catalog_flag(f.catalog);
  auto load = [&](const std::string& path) -> ScoreReport {
    const json doc = parse_document(read_file(path));
    if (doc.is_object() && doc.contains("per_expectation")) return score_report_from_json(doc);
    return score_assessment(assessment_from_json(doc), catalog, config);
  };
  try {
    out << report::render_diff(load(f.old_path), load(f.new_path), catalog);
  } catch (const IncompleteAssessment& e) {
    return print_incomplete(e, err);
  }
  return kSuccess;
}

struct HistoryFlags {
  std::string store_dir, id;
  std::string format = "table";
};

int cmd_history(const HistoryFlags& f, std::ostream& out) {
  const auto events = AssessmentStore(f.store_dir).list_history(f.id);
  if (f.format == "json") {
    json arr = json::array();
    for (const HistoryEvent& e : events) arr.push_back(to_json(e));
    out << canonical_dump(arr);
    return kSuccess;
  }
  for (const HistoryEvent& e : events) {
    out << e.sequence << "\t" << to_rfc3339(e.timestamp) << "\t" << to_string(e.kind) << "\trev "
        << e.payload.value("revision", 0);
    if (e.kind == HistoryKind::ResponseSet) {
      const json& r = e.payload.at("response");
      out << "\texpectation " << r.at("expectation_id").get<int>() << " = "
          << r.at("level").get<std::string>();
    } else if (e.kind == HistoryKind::StatusChanged) {
      out << "\t" << e.payload.at("from").get<std::string>() << " -> "
          << e.payload.at("to").get<std::string>();
    } else if (e.kind == HistoryKind::Scored) {
      const json& r = e.payload.at("report");
      out << "\t" << r.at("overall").at("fraction").at("decimal").get<std::string>() << " "
          << r.at("risk_tier").get<std::string>();
    }
    out << "\n";
  }
  return kSuccess;
}

struct ServeFlags {
  std::string addr = "127.0.0.1:8080";
  std::string store_dir, catalog, ui_dir;
  bool allow_remote = false;
};

int cmd_serve(const ServeFlags& f, std::ostream& out) {
  ServerOptions options;
  const auto colon = f.addr.rfind(':');
  if (colon == std::string::npos) usage("--addr must be host:port");
  options.host = f.addr.substr(0, colon);
  try {
    options.port = std::stoi(f.addr.substr(colon + 1));
  } catch (const std::exception&) {
    usage("--addr must be host:port");
  }
  if (options.host.size() > 2 && options.host.front() == '[' && options.host.back() == ']') {
    options.host = options.host.substr(1, options.host.size() - 2);
  }
  options.allow_remote = f.allow_remote;
  if (!f.ui_dir.empty()) options.ui_dir = f.ui_dir;
  if (!is_loopback_host(options.host) && !options.allow_remote) {
    usage("refusing non-loopback --addr without --allow-remote");
  }

  const ExpectationCatalog catalog = f.catalog.empty() ? default_catalog() : load_catalog_flag(f.catalog);
  AssessmentStore store(f.store_dir);
  ApiServer server(store, catalog, options);
  const auto port = server.bind();
  if (!port) throw Exit{kStorage, "cannot bind " + f.addr};

  // Block termination signals here and in the server thread; this thread
  // waits for one and then stops the server.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread worker([&] { server.run(); });
  out << "listening on " << options.host << ":" << *port << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  worker.join();
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Medical IoT device security assessment against the NISTIR 8228 Expectations",
               "miot-gauge"};
  app.require_subcommand(1);
  app.fallthrough(false);

  NewFlags nf;
  auto* new_cmd = app.add_subcommand("new", "Create a Draft assessment");
  opt(new_cmd, "org", nf.org, "Organization name")->required();
  opt(new_cmd, "device", nf.device, "Device name")->required();
  opt(new_cmd, "manufacturer", nf.manufacturer, "Manufacturer");
  opt(new_cmd, "model", nf.model, "Model");
  opt(new_cmd, "firmware", nf.firmware, "Firmware version");
  opt(new_cmd, "sbom", nf.sbom, "Locator of the device SBOM");
  opt(new_cmd, "notes", nf.notes, "Free-text notes");
  flag(new_cmd, "include-optional", nf.include_optional, "Include the 3 optional IR 8259 items");
  opt(new_cmd, "out", nf.out, "Write the assessment document here");
  opt(new_cmd, "store-dir", nf.store_dir, "Also save into this store");
  opt(new_cmd, "id", nf.id, "Use this UUID instead of a random one");
  opt(new_cmd, "catalog", nf.catalog, "Catalog document (default: bundled catalog)");
  flag(new_cmd, "no-timestamp", nf.no_timestamp, "Pin timestamps to the epoch");

  SetFlags sf;
  auto* set_cmd = app.add_subcommand("set", "Record one response");
  add_source(set_cmd, sf.source);
  opt(set_cmd, "expectation", sf.expectation, "Expectation id")->required();
  opt(set_cmd, "level", sf.level,
      "Yes|No|PartialLow|PartialModerate|PartialHigh|DoesNotApply|AlternateApproach|Unknown")
      ->required();
  opt(set_cmd, "validation-point", sf.validation_point, "Auditable proof of compliance");
  opt(set_cmd, "validation-tool", sf.validation_tool, "Tool or application used as proof");
  opt(set_cmd, "control-types", sf.control_types,
      "Comma list of Administrative,Technical,Physical");
  opt(set_cmd, "comment", sf.comment, "Comments (required for DoesNotApply)");
  flag(set_cmd, "no-timestamp", sf.no_timestamp, "Pin updated_at to the epoch");

  ValidateFlags vf;
  auto* validate_cmd = app.add_subcommand("validate", "List validation findings");
  add_source(validate_cmd, vf.source);
  opt(validate_cmd, "format", vf.format, "table|json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  ScoreFlags scf;
  auto* score_cmd = app.add_subcommand("score", "Score a complete assessment (exit 0 iff Acceptable)");
  add_source(score_cmd, scf.source);
  add_config(score_cmd, scf.config);
  opt(score_cmd, "format", scf.format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  flag(score_cmd, "record", scf.record, "Append a Scored event to the store history");

  RadarFlags rf;
  auto* radar_cmd = app.add_subcommand("radar", "Render the radar chart as SVG");
  add_source(radar_cmd, rf.source);
  add_config(radar_cmd, rf.config);
  opt(radar_cmd, "mode", rf.mode, "per-subgoal|per-goal|per-expectation")->capture_default_str();
  opt(radar_cmd, "threshold-ring", rf.threshold_ring, "Draw a reference ring at this fraction");
  opt(radar_cmd, "out", rf.out, "Output path (default stdout)");
  opt(radar_cmd, "size", rf.size, "Edge length in pixels")->capture_default_str();
  flag(radar_cmd, "no-timestamp", rf.no_timestamp, "Omit the generation timestamp");

  PlanFlags pf;
  auto* plan_cmd = app.add_subcommand("plan", "Smallest set of upgrades reaching a target (exit 0 iff feasible)");
  add_source(plan_cmd, pf.source);
  add_config(plan_cmd, pf.config);
  opt(plan_cmd, "target", pf.target, "Target overall fraction, e.g. 0.80")->required();
  opt(plan_cmd, "format", pf.format, "table|json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  DiffFlags df;
  auto* diff_cmd = app.add_subcommand("diff", "Compare two assessments or score reports");
  opt(diff_cmd, "old", df.old_path, "Older assessment or score report")->required();
  opt(diff_cmd, "new", df.new_path, "Newer assessment or score report")->required();
  opt(diff_cmd, "catalog", df.catalog, "Catalog document (default: bundled catalog)");
  add_config(diff_cmd, df.config);

  HistoryFlags hf;
  auto* history_cmd = app.add_subcommand("history", "Show the stored history of an assessment");
  opt(history_cmd, "store-dir", hf.store_dir, "Store directory")->required();
  opt(history_cmd, "id", hf.id, "Assessment id")->required();
  opt(history_cmd, "format", hf.format, "table|json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  ServeFlags svf;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  opt(serve_cmd, "addr", svf.addr, "host:port to listen on")->capture_default_str();
  opt(serve_cmd, "store-dir", svf.store_dir, "Store directory")->required();
  opt(serve_cmd, "catalog", svf.catalog, "Catalog document (default: bundled catalog)");
  opt(serve_cmd, "ui-dir", svf.ui_dir, "Serve static UI assets from this directory at /");
  flag(serve_cmd, "allow-remote", svf.allow_remote, "Permit binding a non-loopback address");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*new_cmd) return cmd_new(nf, out);
    if (*set_cmd) return cmd_set(sf, out, err);
    if (*validate_cmd) return cmd_validate(vf, out);
    if (*score_cmd) return cmd_score(scf, out, err);
    if (*radar_cmd) return cmd_radar(rf, out, err);
    if (*plan_cmd) return cmd_plan(pf, out, err);
    if (*diff_cmd) return cmd_diff(df, out, err);
    if (*history_cmd) return cmd_history(hf, out);
    if (*serve_cmd) return cmd_serve(svf, out);
  } catch (const Exit& e) {
    if (!e.message.empty()) err << "error: " << e.message << "\n";
    return e.code;
  } catch (const IncompleteAssessment& e) {
    return print_incomplete(e, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n" << report::render_findings(e.findings());
    return kFindings;
  } catch (const OutOfScope& e) {
    err << "error: " << e.what() << "\n";
    return kFindings;
  } catch (const DowngradeRejected& e) {
    err << "error: " << e.what() << "\n";
    return kFindings;
  } catch (const CatalogMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kIntegrity;
  } catch (const IntegrityError& e) {
    err << "error: " << e.what() << "\n";
    return kIntegrity;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    // StorageError, NotFound, ConflictError and malformed input documents.
    err << "error: " << e.what() << "\n";
    return kStorage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kStorage;
  }
  return kUsage;
}

}  // namespace miot::cli
