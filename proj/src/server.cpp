#include "miot/server.h"

#include <httplib.h>

#include "miot/planner.h"
#include "miot/report.h"
#include "miot/scoring.h"

namespace miot {
namespace {

struct ApiError {
  int status;
  std::string code;
  std::string message;
  std::vector<Finding> findings;
};

ApiError classify(const std::exception& e) {
  const std::string msg = e.what();
  if (auto* v = dynamic_cast<const IncompleteAssessment*>(&e)) {
    return {422, "incomplete_assessment", msg, v->findings()};
  }
  if (auto* v = dynamic_cast<const ValidationError*>(&e)) {
    return {422, "validation_failed", msg, v->findings()};
  }
  if (dynamic_cast<const NotFound*>(&e)) return {404, "not_found", msg, {}};
  if (dynamic_cast<const CatalogMismatch*>(&e)) return {409, "catalog_mismatch", msg, {}};
  if (dynamic_cast<const ConflictError*>(&e)) return {409, "conflict", msg, {}};
  if (dynamic_cast<const OutOfScope*>(&e)) return {422, "out_of_scope", msg, {}};
  if (dynamic_cast<const DowngradeRejected*>(&e)) return {422, "downgrade_rejected", msg, {}};
  if (dynamic_cast<const InvalidDevice*>(&e)) return {422, "invalid_device", msg, {}};
  if (dynamic_cast<const TooFewAxes*>(&e)) return {422, "too_few_axes", msg, {}};
  if (dynamic_cast<const ParseError*>(&e)) return {400, "bad_request", msg, {}};
  if (dynamic_cast<const DomainError*>(&e)) return {400, "domain_error", msg, {}};
  if (dynamic_cast<const IntegrityError*>(&e)) return {500, "integrity_error", msg, {}};
  if (dynamic_cast<const StorageError*>(&e)) return {500, "storage_error", msg, {}};
  if (dynamic_cast<const json::exception*>(&e)) return {400, "bad_request", msg, {}};
  return {500, "internal", msg, {}};
}

void send_error(httplib::Response& res, const ApiError& err) {
  json body = {{"status", err.status}, {"code", err.code}, {"message", err.message}};
  if (!err.findings.empty()) body["findings"] = to_json(err.findings);
  res.status = err.status;
  res.set_content(canonical_dump(body), "application/problem+json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(canonical_dump(body), "application/json");
}

std::string etag(int revision) { return "\"" + std::to_string(revision) + "\""; }

std::optional<int> parse_etag(std::string value) {
  if (value.rfind("W/", 0) == 0) value.erase(0, 2);
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    value = value.substr(1, value.size() - 2);
  }
  if (value.empty() || value.size() > 9 ||
      !std::all_of(value.begin(), value.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(value);
}

ScoringConfig config_from_query(const httplib::Request& req) {
  ScoringConfig c;
  if (req.has_param("na_mode")) c.na_mode = na_mode_from_string(req.get_param_value("na_mode"));
  if (req.has_param("threshold")) {
    c.acceptable_threshold = Fraction::parse(req.get_param_value("threshold"));
  }
  if (req.has_param("correctable_floor")) {
    c.correctable_floor = Fraction::parse(req.get_param_value("correctable_floor"));
  }
  if (req.has_param("include_optional_in_aggregate")) {
    const std::string v = req.get_param_value("include_optional_in_aggregate");
    c.include_optional_in_aggregate = v == "1" || v == "true";
  }
  c.check();
  return c;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return parse_document(req.body);
}

}  // namespace

bool is_loopback_host(const std::string& host) {
  return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

ApiServer::ApiServer(AssessmentStore& store, const ExpectationCatalog& catalog, ServerOptions options)
    : store_(store), catalog_(catalog), options_(std::move(options)),
      http_(std::make_unique<httplib::Server>()) {
  // httplib's defaults add SO_REUSEPORT, which would let a second server
  // silently share an occupied port.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  store_.save_catalog(catalog_);
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

std::optional<int> ApiServer::bind() {
  if (!is_loopback_host(options_.host) && !options_.allow_remote) {
    throw DomainError("refusing to bind non-loopback address " + options_.host +
                      " without allow_remote");
  }
  if (options_.port == 0) {
    const int port = http_->bind_to_any_port(options_.host);
    if (port <= 0) return std::nullopt;
    return port;
  }
  if (!http_->bind_to_port(options_.host, options_.port)) return std::nullopt;
  return options_.port;
}

void ApiServer::run() { http_->listen_after_bind(); }

void ApiServer::stop() {
  if (http_) http_->stop();
}

void ApiServer::install_routes() {
  using httplib::Request;
  using httplib::Response;
  auto& http = *http_;

  // Wraps a handler so every module error becomes an ApiError body.
  auto guarded = [](auto handler) {
    return [handler](const Request& req, Response& res) {
      try {
        handler(req, res);
      } catch (const std::exception& e) {
        send_error(res, classify(e));
      }
    };
  };

  // The assessment's pinned catalog: the active one, or one kept in the store.
  auto catalog_for = [this](const Assessment& a) -> ExpectationCatalog {
    if (a.catalog_checksum == catalog_.checksum()) return catalog_;
    try {
      return store_.load_catalog(a.catalog_checksum);
    } catch (const NotFound&) {
      throw CatalogMismatch("assessment " + a.id + " is pinned to unknown catalog " +
                            a.catalog_checksum);
    }
  };

  http.Get("/api/v1/catalog", guarded([this](const Request&, Response& res) {
    json doc = catalog_.to_json();
    doc["checksum"] = catalog_.checksum();
    send_json(res, doc);
  }));

  http.Get("/api/v1/assessments", guarded([this](const Request&, Response& res) {
    json out = json::array();
    for (const std::string& id : store_.list_assessments()) {
      const Assessment a = store_.load_assessment(id);
      out.push_back({{"id", id},
                     {"revision", store_.latest_revision(id)},
                     {"organization", a.device.organization},
                     {"device_name", a.device.device_name},
                     {"status", to_string(a.status)},
                     {"updated_at", to_rfc3339(a.updated_at)}});
    }
    send_json(res, out);
  }));

  http.Post("/api/v1/assessments", guarded([this](const Request& req, Response& res) {
    const json body = parse_body(req);
    if (!body.is_object()) throw ParseError("request body must be an object");
    const json& device_doc = body.contains("device") ? body.at("device") : body;
    bool include_optional = false;
    if (auto it = body.find("include_optional"); it != body.end()) {
      if (!it->is_boolean()) throw ParseError("'include_optional' must be a boolean");
      include_optional = it->get<bool>();
    }
    const Assessment a = new_assessment(device_from_json(device_doc), catalog_, include_optional);
    const int rev = store_.save_assessment(a, 0);
    res.set_header("ETag", etag(rev));
    res.set_header("Location", "/api/v1/assessments/" + a.id);
    send_json(res, {{"id", a.id}, {"revision", rev}, {"assessment", to_json(a)}}, 201);
  }));

  http.Get(R"(/api/v1/assessments/([0-9a-f-]+))", guarded([this](const Request& req, Response& res) {
    const std::string id = req.matches[1];
    const int rev = store_.latest_revision(id);
    res.set_header("ETag", etag(rev));
    if (req.has_header("If-None-Match") &&
        parse_etag(req.get_header_value("If-None-Match")) == rev) {
      res.status = 304;
      return;
    }
    send_json(res, to_json(store_.load_assessment(id, rev)));
  }));

  http.Put(R"(/api/v1/assessments/([0-9a-f-]+)/responses/([0-9]+))",
           guarded([this, catalog_for](const Request& req, Response& res) {
             const std::string id = req.matches[1];
             const int expectation_id = std::stoi(req.matches[2]);
             const int latest = store_.latest_revision(id);
             const auto base = req.has_header("If-Match")
                                   ? parse_etag(req.get_header_value("If-Match"))
                                   : std::nullopt;
             if (!base) throw ConflictError("If-Match with the current ETag is required");
             if (*base != latest) {
               throw ConflictError("stale ETag " + etag(*base) + "; current is " + etag(latest));
             }
             json body = parse_body(req);
             if (!body.is_object()) throw ParseError("response body must be an object");
             if (auto it = body.find("expectation_id"); it != body.end() && *it != expectation_id) {
               throw ParseError("body expectation_id disagrees with the path");
             }
             body["expectation_id"] = expectation_id;
             const Assessment current = store_.load_assessment(id, latest);
             const ExpectationCatalog catalog = catalog_for(current);
             const Assessment next = set_response(current, catalog, response_from_json(body));
             const int rev = store_.save_assessment(next, latest);
             res.set_header("ETag", etag(rev));
             send_json(res, to_json(store_.load_assessment(id, rev)));
           }));

  http.Get(R"(/api/v1/assessments/([0-9a-f-]+)/score)",
           guarded([this, catalog_for](const Request& req, Response& res) {
             const Assessment a = store_.load_assessment(req.matches[1]);
             send_json(res, to_json(score_assessment(a, catalog_for(a), config_from_query(req))));
           }));

  http.Post(R"(/api/v1/assessments/([0-9a-f-]+)/what-if)",
            guarded([this, catalog_for](const Request& req, Response& res) {
              const Assessment a = store_.load_assessment(req.matches[1]);
              const json body = parse_body(req);
              const json& list = body.is_array() ? body : body.value("deltas", json::array());
              if (!list.is_array()) throw ParseError("'deltas' must be an array");
              std::vector<WhatIfDelta> deltas;
              for (const json& d : list) deltas.push_back(delta_from_json(d));
              send_json(res, to_json(what_if(a, catalog_for(a), config_from_query(req), deltas)));
            }));

  http.Post(R"(/api/v1/assessments/([0-9a-f-]+)/plan)",
            guarded([this, catalog_for](const Request& req, Response& res) {
              const Assessment a = store_.load_assessment(req.matches[1]);
              const json body = parse_body(req);
              const json* target = body.is_object() && body.contains("target") ? &body.at("target") : nullptr;
              if (!target) throw ParseError("body must carry 'target'");
              const Fraction t = fraction_from_json(*target);
              send_json(res, to_json(plan_remediation(a, catalog_for(a), config_from_query(req), t)));
            }));

  http.Get(R"(/api/v1/assessments/([0-9a-f-]+)/radar)",
           guarded([this, catalog_for](const Request& req, Response& res) {
             const Assessment a = store_.load_assessment(req.matches[1]);
             const ExpectationCatalog catalog = catalog_for(a);
             const ScoreReport report = score_assessment(a, catalog, config_from_query(req));
             const auto mode = req.has_param("mode")
                                   ? report::radar_mode_from_string(req.get_param_value("mode"))
                                   : report::RadarMode::PerSubGoal;
             std::optional<Fraction> ring;
             if (req.has_param("threshold_ring")) {
               ring = Fraction::parse(req.get_param_value("threshold_ring"));
             }
             report::RadarSpec spec = report::radar_spec(report, catalog, mode, ring);
             if (req.get_param_value("no_timestamp") != "1") spec.generated_at = utc_now();
             res.set_content(report::render_radar(spec), "image/svg+xml");
           }));

  http.Get(R"(/api/v1/assessments/([0-9a-f-]+)/history)",
           guarded([this](const Request& req, Response& res) {
             json out = json::array();
             for (const HistoryEvent& e : store_.list_history(req.matches[1])) out.push_back(to_json(e));
             send_json(res, out);
           }));

  if (options_.ui_dir) http.set_mount_point("/", options_.ui_dir->string());
}

}  // namespace miot
