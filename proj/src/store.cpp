#include "miot/store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace miot {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_all(int fd, std::string_view bytes, const fs::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError("write " + path.string() + ": " + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

fs::path write_temp(const fs::path& dir, const std::string& stem, std::string_view bytes) {
  const fs::path tmp = dir / (stem + ".tmp-" + new_uuid());
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("create " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, bytes, tmp);
    if (::fsync(fd) != 0) throw StorageError("fsync " + tmp.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  return tmp;
}

// Publishes `bytes` at `target` only if nothing is there yet.
bool publish_exclusive(const fs::path& target, std::string_view bytes) {
  const fs::path tmp = write_temp(target.parent_path(), target.filename().string(), bytes);
  const int rc = ::link(tmp.c_str(), target.c_str());
  const int err = errno;
  ::unlink(tmp.c_str());
  if (rc == 0) return true;
  if (err == EEXIST) return false;
  throw StorageError("link " + target.string() + ": " + std::strerror(err));
}

fs::path revision_path(const fs::path& dir, int revision) {
  return dir / ("rev-" + std::to_string(revision) + ".json");
}

json revision_payload(int revision, const json& body) {
  json p = body;
  p["revision"] = revision;
  return p;
}

}  // namespace

std::string_view to_string(HistoryKind kind) {
  switch (kind) {
    case HistoryKind::Created: return "Created";
    case HistoryKind::ResponseSet: return "ResponseSet";
    case HistoryKind::Scored: return "Scored";
    case HistoryKind::StatusChanged: return "StatusChanged";
  }
  return "?";
}

HistoryKind history_kind_from_string(std::string_view text) {
  for (HistoryKind k : {HistoryKind::Created, HistoryKind::ResponseSet, HistoryKind::Scored,
                        HistoryKind::StatusChanged}) {
    if (to_string(k) == text) return k;
  }
  throw ParseError("unknown history event kind '" + std::string(text) + "'");
}

json to_json(const HistoryEvent& e) {
  return {{"sequence", e.sequence},
          {"timestamp", to_rfc3339(e.timestamp)},
          {"kind", to_string(e.kind)},
          {"payload", e.payload}};
}

HistoryEvent history_event_from_json(const json& doc) {
  try {
    HistoryEvent e;
    e.sequence = doc.at("sequence").get<int>();
    e.timestamp = parse_rfc3339(doc.at("timestamp").get<std::string>());
    e.kind = history_kind_from_string(doc.at("kind").get<std::string>());
    e.payload = doc.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed history event: ") + ex.what());
  }
}

AssessmentStore::AssessmentStore(fs::path root, Clock clock)
    : root_(std::move(root)), clock_(std::move(clock)) {
  std::error_code ec;
  fs::create_directories(root_ / "assessments", ec);
  if (!ec) fs::create_directories(root_ / "catalogs", ec);
  if (ec) throw StorageError("cannot create store at " + root_.string() + ": " + ec.message());
}

fs::path AssessmentStore::assessment_dir(const std::string& id) const {
  if (!is_uuid(id)) throw NotFound("no assessment '" + id + "'");
  return root_ / "assessments" / id;
}

std::mutex& AssessmentStore::lock_for(const std::string& id) {
  std::lock_guard guard(locks_guard_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

bool AssessmentStore::contains(const std::string& id) const {
  return is_uuid(id) && fs::exists(revision_path(assessment_dir(id), 1));
}

int AssessmentStore::latest_revision(const std::string& id) const {
  const fs::path dir = assessment_dir(id);
  int latest = 0;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("rev-", 0) != 0 || entry.path().extension() != ".json") continue;
    const std::string digits = name.substr(4, name.size() - 4 - 5);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
    latest = std::max(latest, std::stoi(digits));
  }
  if (latest == 0) throw NotFound("no assessment '" + id + "'");
  return latest;
}

std::vector<std::string> AssessmentStore::list_assessments() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "assessments", ec)) {
    const std::string name = entry.path().filename().string();
    if (is_uuid(name) && fs::exists(revision_path(entry.path(), 1))) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Assessment AssessmentStore::load_assessment(const std::string& id,
                                            std::optional<int> revision) const {
  const int rev = revision ? *revision : latest_revision(id);
  const fs::path path = revision_path(assessment_dir(id), rev);
  if (rev <= 0 || !fs::exists(path)) {
    throw NotFound("assessment " + id + " has no revision " + std::to_string(rev));
  }
  return assessment_from_json(parse_document(read_file(path)));
}

std::vector<HistoryEvent> AssessmentStore::list_history(const std::string& id) const {
  const fs::path dir = assessment_dir(id);
  const fs::path log = dir / "history.log";
  if (!fs::exists(revision_path(dir, 1))) throw NotFound("no assessment '" + id + "'");
  std::vector<HistoryEvent> events;
  if (!fs::exists(log)) return events;
  const std::string text = read_file(log);
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string::npos) break;  // torn trailing write
    events.push_back(history_event_from_json(parse_document(text.substr(start, end - start))));
    start = end + 1;
  }
  return events;
}

Timestamp AssessmentStore::event_time(const std::vector<HistoryEvent>& existing) const {
  Timestamp now = clock_();
  if (!existing.empty()) now = std::max(now, existing.back().timestamp);
  return now;
}

void AssessmentStore::append_history(const std::string& id, const std::vector<HistoryEvent>& events) {
  const fs::path log = assessment_dir(id) / "history.log";
  const int fd = ::open(log.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("open " + log.string() + ": " + std::strerror(errno));
  try {
    // Drop a torn trailing line so the next record starts on a fresh line.
    const off_t size = ::lseek(fd, 0, SEEK_END);
    if (size > 0) {
      std::string text = read_file(log);
      const std::size_t keep = text.back() == '\n' ? text.size() : text.rfind('\n') + 1;
      if (keep != text.size() && ::ftruncate(fd, static_cast<off_t>(keep)) != 0) {
        throw StorageError("truncate " + log.string() + ": " + std::strerror(errno));
      }
      ::lseek(fd, 0, SEEK_END);
    }
    std::string lines;
    for (const HistoryEvent& e : events) lines += compact_dump(to_json(e)) + "\n";
    write_all(fd, lines, log);
    if (::fsync(fd) != 0) throw StorageError("fsync " + log.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

int AssessmentStore::save_assessment(const Assessment& assessment, std::optional<int> base_revision) {
  const fs::path dir = assessment_dir(assessment.id);
  std::lock_guard guard(lock_for(assessment.id));
  const std::string bytes = canonical_dump(to_json(assessment));

  std::error_code ec;
  if (!fs::exists(revision_path(dir, 1))) {
    if (base_revision && *base_revision != 0) {
      throw ConflictError("assessment " + assessment.id + " has no revision " +
                          std::to_string(*base_revision));
    }
    fs::create_directories(dir, ec);
    if (ec) throw StorageError("mkdir " + dir.string() + ": " + ec.message());
    if (!publish_exclusive(revision_path(dir, 1), bytes)) {
      throw ConflictError("assessment " + assessment.id + " was created concurrently");
    }
    append_history(assessment.id, {HistoryEvent{1, event_time({}), HistoryKind::Created,
                                                revision_payload(1, {{"assessment", to_json(assessment)}})}});
    return 1;
  }

  const int latest = latest_revision(assessment.id);
  if (base_revision && *base_revision != latest) {
    throw ConflictError("stale base revision " + std::to_string(*base_revision) +
                        " for assessment " + assessment.id + " (latest is " +
                        std::to_string(latest) + ")");
  }
  const Assessment current = load_assessment(assessment.id, latest);
  if (current.device != assessment.device || current.catalog_checksum != assessment.catalog_checksum ||
      current.catalog_version != assessment.catalog_version ||
      current.include_optional != assessment.include_optional ||
      current.created_at != assessment.created_at) {
    throw DomainError("assessment " + assessment.id +
                      ": device, catalog pin, scope and created_at are immutable");
  }
  for (const auto& [id, r] : current.responses) {
    if (!assessment.responses.contains(id)) {
      throw DomainError("assessment " + assessment.id + ": responses cannot be removed (expectation " +
                        std::to_string(id) + ")");
    }
  }

  const int next = latest + 1;
  std::vector<HistoryEvent> events;
  auto history = list_history(assessment.id);
  const Timestamp when = event_time(history);
  int sequence = static_cast<int>(history.size());
  for (const auto& [id, r] : assessment.responses) {
    auto it = current.responses.find(id);
    if (it != current.responses.end() && it->second == r) continue;
    events.push_back({++sequence, when, HistoryKind::ResponseSet,
                      revision_payload(next, {{"response", to_json(r)},
                                              {"updated_at", to_rfc3339(assessment.updated_at)}})});
  }
  if (current.status != assessment.status) {
    events.push_back({++sequence, when, HistoryKind::StatusChanged,
                      revision_payload(next, {{"from", to_string(current.status)},
                                              {"to", to_string(assessment.status)},
                                              {"updated_at", to_rfc3339(assessment.updated_at)}})});
  }
  if (events.empty()) return latest;

  if (!publish_exclusive(revision_path(dir, next), bytes)) {
    throw ConflictError("assessment " + assessment.id + " revision " + std::to_string(next) +
                        " was written concurrently");
  }
  append_history(assessment.id, events);
  return next;
}

void AssessmentStore::record_score(const std::string& id, const ScoreReport& report) {
  if (report.assessment_id != id) {
    throw DomainError("score report belongs to " + report.assessment_id + ", not " + id);
  }
  std::lock_guard guard(lock_for(id));
  const int latest = latest_revision(id);
  auto history = list_history(id);
  append_history(id, {HistoryEvent{static_cast<int>(history.size()) + 1, event_time(history),
                                   HistoryKind::Scored,
                                   revision_payload(latest, {{"report", to_json(report)}})}});
}

Assessment AssessmentStore::replay(const std::string& id, std::optional<int> revision) const {
  const int target = revision ? *revision : latest_revision(id);
  std::optional<Assessment> state;
  for (const HistoryEvent& e : list_history(id)) {
    const int rev = e.payload.at("revision").get<int>();
    if (rev > target) break;
    switch (e.kind) {
      case HistoryKind::Created:
        state = assessment_from_json(e.payload.at("assessment"));
        break;
      case HistoryKind::ResponseSet: {
        if (!state) throw IntegrityError("history of " + id + " does not start with Created");
        Response r = response_from_json(e.payload.at("response"));
        state->responses[r.expectation_id] = std::move(r);
        state->updated_at = parse_rfc3339(e.payload.at("updated_at").get<std::string>());
        break;
      }
      case HistoryKind::StatusChanged:
        if (!state) throw IntegrityError("history of " + id + " does not start with Created");
        state->status = status_from_string(e.payload.at("to").get<std::string>());
        state->updated_at = parse_rfc3339(e.payload.at("updated_at").get<std::string>());
        break;
      case HistoryKind::Scored:
        break;
    }
  }
  if (!state) throw NotFound("no history for assessment '" + id + "'");
  return *state;
}

void AssessmentStore::save_catalog(const ExpectationCatalog& catalog) {
  const fs::path path = root_ / "catalogs" / (catalog.checksum() + ".json");
  if (fs::exists(path)) return;
  publish_exclusive(path, catalog.canonical());
}

ExpectationCatalog AssessmentStore::load_catalog(const std::string& checksum) const {
  const fs::path path = root_ / "catalogs" / (checksum + ".json");
  if (checksum.size() != 64 || !fs::exists(path)) throw NotFound("no catalog " + checksum);
  ExpectationCatalog catalog = miot::load_catalog(read_file(path));
  if (catalog.checksum() != checksum) {
    throw IntegrityError("stored catalog " + checksum + " hashes to " + catalog.checksum());
  }
  return catalog;
}

}  // namespace miot
