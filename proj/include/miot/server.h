#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "catalog.h"
#include "store.h"

namespace httplib {
class Server;
}

namespace miot {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  bool allow_remote = false;
  std::optional<std::filesystem::path> ui_dir;
};

bool is_loopback_host(const std::string& host);

/// HTTP API over an AssessmentStore. Handlers hold no state besides the
/// store and the active catalog.
class ApiServer {
 public:
  ApiServer(AssessmentStore& store, const ExpectationCatalog& catalog, ServerOptions options);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket. Returns the bound port, or nullopt when the
  /// address is unavailable. Throws DomainError for a non-loopback host
  /// without allow_remote. Port 0 picks a free port.
  std::optional<int> bind();

  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();

 private:
  void install_routes();

  AssessmentStore& store_;
  const ExpectationCatalog& catalog_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace miot
