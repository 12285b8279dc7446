#pragma once

// JSON-over-HTTP facade: what-if house analyses over a loaded artifact bundle.

#include <memory>
#include <string>
#include <string_view>

#include "heighten/pipeline.hpp"

namespace httplib {
class Server;
}

namespace heighten::api {

struct Response {
  int status = 200;
  std::string body;
  double compute_ms = 0;
};

struct ServiceOptions {
  std::size_t default_ensemble = 2000;
  std::size_t max_ensemble = 20000;
};

/// Handlers are pure functions of (request, loaded artifacts) and may be
/// called concurrently.
class ApiService {
 public:
  explicit ApiService(ServiceOptions opt = {});

  void load(pipeline::Artifacts artifacts);
  bool ready() const;

  Response analyze(std::string_view body) const;
  Response hazard_summary() const;
  Response meta() const;

 private:
  std::shared_ptr<const pipeline::Artifacts> artifacts() const;

  ServiceOptions opt_;
  std::shared_ptr<const pipeline::Artifacts> art_;
};

/// Registers the routes and CORS handling on a server.
void mount(httplib::Server& server, const ApiService& service);

/// Blocks serving on host:port.
void serve(const ApiService& service, const std::string& host, int port);

}  // namespace heighten::api
