#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "heighten/api_service.hpp"

using namespace heighten;

int main(int argc, char** argv) {
  CLI::App app{"HTTP service for interactive house analyses"};
  std::string config = "config/default.json", host = "127.0.0.1";
  int port = 0;
  bool with_deps = false;
  app.add_option("-c,--config", config, "run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--host", host, "bind address");
  app.add_option("-p,--port", port, "port (default from config)");
  app.add_flag("--with-deps", with_deps, "fit missing artifacts before serving");
  CLI11_PARSE(app, argc, argv);
  try {
    pipeline::Pipeline p(pipeline::load_config(config));
    p.set_run_dependencies(with_deps);
    const auto& c = p.config();
    api::ApiService service({c.api_default_ensemble, c.api_max_ensemble});
    service.load(p.load_artifacts());
    const int use = port > 0 ? port : c.api_port;
    fmt::print("serving on http://{}:{}\n", host, use);
    std::fflush(stdout);
    api::serve(service, host, use);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
