#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include <fmt/format.h>

#include "heighten/pipeline.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path source_dir() { return HEIGHTEN_SOURCE_DIR; }
inline fs::path data_dir() { return source_dir() / "data"; }

/// Scratch directory removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / fmt::format("heighten_{}_{}", name, ::getpid());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline heighten::pipeline::RunConfig default_config(const fs::path& output_dir) {
  auto c = heighten::pipeline::load_config(source_dir() / "config" / "default.json");
  c.output_dir = output_dir;
  c.raw = heighten::pipeline::config_json(c);
  return c;
}

/// Fitted hazard and discount artifacts from the shipped data.
inline heighten::pipeline::Artifacts fitted_artifacts(const fs::path& output_dir) {
  heighten::pipeline::Pipeline p(default_config(output_dir));
  p.set_run_dependencies(true);
  p.fit_hazard();
  p.fit_discount();
  return p.load_artifacts();
}

}  // namespace support
