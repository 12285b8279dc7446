#pragma once

// Run configuration, persisted artifacts and the pipeline stages behind the CLI.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heighten/discount.hpp"
#include "heighten/exposure.hpp"
#include "heighten/hazard.hpp"
#include "heighten/hydro_ingest.hpp"
#include "heighten/objectives.hpp"
#include "heighten/robustness.hpp"
#include "heighten/sensitivity.hpp"
#include "heighten/sow.hpp"

namespace heighten::pipeline {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a stage needs an artifact that is missing, stale or altered.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HousePoolSpec {
  std::size_t count = 1000;
  double value_min = 10000, value_max = 1000000;
  double size_min = 100, size_max = 5000;
  double floor_min = -10, floor_max = 0;
};

struct RunConfig {
  fs::path gage_rdb, rating_curve, discount_series, damage_manifest, cost_model;
  fs::path output_dir;

  std::uint64_t mcmc_seed = 2021;
  std::uint64_t sow_seed = 42;
  std::uint64_t sweep_seed = 5;
  std::uint64_t sensitivity_seed = 7;

  double min_coverage = 0.9;
  hydro::YearConvention year_convention = hydro::YearConvention::Calendar;
  hydro::RatingInterpolation rating_interpolation = hydro::RatingInterpolation::Linear;

  hazard::PriorSpec priors;
  hazard::McmcConfig mcmc;

  int smoothing_window = 1;  // 1: series is used as shipped
  discount::FactorConvention factor_convention = discount::FactorConvention::DiscountFirstYear;

  std::size_t ensemble_size = 10000;
  sow::EnsembleMode ensemble_mode = sow::EnsembleMode::DeepSwitching;
  sow::Scenario scenario;
  std::array<double, 2> damage_weights{0.5, 0.5};
  std::array<double, 3> discount_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  exposure::LifetimeDist lifetime;

  double ignoring_rate = 0.04;
  int ignoring_lifetime = 30;

  double t_min = 1.001, t_max = 10000;
  std::size_t ead_nodes = 256;
  double h_step = 0.1;
  double freeboard = 1.5;
  std::optional<exposure::CostMode> cost_mode;  // overrides the cost model file

  robustness::AcceptableRanges ranges;
  exposure::House house;

  HousePoolSpec pool;
  std::size_t sweep_ensemble_size = 2000;
  double sweep_dz = 0.02;

  std::size_t sensitivity_n = 4096;
  std::size_t bootstrap = 1000;
  sensitivity::Sampler sampler = sensitivity::Sampler::LatinHypercube;
  std::size_t bank_size = 1000;
  std::size_t bank_horizon = 300;
  double rate_min = 0.01, rate_max = 0.10;

  int api_port = 8080;
  std::size_t api_default_ensemble = 2000;
  std::size_t api_max_ensemble = 20000;

  nlohmann::ordered_json raw;  // effective configuration, all defaults filled in
};

/// Relative paths resolve against the config file's directory. Referenced
/// input files must exist.
RunConfig load_config(const fs::path& path);
RunConfig parse_config(const nlohmann::json& j, const fs::path& base_dir);
nlohmann::ordered_json config_json(const RunConfig& c);
std::string config_hash(const RunConfig& c);

objectives::EadGrid ead_grid(const RunConfig& c);
exposure::ElevationCostModel load_cost_model(const RunConfig& c);
std::vector<exposure::House> house_pool(const HousePoolSpec& spec, std::uint64_t seed);

/// Inputs shared by every house analysis: the fitted hazard and discount
/// models plus exposure tables.
struct Artifacts {
  RunConfig config;
  hazard::GevPosterior posterior;
  hazard::GevParams map;
  double bfe = 0;
  std::vector<discount::Ar3Model> models;  // indexed by ModelKind
  std::vector<exposure::DepthDamageCurve> curves;
  exposure::ElevationCostModel cost;
  std::map<std::string, std::string> hashes;  // artifact name -> content hash
};

struct AnalysisOptions {
  std::size_t ensemble_size = 10000;
  std::uint64_t seed = 42;
  sow::EnsembleMode ensemble_mode = sow::EnsembleMode::DeepSwitching;
  sow::Scenario scenario;
  robustness::AcceptableRanges ranges;
  bool with_ignoring = true;
};
AnalysisOptions default_options(const RunConfig& c);

struct Strategy {
  std::string name;
  double h = 0;
  bool feasible = true;
  objectives::PolicyResult result;  // under uncertainty
  double ignoring_total = 0;        // total cost under the ignoring-uncertainty model
  robustness::RobustnessResult robustness;
};

struct HouseAnalysis {
  exposure::House house;
  AnalysisOptions options;
  objectives::ObjectiveSurface considering;
  std::optional<objectives::ObjectiveSurface> ignoring;
  std::size_t opt_index = 0;
  std::optional<std::size_t> ignoring_opt_index;
  objectives::FemaPolicy fema;
  std::vector<robustness::RobustnessResult> robustness;
  std::vector<robustness::TradeoffRow> tradeoff;
  std::vector<Strategy> strategies;  // do-nothing, FEMA, optimal-ignoring, optimal-considering
};

HouseAnalysis analyze_house(const Artifacts& a, const exposure::House& house, const AnalysisOptions& opt);

nlohmann::ordered_json strategies_json(const HouseAnalysis& an);
std::string strategies_csv(const HouseAnalysis& an);
nlohmann::ordered_json analysis_json(const HouseAnalysis& an);

struct SweepRow {
  std::size_t id;
  exposure::House house;
  double h_opt = 0;
  double h_opt_ignoring = 0;
  double h_fema = 0;
  bool fema_feasible = true;
  double total_ratio_opt = 0;
  double bcr_opt = 0;  // NaN when h_opt = 0
  double bcr_fema = 0;
  bool fema_passes_cb = false;
  bool opt_passes_cb = false;
  bool above_fema = false;
  double reliability_opt = 0;
  double reliability_fema = 0;
};

struct SweepSummary {
  std::size_t houses = 0;
  double share_above_fema = 0;
  double share_zero_optimal = 0;
  double share_fema_passes_cb = 0;
  double share_nonzero_opt_passing_cb = 0;  // among houses with h_opt > 0
  double share_zero_optimal_ignoring = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

SweepSummary summarize_sweep(const std::vector<SweepRow>& rows);
SweepResult sweep_houses(const Artifacts& a, const std::vector<exposure::House>& pool);
std::string sweep_csv(const SweepResult& r);

/// Stage outputs under output_dir with a manifest.json of content hashes.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  const RunConfig& config() const { return cfg_; }
  const fs::path& output_dir() const { return cfg_.output_dir; }

  /// When set, stages run missing or stale upstream stages instead of failing.
  void set_run_dependencies(bool v) { run_deps_ = v; }

  void ingest();
  void fit_hazard();
  void fit_discount();
  HouseAnalysis analyze();
  SweepResult sweep();
  std::vector<fs::path> sensitivity(const std::string& variant, const std::string& scenario);
  void robustness();
  void export_plots();

  Artifacts load_artifacts();
  hydro::AnnualMaxima load_maxima();

  std::string stage_hash(const std::string& stage) const;

 private:
  void require(const std::string& stage);
  void write(const std::string& stage, const std::string& rel, const std::string& content);
  std::string read_verified(const std::string& stage, const std::string& rel);
  void begin_stage(const std::string& stage);
  void commit_stage(const std::string& stage);
  void load_manifest();
  void save_manifest();

  RunConfig cfg_;
  bool run_deps_ = false;
  nlohmann::ordered_json manifest_;
};

/// Ishigami self-test on the Saltelli estimators: max absolute error of
/// S1, S2, S3 and ST1 against the analytic values.
struct IshigamiCheck {
  double s1, s2, s3, st1;
  double max_error;
};
IshigamiCheck ishigami_self_test(std::size_t n, std::uint64_t seed);

}  // namespace heighten::pipeline
