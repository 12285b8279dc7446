#pragma once

// Latin hypercube sampling and state-of-the-world ensembles.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "heighten/discount.hpp"
#include "heighten/exposure.hpp"
#include "heighten/hazard.hpp"
#include "heighten/rng.hpp"

namespace heighten::sow {

/// Row-major n x k matrix in [0,1)^k; each column holds one point per bin [i/n, (i+1)/n).
struct UnitSample {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> data;

  double operator()(std::size_t row, std::size_t col) const { return data[row * k + col]; }
  double& operator()(std::size_t row, std::size_t col) { return data[row * k + col]; }
};

UnitSample lhs_sample(std::size_t k, std::size_t n, Rng& rng);
UnitSample random_sample(std::size_t k, std::size_t n, Rng& rng);

struct Scenario {
  exposure::DamageModel damage = exposure::DamageModel::HAZUS;
  discount::ModelKind discount = discount::ModelKind::BackgroundTrend;

  bool operator==(const Scenario&) const = default;
  static Scenario most_likely() { return {}; }
};
std::string scenario_name(const Scenario& s);
std::vector<Scenario> all_scenarios();

struct StateOfTheWorld {
  std::size_t index = 0;
  std::size_t posterior_row = 0;
  hazard::GevParams gev;
  int lifetime = 0;
  discount::RatePath rate_path;  // lifetime + 1 years
  double damage_error = 0.0;
  Scenario scenario;
};

enum class EnsembleMode { FixedScenario, DeepSwitching };

struct SowConfig {
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  EnsembleMode mode = EnsembleMode::DeepSwitching;
  Scenario scenario;  // used by FixedScenario
  std::array<double, 2> damage_weights{0.5, 0.5};
  std::array<double, 3> discount_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  exposure::LifetimeDist lifetime;
};

struct SowEnsemble {
  SowConfig config;
  std::vector<StateOfTheWorld> sows;

  std::size_t size() const { return sows.size(); }
};

/// Index of the bin of u under cumulative normalised weights.
std::size_t pick_weighted(double u, const double* weights, std::size_t count);

/// LHS dimensions: posterior row, lifetime, damage error, damage model,
/// discount model. Rate paths use derive_rng(seed, index) streams. `models`
/// is indexed by ModelKind; only the kinds in use need to be fitted.
SowEnsemble generate_sows(const hazard::GevPosterior& posterior, const std::vector<discount::Ar3Model>& models,
                          const SowConfig& config);

std::string ensemble_csv(const SowEnsemble& e);
std::string ensemble_manifest_json(const SowEnsemble& e);

}  // namespace heighten::sow
