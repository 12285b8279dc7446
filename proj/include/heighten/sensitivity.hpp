#pragma once

// Variance-based sensitivity analysis: Saltelli designs, Sobol indices with
// bootstrap intervals, and the lifetime-damage model wrapper.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "heighten/discount.hpp"
#include "heighten/exposure.hpp"
#include "heighten/hazard.hpp"
#include "heighten/objectives.hpp"
#include "heighten/sow.hpp"

namespace heighten::sensitivity {

enum class Sampler { LatinHypercube, PseudoRandom };

/// Evaluation rows: A, B, then A with column j from B (j = 0..k-1), then B
/// with column j from A. n(2k+2) rows in total.
struct SaltelliDesign {
  std::size_t k = 0;
  std::size_t n = 0;
  sow::UnitSample a;
  sow::UnitSample b;

  std::size_t evaluations() const { return n * (2 * k + 2); }
  std::vector<double> point(std::size_t row) const;
};

SaltelliDesign saltelli_design(std::size_t k, std::size_t n, Sampler sampler, std::uint64_t seed);

struct Interval {
  double lo = 0;
  double hi = 0;
  bool significant = false;  // interval excludes zero
};

struct SobolIndices {
  std::size_t k = 0;
  bool degenerate = false;  // zero output variance: indices undefined
  double variance = 0;
  std::vector<double> first;
  std::vector<double> total;
  std::vector<double> second;  // k x k, upper triangle used
  std::vector<Interval> first_ci;
  std::vector<Interval> total_ci;
  std::vector<Interval> second_ci;

  double s2(std::size_t i, std::size_t j) const { return second[i * k + j]; }
  const Interval& s2_ci(std::size_t i, std::size_t j) const { return second_ci[i * k + j]; }
};

double clamp_index(double v);

/// Point estimates only.
SobolIndices sobol_indices(const SaltelliDesign& d, const std::vector<double>& outputs);

/// Point estimates plus percentile intervals from resampling design rows.
SobolIndices bootstrap_significance(const SaltelliDesign& d, const std::vector<double>& outputs,
                                    std::size_t resamples = 1000, double level = 0.95, std::uint64_t seed = 7);

std::string indices_csv(const SobolIndices& s, const std::vector<std::string>& names);

/// Runs f over every design row.
std::vector<double> evaluate(const SaltelliDesign& d, const std::function<double(const std::vector<double>&)>& f);

double ishigami(const std::vector<double>& unit_point, double a = 7.0, double b = 0.1);

enum class Variant { Scenario, DeepChoice, FixedRate };
std::string variant_name(Variant v);

struct SensitivityConfig {
  Variant variant = Variant::Scenario;
  sow::Scenario scenario;  // Scenario and FixedRate variants
  exposure::House house;
  std::size_t n = 4096;
  std::uint64_t seed = 1;
  Sampler sampler = Sampler::LatinHypercube;
  std::size_t bootstrap = 1000;
  std::size_t bank_size = 1000;
  std::size_t horizon = 300;
  double rate_min = 0.01;
  double rate_max = 0.10;
  exposure::LifetimeDist lifetime;
};

struct DamageModelInputs {
  const hazard::GevPosterior* posterior = nullptr;
  const std::vector<discount::Ar3Model>* models = nullptr;  // indexed by ModelKind
  const std::vector<exposure::DepthDamageCurve>* curves = nullptr;
  double bfe = 0;
  objectives::EadGrid grid = objectives::make_ead_grid();
};

struct SensitivityResult {
  std::vector<std::string> factors;
  SaltelliDesign design;
  std::vector<double> outputs;  // LED / house value at h = 0
  SobolIndices indices;
};

std::vector<std::string> factor_names(Variant v);

SensitivityResult damage_sensitivity(const DamageModelInputs& in, const SensitivityConfig& cfg);

/// Named house presets for the exposure variant.
std::vector<exposure::House> house_presets();

}  // namespace heighten::sensitivity
