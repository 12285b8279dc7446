#pragma once

// Objectives per heightening policy: upfront cost ratio, total cost,
// benefit-to-cost ratio and reliability, with and without uncertainty.

#include <string>
#include <vector>

#include "heighten/exposure.hpp"
#include "heighten/gev.hpp"
#include "heighten/sow.hpp"

namespace heighten::objectives {

/// Exceedance-probability nodes (decreasing) on a log-spaced return-period
/// grid, with trapezoid weights so that EAD = sum_j weight_j * D(p_j).
struct EadGrid {
  std::vector<double> p;
  std::vector<double> weight;
};
EadGrid make_ead_grid(double t_min = 1.001, double t_max = 10000.0, std::size_t nodes = 256);

/// Expected annual damage in USD per year.
double ead(const hazard::GevParams& gev, double bfe, const exposure::DepthDamageCurve& curve, double error_draw,
           const exposure::House& house, double h, const EadGrid& grid);

/// sum_{t=0..lifetime} ead * F_t. Throws std::domain_error if factors are too short.
double led(double ead_per_year, int lifetime, const std::vector<double>& factors);

/// gev_cdf(BFE + floor + h)^lifetime.
double reliability(const hazard::GevParams& gev, double bfe, const exposure::House& house, double h, int lifetime);

enum class Mode { IgnoringUncertainty, ConsideringUncertainty };
std::string mode_name(Mode m);

struct SowInput {
  hazard::GevParams gev;
  int curve = 0;  // index into ObjectiveInputs::curves
  double error = 0.0;
  int lifetime = 30;
  double discount_sum = 0.0;  // sum of F_0..F_lifetime
};

/// Everything the objectives need, with per-SOW water levels (relative to
/// BFE) at the grid nodes computed once and shared across houses.
struct ObjectiveInputs {
  Mode mode = Mode::ConsideringUncertainty;
  double bfe = 0.0;
  std::vector<exposure::DepthDamageCurve> curves;
  EadGrid grid;
  std::vector<SowInput> sows;
  std::vector<double> levels;  // sows.size() x grid nodes

  std::size_t size() const { return sows.size(); }
  const double* levels_of(std::size_t s) const { return levels.data() + s * grid.p.size(); }
};

ObjectiveInputs make_inputs(Mode mode, double bfe, std::vector<exposure::DepthDamageCurve> curves,
                            std::vector<SowInput> sows, EadGrid grid = make_ead_grid());

/// MAP hazard, HAZUS curve, no damage error, fixed lifetime and constant rate.
ObjectiveInputs ignoring_inputs(const hazard::GevParams& map, double bfe, std::vector<exposure::DepthDamageCurve> curves,
                                double rate = 0.04, int lifetime = 30, EadGrid grid = make_ead_grid());

ObjectiveInputs considering_inputs(const sow::SowEnsemble& ensemble, double bfe,
                                   std::vector<exposure::DepthDamageCurve> curves, EadGrid grid = make_ead_grid());

/// EAD as a fraction of house value for SOW s with the lowest floor at z ft relative to BFE.
double ead_fraction(const ObjectiveInputs& in, std::size_t s, double z);
double sow_reliability(const ObjectiveInputs& in, std::size_t s, double z);

/// {0} plus min..max in 0.1 ft steps.
std::vector<double> height_grid(const exposure::ElevationCostModel& cost, double step = 0.1);

struct Summary {
  double mean = 0;
  double q05 = 0;
  double q95 = 0;
};
Summary summarize(const std::vector<double>& v);

struct PolicyResult {
  double h = 0;
  double upfront = 0;          // USD
  std::vector<double> led;     // per SOW, USD
  std::vector<double> rel;     // per SOW
  std::vector<double> bcr;     // per SOW; empty at h = 0
  double led_mean = 0;
  Summary total;               // USD
  double bcr_mean = 0;         // NaN at h = 0
  double rel_mean = 0;
};

struct ObjectiveSurface {
  Mode mode = Mode::ConsideringUncertainty;
  exposure::House house;
  std::vector<PolicyResult> policies;  // in grid order
  std::vector<double> led0;            // per-SOW LED without elevation

  std::size_t size() const { return policies.size(); }
  std::size_t sow_count() const { return led0.size(); }
  std::size_t index_of(double h) const;  // nearest grid point
};

PolicyResult evaluate_policy(const ObjectiveInputs& in, const exposure::House& house,
                             const exposure::ElevationCostModel& cost, double h, const std::vector<double>& led0);
std::vector<double> led_vector(const ObjectiveInputs& in, const exposure::House& house, double h);

ObjectiveSurface evaluate_surface(const ObjectiveInputs& in, const exposure::House& house,
                                  const exposure::ElevationCostModel& cost, const std::vector<double>& hs);

struct Optimum {
  double h = 0;
  std::size_t index = 0;
  double expected_total = 0;
  ObjectiveSurface surface;
};

/// Minimises the expected total cost over the grid; ties go to the smallest h.
Optimum optimize_height(const ObjectiveInputs& in, const exposure::House& house,
                        const exposure::ElevationCostModel& cost, const std::vector<double>& hs);
std::size_t argmin_total(const ObjectiveSurface& s);

struct FemaPolicy {
  double h = 0;
  bool feasible = true;
};
FemaPolicy fema_recommendation(const exposure::House& house, double freeboard = 1.5, double min_height = 3.0);

std::string surface_csv(const ObjectiveSurface& s);

/// Expected LED/value and expected reliability tabulated against the floor
/// elevation z = floor + h, for screening many houses against one ensemble.
struct ExpectationTable {
  double z0 = 0;
  double dz = 0.02;
  std::vector<double> led_fraction;
  std::vector<double> reliability;

  double led_at(double z) const;
  double reliability_at(double z) const;
};
ExpectationTable tabulate(const ObjectiveInputs& in, double z_min, double z_max, double dz = 0.02);

}  // namespace heighten::objectives
