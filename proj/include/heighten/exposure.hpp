#pragma once

// House exposure: depth-damage curves, elevation costs and house lifetime.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "heighten/rng.hpp"

namespace heighten::exposure {

struct House {
  double value = 300000.0;     // USD
  double size = 1500.0;        // ft^2
  double floor_rel_bfe = -4.0; // ft, lowest floor minus BFE
  std::string label;
};

/// Throws std::invalid_argument unless value and size are positive and finite.
void validate(const House& h);

enum class DamageModel { HAZUS = 0, JRC = 1 };
std::string_view damage_model_name(DamageModel m);
DamageModel parse_damage_model(std::string_view name);

struct DepthDamageCurve {
  DamageModel model_id = DamageModel::HAZUS;
  std::vector<double> depth_ft;  // strictly increasing
  std::vector<double> fraction;  // non-decreasing, within [0, 1]
  double error_halfwidth = 0.3;
  std::string source;
};

/// Validates the table invariants; throws std::invalid_argument.
DepthDamageCurve make_curve(DamageModel id, std::vector<double> depth, std::vector<double> fraction,
                            double error_halfwidth = 0.3);
DepthDamageCurve parse_curve_csv(std::string_view text, DamageModel id, double error_halfwidth = 0.3);

/// Reads manifest.json and every curve it lists, indexed by DamageModel.
std::vector<DepthDamageCurve> load_damage_curves(const std::filesystem::path& manifest);

/// Interpolated table value times (1 + error), clamped to [0, 1]. Zero below
/// the first knot, the last value above the last knot.
double damage_fraction(const DepthDamageCurve& curve, double depth_ft, double error_draw);

/// Damage in USD for a water level measured relative to BFE.
double flood_damage(const DepthDamageCurve& curve, const House& house, double water_level_rel_bfe, double h,
                    double error_draw);

struct CostBand {
  double from_ft;
  double to_ft;
  double rate;  // USD per ft^2
};

enum class CostMode { Step, Interpolated };

struct ElevationCostModel {
  double fixed_fee = 20745.0;
  double min_height = 3.0;
  double max_height = 14.0;
  std::vector<CostBand> bands{{3.0, 7.0, 82.5}, {7.0, 10.0, 86.25}, {10.0, 14.0, 103.75}};
  CostMode mode = CostMode::Step;
};

ElevationCostModel parse_cost_model_json(std::string_view text);
std::string cost_model_json(const ElevationCostModel& m);

/// Unit rate at height h. Step mode uses the band containing h (upper edges
/// inclusive); Interpolated mode is linear between band midpoints and flat
/// beyond the outer midpoints.
double unit_rate(const ElevationCostModel& m, double h);

/// 0 at h = 0, otherwise fee + rate(h) * size. Throws std::domain_error for h
/// in (0, min_height) or above max_height.
double elevation_cost(const ElevationCostModel& m, double size_sqft, double h);
inline double elevation_cost(const ElevationCostModel& m, const House& house, double h) {
  return elevation_cost(m, house.size, h);
}

bool is_feasible_height(const ElevationCostModel& m, double h);

struct LifetimeDist {
  enum class Kind { Weibull, Fixed } kind = Kind::Weibull;
  double shape = 2.8;
  double scale = 73.5;
  int fixed_years = 30;

  static LifetimeDist fixed(int years) { return {Kind::Fixed, 2.8, 73.5, years}; }
};

/// Inverse CDF at u in [0, 1), rounded to the nearest year, at least 1.
int lifetime_from_uniform(const LifetimeDist& d, double u);
int sample_lifetime(const LifetimeDist& d, Rng& rng);

}  // namespace heighten::exposure
