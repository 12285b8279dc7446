#pragma once

// Historical real discount rates, AR(3) models on log rates, simulated paths
// and discount factors.

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heighten/rng.hpp"

namespace heighten::discount {

struct DiscountSeries {
  std::vector<int> years;
  std::vector<double> rate_percent;
  std::string provenance;

  std::size_t size() const { return years.size(); }
};

/// Reads "year,rate_percent". Rates must be positive and years contiguous.
DiscountSeries parse_discount_csv(std::string_view text, std::string provenance = {});
std::string discount_csv(const DiscountSeries& s);

/// Trailing moving average over `window` years; the first window-1 years are dropped.
DiscountSeries moving_average(const DiscountSeries& raw, int window = 3);

enum class ModelKind { RandomWalk, MeanReverting, BackgroundTrend };
inline constexpr std::array<ModelKind, 3> kAllKinds = {ModelKind::RandomWalk, ModelKind::MeanReverting,
                                                        ModelKind::BackgroundTrend};
std::string_view kind_name(ModelKind k);
ModelKind parse_kind(std::string_view name);

/// AR(3) on x_t = ln(rate_percent_t):
///   RandomWalk       x_t = sum rho_i x_{t-i} + e_t,  sum rho = 1
///   MeanReverting    x_t - eta = sum rho_i (x_{t-i} - eta) + e_t
///   BackgroundTrend  x_t - m_t = sum rho_i (x_{t-i} - m_{t-i}) + e_t,  m_t = eta + beta t
/// with t = 1 for the first observation.
struct Ar3Model {
  ModelKind kind = ModelKind::MeanReverting;
  std::array<double, 3> rho{};
  double eta = 0.0;
  double beta = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
  int n_params = 0;
  std::size_t n_obs = 0;  // conditional sample size (series length - 3)
  double aic = 0.0;
  double bic = 0.0;
  std::array<double, 3> rho_se{};
  double eta_se = 0.0;
  double beta_se = 0.0;
  /// Last three observed log rates (oldest first) and the time index of the last one.
  std::array<double, 3> last_x{};
  int last_t = 0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditional maximum likelihood (OLS on the lagged design). Needs >= 30 values.
Ar3Model fit_ar3(const DiscountSeries& series, ModelKind kind);

std::string model_json(const Ar3Model& m);
Ar3Model parse_model_json(std::string_view text);

struct SelectionRow {
  ModelKind kind;
  double log_likelihood;
  int n_params;
  double aic;
  double bic;
  bool best_aic;
  bool equivalent_to_best;  // AIC within 2 of the lowest
};
std::vector<SelectionRow> model_selection_table(const std::vector<Ar3Model>& models);
std::vector<SelectionRow> model_selection_table(const DiscountSeries& series);

/// Annual rates as fractions per year, starting the year after the last observation.
using RatePath = std::vector<double>;

RatePath simulate_path(const Ar3Model& m, std::size_t horizon, Rng& rng);
/// Path i uses derive_rng(seed, i).
std::vector<RatePath> simulate_rates(const Ar3Model& m, std::size_t horizon, std::size_t n_paths,
                                     std::uint64_t seed);

/// Noise-free mean of x_t for t steps ahead (used as an analytic oracle).
std::vector<double> expected_log_path(const Ar3Model& m, std::size_t horizon);

enum class FactorConvention {
  DiscountFirstYear,  // F_t = exp(-sum_{s=0..t} d_s)
  UndiscountedFirstYear  // F_0 = 1, F_t = exp(-sum_{s=0..t-1} d_s)
};

std::vector<double> discount_factors_fixed(double r, std::size_t horizon,
                                           FactorConvention c = FactorConvention::DiscountFirstYear);
std::vector<double> discount_factors_stochastic(const RatePath& path,
                                                FactorConvention c = FactorConvention::DiscountFirstYear);

/// Sum of F_0..F_n (n+1 terms) for a lifetime of n years.
double factor_sum(const std::vector<double>& factors, int lifetime);

}  // namespace heighten::discount
