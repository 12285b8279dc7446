#pragma once

// Generalized extreme value distribution for annual maximum water levels.

namespace heighten::hazard {

/// Location and scale in feet, shape dimensionless.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  bool operator==(const GevParams&) const = default;
};

/// Below this |xi| the Gumbel limit is used.
inline constexpr double kGumbelTolerance = 1e-8;

double gev_cdf(const GevParams& p, double h);
double gev_log_pdf(const GevParams& p, double h);  // -inf outside the support
double gev_pdf(const GevParams& p, double h);

/// Throws std::domain_error unless 0 < q < 1.
double gev_quantile(const GevParams& p, double q);

/// Annual exceedance probability 1 - F(h), accurate for small tails.
double gev_exceedance(const GevParams& p, double h);

}  // namespace heighten::hazard
