#include "heighten/gev.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace heighten::hazard {

namespace {

// -log F(h), or NaN-free sentinels at the support edges: returns +inf when
// F = 0 and 0 when F = 1.
double neg_log_cdf(const GevParams& p, double h) {
  const double z = (h - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelTolerance) return std::exp(-z);
  const double b = 1.0 + p.xi * z;
  if (b <= 0.0) return p.xi > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::pow(b, -1.0 / p.xi);
}

}  // namespace

double gev_cdf(const GevParams& p, double h) { return std::exp(-neg_log_cdf(p, h)); }

double gev_exceedance(const GevParams& p, double h) { return -std::expm1(-neg_log_cdf(p, h)); }

double gev_log_pdf(const GevParams& p, double h) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(p.sigma > 0)) return kNegInf;
  const double z = (h - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelTolerance) return -std::log(p.sigma) - z - std::exp(-z);
  const double b = 1.0 + p.xi * z;
  if (b <= 0.0) return kNegInf;
  const double lb = std::log(b);
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * lb - std::exp(-lb / p.xi);
}

double gev_pdf(const GevParams& p, double h) { return std::exp(gev_log_pdf(p, h)); }

double gev_quantile(const GevParams& p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("gev_quantile: q must lie in (0, 1)");
  const double y = -std::log(q);
  if (std::abs(p.xi) < kGumbelTolerance) return p.mu - p.sigma * std::log(y);
  // expm1 keeps precision as xi -> 0
  return p.mu + p.sigma * std::expm1(-p.xi * std::log(y)) / p.xi;
}

}  // namespace heighten::hazard
