#pragma once

// Bayesian GEV flood-frequency model: posterior sampling and return levels.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heighten/gev.hpp"

namespace heighten::hazard {

/// Zero-mean Gaussian priors on (mu, sigma, xi).
struct PriorSpec {
  double mu_sd = 31.62;
  double sigma_sd = 10.0;
  double xi_sd = 1.0;
};

/// Sum of GEV log-densities plus Gaussian log-prior terms (normalising
/// constants included). -inf when sigma <= 0 or any observation lies outside
/// the support.
double log_likelihood(const GevParams& p, std::span<const double> data);
double log_prior(const GevParams& p, const PriorSpec& priors);
double log_posterior(const GevParams& p, std::span<const double> data, const PriorSpec& priors);

struct McmcConfig {
  std::size_t n_samples = 50000;
  std::size_t burn_in = 10000;
  GevParams init{5.0, 1.0, 0.1};
  std::uint64_t seed = 1;
  std::size_t adapt_start = 1000;
  std::size_t adapt_interval = 200;
};

struct PosteriorSample {
  GevParams params;
  double log_posterior;
};

struct GevPosterior {
  std::vector<PosteriorSample> samples;
  double acceptance_rate = 0.0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  /// Geweke z-scores (first 10% vs last 50%) for mu, sigma, xi.
  double geweke_z[3] = {0, 0, 0};
  std::vector<std::string> warnings;

  std::size_t size() const { return samples.size(); }
};

class McmcDiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-chain Metropolis-Hastings with a Gaussian random walk on
/// (mu, ln sigma, xi). The proposal covariance adapts during burn-in and is
/// frozen afterwards. Throws McmcDiagnosticError if the post-burn-in acceptance
/// rate falls outside [0.05, 0.9]; fewer than 20 observations adds a warning.
GevPosterior mcmc_sample(std::span<const double> data, const PriorSpec& priors, const McmcConfig& config);

/// Highest recorded log-posterior; ties go to the first occurrence.
GevParams map_estimate(const GevPosterior& post);

struct ReturnLevelSummary {
  double period_years;
  double map_level;
  double mean_level;
  double q05;
  double q95;
};

/// Per-sample quantile at 1 - 1/T summarised over the ensemble. T must exceed 1.
ReturnLevelSummary return_level_summary(const GevPosterior& post, double period_years);

/// 100-year return level. For a posterior this is taken at the MAP sample.
double base_flood_elevation(const GevParams& p);
double base_flood_elevation(const GevPosterior& post);

std::string posterior_csv(const GevPosterior& post);
std::string posterior_metadata_json(const GevPosterior& post);
GevPosterior parse_posterior(std::string_view csv, std::string_view metadata_json);

}  // namespace heighten::hazard
