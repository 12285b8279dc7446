#include "heighten/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "heighten/io.hpp"
#include "heighten/rng.hpp"

namespace heighten::hazard {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_log_pdf(double x, double sd) {
  return -0.5 * (x / sd) * (x / sd) - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Batch-means standard error of the mean.
double batch_se(std::span<const double> v, std::size_t batch = 50) {
  const std::size_t nb = v.size() / batch;
  if (nb < 2) {
    const double m = io::mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / std::max<std::size_t>(1, v.size() - 1) / std::max<std::size_t>(1, v.size()));
  }
  std::vector<double> means(nb);
  for (std::size_t b = 0; b < nb; ++b) means[b] = io::mean(v.subspan(b * batch, batch));
  const double m = io::mean(means);
  double ss = 0;
  for (double x : means) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
}

double geweke(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 100) return 0.0;
  const auto a = chain.first(n / 10);
  const auto b = chain.last(n / 2);
  const double se = std::hypot(batch_se(a), batch_se(b));
  return se > 0 ? (io::mean(a) - io::mean(b)) / se : 0.0;
}

}  // namespace

double log_likelihood(const GevParams& p, std::span<const double> data) {
  if (!(p.sigma > 0) || !std::isfinite(p.xi)) return kNegInf;
  double sum = 0.0;
  for (double x : data) {
    const double lp = gev_log_pdf(p, x);
    if (lp == kNegInf) return kNegInf;
    sum += lp;
  }
  return sum;
}

double log_prior(const GevParams& p, const PriorSpec& priors) {
  return normal_log_pdf(p.mu, priors.mu_sd) + normal_log_pdf(p.sigma, priors.sigma_sd) +
         normal_log_pdf(p.xi, priors.xi_sd);
}

double log_posterior(const GevParams& p, std::span<const double> data, const PriorSpec& priors) {
  const double ll = log_likelihood(p, data);
  if (ll == kNegInf) return kNegInf;
  return ll + log_prior(p, priors);
}

GevPosterior mcmc_sample(std::span<const double> data, const PriorSpec& priors, const McmcConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("mcmc_sample: no observations");
  if (cfg.n_samples == 0) throw std::invalid_argument("mcmc_sample: n_samples must be positive");
  GevPosterior post;
  post.burn_in = cfg.burn_in;
  post.seed = cfg.seed;
  if (data.size() < 20)
    post.warnings.push_back(fmt::format("only {} annual maxima; posterior will be prior-dominated", data.size()));

  Rng rng(splitmix64(cfg.seed));
  using Vec3 = Eigen::Vector3d;
  auto to_params = [](const Vec3& y) { return GevParams{y[0], std::exp(y[1]), y[2]}; };

  Vec3 cur(cfg.init.mu, std::log(cfg.init.sigma), cfg.init.xi);
  double cur_lp = log_posterior(to_params(cur), data, priors);
  if (cur_lp == kNegInf) throw std::invalid_argument("mcmc_sample: initial state has zero posterior density");

  Eigen::Matrix3d chol = Eigen::Vector3d(0.7, 0.2, 0.1).asDiagonal();
  std::vector<Vec3> history;
  history.reserve(cfg.burn_in);
  post.samples.reserve(cfg.n_samples);

  std::size_t accepted = 0;
  const std::size_t total = cfg.burn_in + cfg.n_samples;
  for (std::size_t it = 0; it < total; ++it) {
    const bool burning = it < cfg.burn_in;
    if (burning && it >= cfg.adapt_start && it % cfg.adapt_interval == 0) {
      // covariance of the most recent half of the burn-in history
      const std::size_t lo = history.size() / 2;
      const std::size_t m = history.size() - lo;
      Vec3 mean = Vec3::Zero();
      for (std::size_t i = lo; i < history.size(); ++i) mean += history[i];
      mean /= static_cast<double>(m);
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (std::size_t i = lo; i < history.size(); ++i) {
        const Vec3 d = history[i] - mean;
        cov += d * d.transpose();
      }
      cov /= static_cast<double>(m - 1);
      cov = cov * (2.38 * 2.38 / 3.0) + 1e-8 * Eigen::Matrix3d::Identity();
      Eigen::LLT<Eigen::Matrix3d> llt(cov);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
    const Vec3 z(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    const Vec3 prop = cur + chol * z;
    const double prop_lp = log_posterior(to_params(prop), data, priors);
    // random walk on ln(sigma): Jacobian sigma'/sigma
    const double log_alpha = prop_lp - cur_lp + (prop[1] - cur[1]);
    if (prop_lp != kNegInf && std::log(uniform01(rng)) < log_alpha) {
      cur = prop;
      cur_lp = prop_lp;
      if (!burning) ++accepted;
    }
    if (burning) {
      history.push_back(cur);
    } else {
      post.samples.push_back({to_params(cur), cur_lp});
    }
  }
  post.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.n_samples);
  if (post.acceptance_rate < 0.05 || post.acceptance_rate > 0.9)
    throw McmcDiagnosticError(fmt::format("MCMC acceptance rate {:.3f} outside [0.05, 0.9]", post.acceptance_rate));

  static constexpr const char* kNames[3] = {"mu", "sigma", "xi"};
  std::vector<double> trace(post.samples.size());
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto& p = post.samples[i].params;
      trace[i] = k == 0 ? p.mu : (k == 1 ? p.sigma : p.xi);
    }
    post.geweke_z[k] = geweke(trace);
    if (std::abs(post.geweke_z[k]) > 2.0)
      post.warnings.push_back(fmt::format("Geweke z = {:.2f} for {}", post.geweke_z[k], kNames[k]));
  }
  return post;
}

GevParams map_estimate(const GevPosterior& post) {
  if (post.samples.empty()) throw std::invalid_argument("map_estimate: empty posterior");
  std::size_t best = 0;
  for (std::size_t i = 1; i < post.samples.size(); ++i)
    if (post.samples[i].log_posterior > post.samples[best].log_posterior) best = i;
  return post.samples[best].params;
}

ReturnLevelSummary return_level_summary(const GevPosterior& post, double period) {
  if (!(period > 1.0)) throw std::domain_error("return period must exceed one year");
  const double q = 1.0 - 1.0 / period;
  std::vector<double> levels(post.samples.size());
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = gev_quantile(post.samples[i].params, q);
  return {period, gev_quantile(map_estimate(post), q), io::mean(levels), io::quantile(levels, 0.05),
          io::quantile(levels, 0.95)};
}

double base_flood_elevation(const GevParams& p) { return gev_quantile(p, 0.99); }
double base_flood_elevation(const GevPosterior& post) { return base_flood_elevation(map_estimate(post)); }

std::string posterior_csv(const GevPosterior& post) {
  std::string out = "mu,sigma,xi,log_posterior\n";
  out.reserve(post.samples.size() * 80);
  for (const auto& s : post.samples)
    out += fmt::format("{},{},{},{}\n", s.params.mu, s.params.sigma, s.params.xi, s.log_posterior);
  return out;
}

std::string posterior_metadata_json(const GevPosterior& post) {
  nlohmann::ordered_json j;
  j["seed"] = post.seed;
  j["burn_in"] = post.burn_in;
  j["n_samples"] = post.samples.size();
  j["acceptance_rate"] = post.acceptance_rate;
  j["geweke_z"] = {post.geweke_z[0], post.geweke_z[1], post.geweke_z[2]};
  j["warnings"] = post.warnings;
  return j.dump(2) + "\n";
}

GevPosterior parse_posterior(std::string_view csv, std::string_view metadata_json) {
  GevPosterior post;
  const auto meta = nlohmann::json::parse(metadata_json);
  post.seed = meta.at("seed").get<std::uint64_t>();
  post.burn_in = meta.at("burn_in").get<std::size_t>();
  post.acceptance_rate = meta.at("acceptance_rate").get<double>();
  for (int k = 0; k < 3; ++k) post.geweke_z[k] = meta.at("geweke_z").at(k).get<double>();
  post.warnings = meta.value("warnings", std::vector<std::string>{});
  const auto t = io::parse_csv(csv);
  const auto mc = t.column("mu"), sc = t.column("sigma"), xc = t.column("xi"), lc = t.column("log_posterior");
  post.samples.reserve(t.rows.size());
  for (const auto& r : t.rows)
    post.samples.push_back({{io::parse_double(r[mc]), io::parse_double(r[sc]), io::parse_double(r[xc])},
                            io::parse_double(r[lc])});
  return post;
}

}  // namespace heighten::hazard
