#include "heighten/sow.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "heighten/parallel.hpp"

namespace heighten::sow {

UnitSample lhs_sample(std::size_t k, std::size_t n, Rng& rng) {
  if (k == 0 || n == 0) throw std::domain_error("lhs_sample: k and n must be positive");
  UnitSample s{n, k, std::vector<double>(n * k)};
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < k; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
      std::swap(perm[i], perm[std::min(r, i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
      // guard against rounding up to the next bin edge
      s(i, j) = std::min(v, std::nextafter((static_cast<double>(perm[i]) + 1) / static_cast<double>(n), 0.0));
    }
  }
  return s;
}

UnitSample random_sample(std::size_t k, std::size_t n, Rng& rng) {
  UnitSample s{n, k, std::vector<double>(n * k)};
  for (auto& v : s.data) v = uniform01(rng);
  return s;
}

std::string scenario_name(const Scenario& s) {
  return fmt::format("{}+{}", exposure::damage_model_name(s.damage), discount::kind_name(s.discount));
}

std::vector<Scenario> all_scenarios() {
  std::vector<Scenario> out;
  for (auto d : {exposure::DamageModel::HAZUS, exposure::DamageModel::JRC})
    for (auto k : discount::kAllKinds) out.push_back({d, k});
  return out;
}

std::size_t pick_weighted(double u, const double* w, std::size_t count) {
  double total = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(w[i] >= 0)) throw std::invalid_argument("model weights must be non-negative");
    total += w[i];
  }
  if (!(total > 0)) throw std::invalid_argument("model weights must not all be zero");
  double acc = 0;
  for (std::size_t i = 0; i < count; ++i) {
    acc += w[i] / total;
    if (u < acc && w[i] > 0) return i;
  }
  for (std::size_t i = count; i-- > 0;)
    if (w[i] > 0) return i;
  return count - 1;
}

SowEnsemble generate_sows(const hazard::GevPosterior& post, const std::vector<discount::Ar3Model>& models,
                          const SowConfig& cfg) {
  if (cfg.n == 0) throw std::domain_error("generate_sows: ensemble size must be positive");
  if (post.samples.empty()) throw std::invalid_argument("generate_sows: empty posterior");
  if (models.size() != 3) throw std::invalid_argument("generate_sows: expected one model slot per discount kind");
  const bool deep = cfg.mode == EnsembleMode::DeepSwitching;
  for (auto k : discount::kAllKinds) {
    const bool used = deep ? cfg.discount_weights[static_cast<int>(k)] > 0 : cfg.scenario.discount == k;
    if (used && models[static_cast<int>(k)].n_params == 0)
      throw std::invalid_argument(fmt::format("generate_sows: {} model not fitted", discount::kind_name(k)));
  }

  auto rng = derive_rng(cfg.seed, 0xA11CE);
  const auto u = lhs_sample(5, cfg.n, rng);
  SowEnsemble e;
  e.config = cfg;
  e.sows.resize(cfg.n);
  const std::uint64_t path_seed = splitmix64(cfg.seed ^ 0x9a7b5eedULL);
  const std::size_t rows = post.samples.size();
  parallel_for(cfg.n, [&](std::size_t i) {
    auto& s = e.sows[i];
    s.index = i;
    s.posterior_row = std::min(rows - 1, static_cast<std::size_t>(u(i, 0) * static_cast<double>(rows)));
    s.gev = post.samples[s.posterior_row].params;
    s.lifetime = exposure::lifetime_from_uniform(cfg.lifetime, u(i, 1));
    s.damage_error = -0.3 + 0.6 * u(i, 2);
    if (deep) {
      s.scenario.damage = static_cast<exposure::DamageModel>(pick_weighted(u(i, 3), cfg.damage_weights.data(), 2));
      s.scenario.discount = static_cast<discount::ModelKind>(pick_weighted(u(i, 4), cfg.discount_weights.data(), 3));
    } else {
      s.scenario = cfg.scenario;
    }
    auto prng = derive_rng(path_seed, i);
    s.rate_path = discount::simulate_path(models[static_cast<int>(s.scenario.discount)],
                                          static_cast<std::size_t>(s.lifetime) + 1, prng);
  });
  return e;
}

std::string ensemble_csv(const SowEnsemble& e) {
  std::string out = "index,posterior_row,mu,sigma,xi,lifetime,damage_error,damage_model,discount_model,discount_sum\n";
  for (const auto& s : e.sows) {
    const auto f = discount::discount_factors_stochastic(s.rate_path);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.index, s.posterior_row, s.gev.mu, s.gev.sigma, s.gev.xi,
                       s.lifetime, s.damage_error, exposure::damage_model_name(s.scenario.damage),
                       discount::kind_name(s.scenario.discount), discount::factor_sum(f, s.lifetime));
  }
  return out;
}

std::string ensemble_manifest_json(const SowEnsemble& e) {
  const auto& c = e.config;
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["size"] = e.size();
  j["mode"] = c.mode == EnsembleMode::DeepSwitching ? "deep_switching" : "fixed_scenario";
  if (c.mode == EnsembleMode::FixedScenario) j["scenario"] = scenario_name(c.scenario);
  j["damage_weights"] = c.damage_weights;
  j["discount_weights"] = c.discount_weights;
  j["lifetime"] = c.lifetime.kind == exposure::LifetimeDist::Kind::Fixed
                      ? nlohmann::ordered_json{{"kind", "fixed"}, {"years", c.lifetime.fixed_years}}
                      : nlohmann::ordered_json{{"kind", "weibull"}, {"shape", c.lifetime.shape}, {"scale", c.lifetime.scale}};
  return j.dump(2) + "\n";
}

}  // namespace heighten::sow
