#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "heighten/io.hpp"
#include "heighten/sow.hpp"
#include "support.hpp"

using namespace heighten;
using namespace heighten::sow;

namespace {

hazard::GevPosterior toy_posterior(std::size_t n) {
  hazard::GevPosterior post;
  Rng rng(4);
  for (std::size_t i = 0; i < n; ++i)
    post.samples.push_back({{18 + standard_normal(rng), 4 * std::exp(0.05 * standard_normal(rng)),
                             0.05 * standard_normal(rng)},
                            -static_cast<double>(i % 17)});
  return post;
}

std::vector<discount::Ar3Model> shipped_models() {
  const auto s = discount::parse_discount_csv(io::read_file(support::data_dir() / "discount" / "real_rates.csv"));
  std::vector<discount::Ar3Model> m;
  for (auto k : discount::kAllKinds) m.push_back(discount::fit_ar3(s, k));
  return m;
}

bool stratified(const UnitSample& u) {
  for (std::size_t c = 0; c < u.k; ++c) {
    std::vector<int> hits(u.n, 0);
    for (std::size_t r = 0; r < u.n; ++r) {
      const double v = u(r, c);
      if (!(v >= 0 && v < 1)) return false;
      ++hits[static_cast<std::size_t>(v * static_cast<double>(u.n))];
    }
    for (int h : hits)
      if (h != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("latin hypercube basics") {
  Rng rng(1);
  const auto one = lhs_sample(5, 1, rng);
  REQUIRE(one.data.size() == 5);
  for (double v : one.data) CHECK((v >= 0 && v < 1));

  const auto four = lhs_sample(3, 4, rng);
  for (std::size_t c = 0; c < 3; ++c) {
    std::set<int> bins;
    for (std::size_t r = 0; r < 4; ++r) bins.insert(static_cast<int>(four(r, c) * 4));
    CHECK(bins == std::set<int>{0, 1, 2, 3});
  }
}

TEST_CASE("latin hypercube is exactly stratified") {
  Rng rng(2);
  for (std::size_t n : {2u, 7u, 100u, 1000u, 4096u})
    for (std::size_t k : {1u, 3u, 12u}) CHECK(stratified(lhs_sample(k, n, rng)));
}

TEST_CASE("latin hypercube columns are uniform") {
  Rng rng(3);
  const auto u = lhs_sample(8, 10000, rng);
  for (std::size_t c = 0; c < u.k; ++c) {
    double m = 0;
    for (std::size_t r = 0; r < u.n; ++r) m += u(r, c);
    CHECK(std::abs(m / u.n - 0.5) < 0.01);
  }
}

TEST_CASE("weighted picks") {
  const double w[3] = {1, 1, 2};
  CHECK(pick_weighted(0.0, w, 3) == 0);
  CHECK(pick_weighted(0.24, w, 3) == 0);
  CHECK(pick_weighted(0.26, w, 3) == 1);
  CHECK(pick_weighted(0.51, w, 3) == 2);
  CHECK(pick_weighted(0.999999, w, 3) == 2);
}

TEST_CASE("fixed scenario ensembles") {
  const auto post = toy_posterior(500);
  const auto models = shipped_models();
  SowConfig cfg;
  cfg.n = 10;
  cfg.mode = EnsembleMode::FixedScenario;
  cfg.scenario = {exposure::DamageModel::HAZUS, discount::ModelKind::BackgroundTrend};
  const auto e = generate_sows(post, models, cfg);
  REQUIRE(e.size() == 10);
  for (const auto& s : e.sows) {
    CHECK(s.scenario == cfg.scenario);
    CHECK(s.rate_path.size() == static_cast<std::size_t>(s.lifetime) + 1);
    CHECK(s.gev == post.samples[s.posterior_row].params);
    CHECK(std::abs(s.damage_error) <= 0.3);
  }
  CHECK(scenario_name(cfg.scenario) == "HAZUS+BackgroundTrend");
  CHECK(all_scenarios().size() == 6);
}

TEST_CASE("deep switching covers the scenarios evenly") {
  const auto post = toy_posterior(2000);
  SowConfig cfg;
  cfg.n = 60000;
  cfg.seed = 9;
  const auto e = generate_sows(post, shipped_models(), cfg);
  std::map<std::string, int> counts;
  for (const auto& s : e.sows) ++counts[scenario_name(s.scenario)];
  REQUIRE(counts.size() == 6);
  for (const auto& [name, c] : counts) {
    INFO(name);
    CHECK(std::abs(c / 60000.0 - 1.0 / 6) < 0.01);
  }
}

TEST_CASE("ensembles are reproducible from the seed") {
  const auto post = toy_posterior(300);
  const auto models = shipped_models();
  SowConfig cfg;
  cfg.n = 400;
  cfg.seed = 11;
  const auto a = generate_sows(post, models, cfg);
  const auto b = generate_sows(post, models, cfg);
  CHECK(ensemble_csv(a) == ensemble_csv(b));
  CHECK(ensemble_manifest_json(a) == ensemble_manifest_json(b));
  bool paths_equal = true;
  for (std::size_t i = 0; i < a.size(); ++i) paths_equal = paths_equal && a.sows[i].rate_path == b.sows[i].rate_path;
  CHECK(paths_equal);
  cfg.seed = 12;
  CHECK(ensemble_csv(generate_sows(post, models, cfg)) != ensemble_csv(a));
  CHECK(nlohmann::json::parse(ensemble_manifest_json(a)).is_object());
}

TEST_CASE("sow lifetimes follow the rounded weibull distribution") {
  const auto post = toy_posterior(100);
  SowConfig cfg;
  cfg.n = 10000;
  cfg.seed = 13;
  const auto e = generate_sows(post, shipped_models(), cfg);
  std::vector<int> life;
  for (const auto& s : e.sows) life.push_back(s.lifetime);
  std::sort(life.begin(), life.end());
  // P(L <= k) = F(k + 0.5) for the nearest-integer rounding of a Weibull draw
  auto cdf = [](double x) { return 1 - std::exp(-std::pow(x / 73.5, 2.8)); };
  double d = 0;
  for (int k = 1; k <= life.back(); ++k) {
    const double emp = static_cast<double>(std::upper_bound(life.begin(), life.end(), k) - life.begin()) / life.size();
    d = std::max(d, std::abs(emp - cdf(k + 0.5)));
  }
  CHECK(d < 1.628 / std::sqrt(10000.0));
  CHECK(life.front() >= 1);
}

TEST_CASE("ensembles need the models they use") {
  const auto post = toy_posterior(100);
  SowConfig cfg;
  cfg.n = 5;
  CHECK_THROWS(generate_sows(post, {}, cfg));
  CHECK_THROWS(generate_sows(hazard::GevPosterior{}, shipped_models(), cfg));
}
