#include <doctest.h>

#include <cmath>
#include <random>

#include "heighten/exposure.hpp"
#include "heighten/io.hpp"
#include "support.hpp"

using namespace heighten;
using namespace heighten::exposure;

namespace {

std::vector<DepthDamageCurve> shipped_curves() {
  return load_damage_curves(support::data_dir() / "damage" / "manifest.json");
}

}  // namespace

TEST_CASE("shipped depth-damage tables") {
  const auto curves = shipped_curves();
  REQUIRE(curves.size() == 2);
  for (const auto& c : curves) {
    CHECK(c.depth_ft.front() == -2.0);
    CHECK(c.depth_ft.back() == 24.0);
    CHECK(c.error_halfwidth == 0.3);
    for (std::size_t i = 1; i < c.depth_ft.size(); ++i) {
      CHECK(c.depth_ft[i] - c.depth_ft[i - 1] == 1.0);
      CHECK(c.fraction[i] >= c.fraction[i - 1]);
    }
  }
  CHECK(curves[0].model_id == DamageModel::HAZUS);
  CHECK(curves[1].model_id == DamageModel::JRC);
}

TEST_CASE("damage fraction") {
  const auto curves = shipped_curves();
  const auto& hazus = curves[0];
  const auto& jrc = curves[1];
  SUBCASE("no water in the house") {
    for (double d : {-0.01, -1.0, -1.99, -5.0}) CHECK(damage_fraction(jrc, d, 0.0) == 0.0);
    CHECK(damage_fraction(hazus, -2.5, 0.3) == 0.0);
    CHECK(damage_fraction(hazus, -1e9, 0.0) == 0.0);
  }
  SUBCASE("knots are reproduced exactly") {
    for (std::size_t i = 0; i < hazus.depth_ft.size(); ++i)
      CHECK(damage_fraction(hazus, hazus.depth_ft[i], 0.0) == hazus.fraction[i]);
  }
  SUBCASE("linear between knots, flat beyond the last") {
    CHECK(damage_fraction(hazus, 1.5, 0.0) == doctest::Approx(0.5 * (hazus.fraction[3] + hazus.fraction[4])));
    CHECK(damage_fraction(hazus, 40.0, 0.0) == hazus.fraction.back());
  }
  SUBCASE("error band scales and clamps") {
    const auto c = make_curve(DamageModel::HAZUS, {0, 1, 2}, {0.0, 0.5, 0.9});
    CHECK(damage_fraction(c, 2.0, 0.3) == 1.0);
    CHECK(damage_fraction(c, 1.0, 0.3) == doctest::Approx(0.65));
    CHECK(damage_fraction(c, 1.0, -0.3) == doctest::Approx(0.35));
  }
  CHECK_THROWS_AS(make_curve(DamageModel::JRC, {0, 0}, {0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(make_curve(DamageModel::JRC, {0, 1}, {0.3, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(make_curve(DamageModel::JRC, {0, 1}, {0.3, 1.2}), std::invalid_argument);
}

TEST_CASE("damage fraction stays in the unit interval") {
  const auto curves = shipped_curves();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> depth(-30, 60), err(-0.3, 0.3);
  bool inside = true;
  for (int i = 0; i < 1000000; ++i) {
    const double f = damage_fraction(curves[i % 2], depth(rng), err(rng));
    inside = inside && f >= 0.0 && f <= 1.0;
  }
  CHECK(inside);
}

TEST_CASE("flood damage") {
  const auto curves = shipped_curves();
  const House house{300000, 1500, -4, "sample"};
  CHECK(flood_damage(curves[0], house, -7.0, 0.0, 0.0) == 0.0);
  CHECK(flood_damage(curves[1], house, 0.0, 5.0, 0.0) == 0.0);

  const auto half = make_curve(DamageModel::HAZUS, {0, 10}, {0.5, 0.5});
  CHECK(flood_damage(half, house, -2.0, 0.0, 0.0) == doctest::Approx(150000.0));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> level(-12, 20), floor(-10, 0), h(0, 14), err(-0.3, 0.3),
      value(1e4, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const House hs{value(rng), 1000, floor(rng), ""};
    const double w = level(rng), hh = h(rng), e = err(rng);
    const auto& c = curves[i % 2];
    CHECK(flood_damage(c, hs, w, hh, e) == doctest::Approx(damage_fraction(c, w - hs.floor_rel_bfe - hh, e) * hs.value));
  }
}

TEST_CASE("flood damage is non-increasing in elevation") {
  const auto curves = shipped_curves();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> level(-12, 30), err(-0.3, 0.3);
  const House house{250000, 2000, -6, ""};
  bool monotone = true;
  for (int i = 0; i < 2000; ++i) {
    const double w = level(rng), e = err(rng);
    double prev = INFINITY;
    for (double h = 0; h <= 14.0; h += 0.25) {
      const double d = flood_damage(curves[i % 2], house, w, h, e);
      monotone = monotone && d <= prev;
      prev = d;
    }
  }
  CHECK(monotone);
}

TEST_CASE("elevation cost") {
  const ElevationCostModel step;
  CHECK(elevation_cost(step, 1500, 0.0) == 0.0);
  CHECK(elevation_cost(step, 1500, 5.5) == doctest::Approx(144495.0));
  CHECK(std::abs(elevation_cost(step, 1500, 5.5) - 145000.0) <= 1000.0);
  CHECK(elevation_cost(step, 1500, 8.8) == doctest::Approx(150120.0));
  CHECK(std::abs(elevation_cost(step, 1500, 8.8) - 152000.0) <= 3000.0);
  CHECK(elevation_cost(step, 1500, 7.0) == doctest::Approx(20745 + 82.5 * 1500));
  CHECK(elevation_cost(step, 1500, 14.0) == doctest::Approx(20745 + 103.75 * 1500));
  CHECK_THROWS_AS(elevation_cost(step, 1500, 2.0), std::domain_error);
  CHECK_THROWS_AS(elevation_cost(step, 1500, 14.5), std::domain_error);
  CHECK_FALSE(is_feasible_height(step, 1.5));

  ElevationCostModel interp;
  interp.mode = CostMode::Interpolated;
  CHECK(unit_rate(interp, 3.0) == 82.5);
  CHECK(unit_rate(interp, 5.0) == 82.5);
  CHECK(unit_rate(interp, 8.5) == doctest::Approx(86.25));
  CHECK(unit_rate(interp, 6.75) == doctest::Approx(0.5 * (82.5 + 86.25)));
  CHECK(unit_rate(interp, 12.0) == doctest::Approx(103.75));
  CHECK(std::abs(elevation_cost(interp, 1500, 8.8) - 152000.0) <= 3000.0);
}

TEST_CASE("elevation cost is non-decreasing in height and size") {
  for (auto mode : {CostMode::Step, CostMode::Interpolated}) {
    ElevationCostModel m;
    m.mode = mode;
    bool monotone = true;
    for (double size = 100; size <= 5000; size += 350) {
      double prev = 0;
      for (double h = 3.0; h <= 14.0 + 1e-9; h += 0.05) {
        const double c = elevation_cost(m, size, h);
        monotone = monotone && c >= prev && elevation_cost(m, size + 10, h) >= c;
        prev = c;
      }
    }
    CHECK(monotone);
  }
}

TEST_CASE("cost model json round trip") {
  const auto m = parse_cost_model_json(io::read_file(support::data_dir() / "cost_model.json"));
  CHECK(m.fixed_fee == 20745.0);
  CHECK(m.mode == CostMode::Step);
  REQUIRE(m.bands.size() == 3);
  const auto back = parse_cost_model_json(cost_model_json(m));
  CHECK(back.bands[2].rate == 103.75);
  CHECK(back.min_height == 3.0);
  CHECK_THROWS_AS(parse_cost_model_json(R"({"bands": [{"from_ft": 3, "to_ft": 7, "rate_usd_per_sqft": 90},
      {"from_ft": 7, "to_ft": 14, "rate_usd_per_sqft": 80}]})"),
                  std::invalid_argument);
}

TEST_CASE("house validation") {
  CHECK_NOTHROW(validate(House{}));
  CHECK_THROWS_AS(validate(House{0, 1500, -4, ""}), std::invalid_argument);
  CHECK_THROWS_AS(validate(House{3e5, -1, -4, ""}), std::invalid_argument);
  CHECK_THROWS_AS(validate(House{NAN, 1500, -4, ""}), std::invalid_argument);
}

TEST_CASE("house lifetime") {
  Rng rng(7);
  const auto fixed = LifetimeDist::fixed(30);
  for (int i = 0; i < 100; ++i) CHECK(sample_lifetime(fixed, rng) == 30);

  const LifetimeDist weibull;
  const std::size_t n = 1000000;
  std::vector<double> draws(n);
  bool valid = true;
  for (auto& d : draws) {
    const int y = sample_lifetime(weibull, rng);
    valid = valid && y >= 1;
    d = y;
  }
  CHECK(valid);
  const double analytic = 73.5 * std::tgamma(1 + 1 / 2.8);
  CHECK(analytic == doctest::Approx(65.4).epsilon(0.002));
  CHECK(std::abs(io::mean(draws) - analytic) < 0.5);
  auto weibull_q = [](double q) { return 73.5 * std::pow(-std::log1p(-q), 1 / 2.8); };
  CHECK(std::abs(io::quantile(draws, 0.05) - weibull_q(0.05)) <= 1);
  CHECK(std::abs(io::quantile(draws, 0.95) - weibull_q(0.95)) <= 1);
  CHECK(lifetime_from_uniform(weibull, 0.0) == 1);
}
