#include "heighten/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "heighten/discount.hpp"
#include "heighten/io.hpp"
#include "heighten/parallel.hpp"

namespace heighten::objectives {

EadGrid make_ead_grid(double t_min, double t_max, std::size_t nodes) {
  if (!(t_min > 1.0) || !(t_max > t_min) || nodes < 2) throw std::invalid_argument("invalid EAD grid");
  EadGrid g;
  g.p.resize(nodes);
  g.weight.assign(nodes, 0.0);
  const double a = std::log(t_min), b = std::log(t_max);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double t = std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(nodes - 1));
    g.p[j] = 1.0 / t;
  }
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    const double half = 0.5 * (g.p[j] - g.p[j + 1]);
    g.weight[j] += half;
    g.weight[j + 1] += half;
  }
  return g;
}

double ead(const hazard::GevParams& gev, double bfe, const exposure::DepthDamageCurve& curve, double err,
           const exposure::House& house, double h, const EadGrid& grid) {
  double sum = 0;
  for (std::size_t j = 0; j < grid.p.size(); ++j) {
    const double level = hazard::gev_quantile(gev, 1.0 - grid.p[j]) - bfe;
    sum += grid.weight[j] * exposure::flood_damage(curve, house, level, h, err);
  }
  return sum;
}

double led(double ead_per_year, int lifetime, const std::vector<double>& factors) {
  return ead_per_year * discount::factor_sum(factors, lifetime);
}

double reliability(const hazard::GevParams& gev, double bfe, const exposure::House& house, double h, int lifetime) {
  const double c = hazard::gev_cdf(gev, bfe + house.floor_rel_bfe + h);
  return c <= 0 ? 0.0 : std::exp(static_cast<double>(lifetime) * std::log(c));
}

std::string mode_name(Mode m) { return m == Mode::IgnoringUncertainty ? "ignoring" : "considering"; }

ObjectiveInputs make_inputs(Mode mode, double bfe, std::vector<exposure::DepthDamageCurve> curves,
                            std::vector<SowInput> sows, EadGrid grid) {
  ObjectiveInputs in;
  in.mode = mode;
  in.bfe = bfe;
  in.curves = std::move(curves);
  in.grid = std::move(grid);
  in.sows = std::move(sows);
  if (in.sows.empty()) throw std::domain_error("objective inputs need at least one SOW");
  for (const auto& s : in.sows)
    if (s.curve < 0 || static_cast<std::size_t>(s.curve) >= in.curves.size())
      throw std::invalid_argument("SOW references a missing damage curve");
  const std::size_t m = in.grid.p.size();
  in.levels.resize(in.sows.size() * m);
  parallel_for(in.sows.size(), [&](std::size_t s) {
    for (std::size_t j = 0; j < m; ++j)
      in.levels[s * m + j] = hazard::gev_quantile(in.sows[s].gev, 1.0 - in.grid.p[j]) - bfe;
  });
  return in;
}

ObjectiveInputs ignoring_inputs(const hazard::GevParams& map, double bfe, std::vector<exposure::DepthDamageCurve> curves,
                                double rate, int lifetime, EadGrid grid) {
  const auto f = discount::discount_factors_fixed(rate, static_cast<std::size_t>(lifetime) + 1);
  SowInput s{map, static_cast<int>(exposure::DamageModel::HAZUS), 0.0, lifetime, discount::factor_sum(f, lifetime)};
  return make_inputs(Mode::IgnoringUncertainty, bfe, std::move(curves), {s}, std::move(grid));
}

ObjectiveInputs considering_inputs(const sow::SowEnsemble& e, double bfe, std::vector<exposure::DepthDamageCurve> curves,
                                   EadGrid grid) {
  std::vector<SowInput> sows(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& s = e.sows[i];
    const auto f = discount::discount_factors_stochastic(s.rate_path);
    sows[i] = {s.gev, static_cast<int>(s.scenario.damage), s.damage_error, s.lifetime,
               discount::factor_sum(f, s.lifetime)};
  }
  return make_inputs(Mode::ConsideringUncertainty, bfe, std::move(curves), std::move(sows), std::move(grid));
}

double ead_fraction(const ObjectiveInputs& in, std::size_t s, double z) {
  const auto& sw = in.sows[s];
  const auto& curve = in.curves[static_cast<std::size_t>(sw.curve)];
  const double* lv = in.levels_of(s);
  const std::size_t m = in.grid.p.size();
  // levels increase along the grid; skip nodes below the first knot
  const double first = curve.depth_ft.front() + z;
  const std::size_t j0 = static_cast<std::size_t>(std::lower_bound(lv, lv + m, first) - lv);
  double sum = 0;
  for (std::size_t j = j0; j < m; ++j)
    sum += in.grid.weight[j] * exposure::damage_fraction(curve, lv[j] - z, sw.error);
  return sum;
}

double sow_reliability(const ObjectiveInputs& in, std::size_t s, double z) {
  const auto& sw = in.sows[s];
  const double c = hazard::gev_cdf(sw.gev, in.bfe + z);
  return c <= 0 ? 0.0 : std::exp(static_cast<double>(sw.lifetime) * std::log(c));
}

std::vector<double> height_grid(const exposure::ElevationCostModel& cost, double step) {
  std::vector<double> hs{0.0};
  const long steps = std::lround((cost.max_height - cost.min_height) / step);
  for (long i = 0; i <= steps; ++i) hs.push_back(std::round((cost.min_height + step * static_cast<double>(i)) * 1e6) / 1e6);
  return hs;
}

Summary summarize(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0, 0};
  return {io::mean(v), io::quantile(v, 0.05), io::quantile(v, 0.95)};
}

std::size_t ObjectiveSurface::index_of(double h) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < policies.size(); ++i)
    if (std::abs(policies[i].h - h) < std::abs(policies[best].h - h)) best = i;
  return best;
}

std::vector<double> led_vector(const ObjectiveInputs& in, const exposure::House& house, double h) {
  std::vector<double> out(in.size());
  const double z = house.floor_rel_bfe + h;
  parallel_for(in.size(), [&](std::size_t s) {
    out[s] = house.value * ead_fraction(in, s, z) * in.sows[s].discount_sum;
  });
  return out;
}

PolicyResult evaluate_policy(const ObjectiveInputs& in, const exposure::House& house,
                             const exposure::ElevationCostModel& cost, double h, const std::vector<double>& led0) {
  PolicyResult r;
  r.h = h;
  r.upfront = exposure::elevation_cost(cost, house, h);
  r.led = h == 0.0 ? led0 : led_vector(in, house, h);
  const double z = house.floor_rel_bfe + h;
  r.rel.resize(in.size());
  std::vector<double> total(in.size());
  for (std::size_t s = 0; s < in.size(); ++s) {
    r.rel[s] = sow_reliability(in, s, z);
    total[s] = r.upfront + r.led[s];
  }
  if (h > 0) {
    r.bcr.resize(in.size());
    for (std::size_t s = 0; s < in.size(); ++s) r.bcr[s] = (led0[s] - r.led[s]) / r.upfront;
    r.bcr_mean = io::mean(r.bcr);
  } else {
    r.bcr_mean = std::numeric_limits<double>::quiet_NaN();
  }
  r.led_mean = io::mean(r.led);
  r.total = summarize(total);
  r.rel_mean = io::mean(r.rel);
  return r;
}

ObjectiveSurface evaluate_surface(const ObjectiveInputs& in, const exposure::House& house,
                                  const exposure::ElevationCostModel& cost, const std::vector<double>& hs) {
  exposure::validate(house);
  ObjectiveSurface s;
  s.mode = in.mode;
  s.house = house;
  s.led0 = led_vector(in, house, 0.0);
  s.policies.reserve(hs.size());
  for (double h : hs) s.policies.push_back(evaluate_policy(in, house, cost, h, s.led0));
  return s;
}

std::size_t argmin_total(const ObjectiveSurface& s) {
  if (s.policies.empty()) throw std::domain_error("empty surface");
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.policies.size(); ++i) {
    const auto& p = s.policies[i];
    const auto& b = s.policies[best];
    if (p.total.mean < b.total.mean || (p.total.mean == b.total.mean && p.h < b.h)) best = i;
  }
  return best;
}

Optimum optimize_height(const ObjectiveInputs& in, const exposure::House& house,
                        const exposure::ElevationCostModel& cost, const std::vector<double>& hs) {
  Optimum o;
  o.surface = evaluate_surface(in, house, cost, hs);
  o.index = argmin_total(o.surface);
  o.h = o.surface.policies[o.index].h;
  o.expected_total = o.surface.policies[o.index].total.mean;
  return o;
}

FemaPolicy fema_recommendation(const exposure::House& house, double freeboard, double min_height) {
  const double h = std::round((-house.floor_rel_bfe + freeboard) * 1e9) / 1e9;
  return {h, h >= min_height};
}

std::string surface_csv(const ObjectiveSurface& s) {
  const double v = s.house.value;
  std::string out =
      "h,upfront_usd,o1_upfront_ratio,o2_mean_usd,o2_mean_ratio,o2_q05_ratio,o2_q95_ratio,led_mean_ratio,o3_bcr_mean,"
      "o4_reliability_mean\n";
  for (const auto& p : s.policies)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", io::fmt_double(p.h), io::fmt_double(p.upfront),
                       io::fmt_double(p.upfront / v), io::fmt_double(p.total.mean), io::fmt_double(p.total.mean / v),
                       io::fmt_double(p.total.q05 / v), io::fmt_double(p.total.q95 / v),
                       io::fmt_double(p.led_mean / v), io::fmt_double(p.bcr_mean), io::fmt_double(p.rel_mean));
  return out;
}

namespace {
double interp(const std::vector<double>& t, double z0, double dz, double z) {
  const double x = (z - z0) / dz;
  if (x <= 0) return t.front();
  const std::size_t i = static_cast<std::size_t>(x);
  if (i + 1 >= t.size()) return t.back();
  const double w = x - static_cast<double>(i);
  return t[i] + w * (t[i + 1] - t[i]);
}
}  // namespace

double ExpectationTable::led_at(double z) const { return interp(led_fraction, z0, dz, z); }
double ExpectationTable::reliability_at(double z) const { return interp(reliability, z0, dz, z); }

ExpectationTable tabulate(const ObjectiveInputs& in, double z_min, double z_max, double dz) {
  if (!(z_max > z_min) || !(dz > 0)) throw std::invalid_argument("tabulate: invalid range");
  ExpectationTable t;
  t.z0 = z_min;
  t.dz = dz;
  const std::size_t nz = static_cast<std::size_t>(std::ceil((z_max - z_min) / dz)) + 1;
  t.led_fraction.resize(nz);
  t.reliability.resize(nz);
  std::vector<double> buf_l(in.size()), buf_r(in.size());
  for (std::size_t k = 0; k < nz; ++k) {
    const double z = z_min + dz * static_cast<double>(k);
    parallel_for(in.size(), [&](std::size_t s) {
      buf_l[s] = ead_fraction(in, s, z) * in.sows[s].discount_sum;
      buf_r[s] = sow_reliability(in, s, z);
    });
    t.led_fraction[k] = io::mean(buf_l);
    t.reliability[k] = io::mean(buf_r);
  }
  return t;
}

}  // namespace heighten::objectives
