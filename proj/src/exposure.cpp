#include "heighten/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "heighten/io.hpp"

namespace heighten::exposure {

void validate(const House& h) {
  if (!(h.value > 0) || !std::isfinite(h.value)) throw std::invalid_argument("house value must be positive");
  if (!(h.size > 0) || !std::isfinite(h.size)) throw std::invalid_argument("house size must be positive");
  if (!std::isfinite(h.floor_rel_bfe)) throw std::invalid_argument("floor elevation must be finite");
}

std::string_view damage_model_name(DamageModel m) { return m == DamageModel::HAZUS ? "HAZUS" : "JRC"; }

DamageModel parse_damage_model(std::string_view name) {
  if (name == "HAZUS") return DamageModel::HAZUS;
  if (name == "JRC") return DamageModel::JRC;
  throw std::invalid_argument(fmt::format("unknown damage model '{}'", name));
}

DepthDamageCurve make_curve(DamageModel id, std::vector<double> depth, std::vector<double> fraction,
                            double error_halfwidth) {
  if (depth.size() != fraction.size() || depth.empty())
    throw std::invalid_argument("depth-damage table must have matching, non-empty columns");
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (fraction[i] < 0 || fraction[i] > 1) throw std::invalid_argument("damage fraction outside [0, 1]");
    if (i > 0 && !(depth[i] > depth[i - 1])) throw std::invalid_argument("depths must be strictly increasing");
    if (i > 0 && fraction[i] < fraction[i - 1]) throw std::invalid_argument("damage fractions must be non-decreasing");
  }
  if (!(error_halfwidth >= 0 && error_halfwidth < 1)) throw std::invalid_argument("error half-width must be in [0, 1)");
  return {id, std::move(depth), std::move(fraction), error_halfwidth, {}};
}

DepthDamageCurve parse_curve_csv(std::string_view text, DamageModel id, double error_halfwidth) {
  const auto t = io::parse_csv(text);
  const auto dc = t.column("depth_ft"), fc = t.column("fraction");
  std::vector<double> d, f;
  for (const auto& r : t.rows) {
    d.push_back(io::parse_double(r[dc]));
    f.push_back(io::parse_double(r[fc]));
  }
  return make_curve(id, std::move(d), std::move(f), error_halfwidth);
}

std::vector<DepthDamageCurve> load_damage_curves(const std::filesystem::path& manifest) {
  const auto j = nlohmann::json::parse(io::read_file(manifest));
  const double hw = j.value("error_halfwidth", 0.3);
  std::vector<DepthDamageCurve> out(2);
  std::vector<bool> seen(2, false);
  for (const auto& c : j.at("curves")) {
    const auto id = parse_damage_model(c.at("model_id").get<std::string>());
    auto curve = parse_curve_csv(io::read_file(manifest.parent_path() / c.at("file").get<std::string>()), id, hw);
    curve.source = c.value("source", "");
    out[static_cast<int>(id)] = std::move(curve);
    seen[static_cast<int>(id)] = true;
  }
  if (!seen[0] || !seen[1]) throw io::IoError("damage manifest must list both HAZUS and JRC curves");
  return out;
}

double damage_fraction(const DepthDamageCurve& c, double depth, double err) {
  const auto& d = c.depth_ft;
  double f;
  if (!(depth >= d.front())) {
    return 0.0;
  } else if (depth >= d.back()) {
    f = c.fraction.back();
  } else {
    const auto it = std::upper_bound(d.begin(), d.end(), depth);
    const std::size_t i = static_cast<std::size_t>(it - d.begin());
    const double w = (depth - d[i - 1]) / (d[i] - d[i - 1]);
    f = c.fraction[i - 1] + w * (c.fraction[i] - c.fraction[i - 1]);
  }
  return std::clamp(f * (1.0 + err), 0.0, 1.0);
}

double flood_damage(const DepthDamageCurve& c, const House& house, double level, double h, double err) {
  return damage_fraction(c, level - (house.floor_rel_bfe + h), err) * house.value;
}

ElevationCostModel parse_cost_model_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  ElevationCostModel m;
  m.fixed_fee = j.value("fixed_fee_usd", m.fixed_fee);
  m.min_height = j.value("min_height_ft", m.min_height);
  m.max_height = j.value("max_height_ft", m.max_height);
  const auto mode = j.value("mode", std::string("step"));
  if (mode == "step") m.mode = CostMode::Step;
  else if (mode == "interpolated") m.mode = CostMode::Interpolated;
  else throw std::invalid_argument(fmt::format("unknown cost mode '{}'", mode));
  if (j.contains("bands")) {
    m.bands.clear();
    for (const auto& b : j["bands"])
      m.bands.push_back({b.at("from_ft").get<double>(), b.at("to_ft").get<double>(),
                         b.at("rate_usd_per_sqft").get<double>()});
  }
  if (m.bands.empty()) throw std::invalid_argument("cost model needs at least one band");
  for (std::size_t i = 0; i < m.bands.size(); ++i) {
    if (!(m.bands[i].rate > 0)) throw std::invalid_argument("band rates must be positive");
    if (i > 0 && m.bands[i].rate < m.bands[i - 1].rate) throw std::invalid_argument("band rates must not decrease");
  }
  return m;
}

std::string cost_model_json(const ElevationCostModel& m) {
  nlohmann::ordered_json j;
  j["fixed_fee_usd"] = m.fixed_fee;
  j["min_height_ft"] = m.min_height;
  j["max_height_ft"] = m.max_height;
  j["mode"] = m.mode == CostMode::Step ? "step" : "interpolated";
  j["bands"] = nlohmann::ordered_json::array();
  for (const auto& b : m.bands)
    j["bands"].push_back({{"from_ft", b.from_ft}, {"to_ft", b.to_ft}, {"rate_usd_per_sqft", b.rate}});
  return j.dump(2) + "\n";
}

double unit_rate(const ElevationCostModel& m, double h) {
  const auto& b = m.bands;
  if (m.mode == CostMode::Step) {
    for (const auto& band : b)
      if (h <= band.to_ft) return band.rate;
    return b.back().rate;
  }
  auto mid = [&](std::size_t i) { return 0.5 * (b[i].from_ft + b[i].to_ft); };
  if (h <= mid(0)) return b.front().rate;
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (h <= mid(i)) {
      const double w = (h - mid(i - 1)) / (mid(i) - mid(i - 1));
      return b[i - 1].rate + w * (b[i].rate - b[i - 1].rate);
    }
  }
  return b.back().rate;
}

bool is_feasible_height(const ElevationCostModel& m, double h) {
  return h == 0.0 || (h >= m.min_height - 1e-9 && h <= m.max_height + 1e-9);
}

double elevation_cost(const ElevationCostModel& m, double size, double h) {
  if (h == 0.0) return 0.0;
  if (!is_feasible_height(m, h))
    throw std::domain_error(fmt::format("heightening {} ft outside {{0}} U [{}, {}]", h, m.min_height, m.max_height));
  return m.fixed_fee + unit_rate(m, h) * size;
}

int lifetime_from_uniform(const LifetimeDist& d, double u) {
  if (d.kind == LifetimeDist::Kind::Fixed) return d.fixed_years;
  const double x = d.scale * std::pow(-std::log1p(-u), 1.0 / d.shape);
  return std::max(1, static_cast<int>(std::lround(x)));
}

int sample_lifetime(const LifetimeDist& d, Rng& rng) { return lifetime_from_uniform(d, uniform01(rng)); }

}  // namespace heighten::exposure
