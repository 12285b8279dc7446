#include "heighten/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "heighten/io.hpp"
#include "heighten/version.hpp"

namespace heighten::pipeline {

using ojson = nlohmann::ordered_json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <class T>
T get_or(const nlohmann::json& j, const char* section, const char* key, T fallback) {
  if (!j.contains(section) || !j[section].contains(key)) return fallback;
  try {
    return j[section][key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config {}.{}: {}", section, key, e.what()));
  }
}

sow::Scenario parse_scenario(const std::string& s) {
  const auto plus = s.find('+');
  if (plus == std::string::npos) throw ConfigError(fmt::format("scenario '{}' must look like HAZUS+BackgroundTrend", s));
  try {
    return {exposure::parse_damage_model(s.substr(0, plus)), discount::parse_kind(s.substr(plus + 1))};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  const auto paths = j.value("paths", nlohmann::json::object());
  auto path_of = [&](const char* key) {
    if (!paths.contains(key)) throw ConfigError(fmt::format("config paths.{} is required", key));
    auto p = resolve(base, paths[key].get<std::string>());
    if (!fs::exists(p)) throw ConfigError(fmt::format("config paths.{}: file not found: {}", key, p.string()));
    return p;
  };
  c.gage_rdb = path_of("gage_rdb");
  c.rating_curve = path_of("rating_curve");
  c.discount_series = path_of("discount_series");
  c.damage_manifest = path_of("damage_manifest");
  c.cost_model = path_of("cost_model");
  c.output_dir = resolve(base, j.value("output_dir", std::string("out")));

  c.mcmc_seed = get_or<std::uint64_t>(j, "seeds", "mcmc", c.mcmc_seed);
  c.sow_seed = get_or<std::uint64_t>(j, "seeds", "sow", c.sow_seed);
  c.sweep_seed = get_or<std::uint64_t>(j, "seeds", "houses", c.sweep_seed);
  c.sensitivity_seed = get_or<std::uint64_t>(j, "seeds", "sensitivity", c.sensitivity_seed);

  c.min_coverage = get_or(j, "hydro", "min_coverage", c.min_coverage);
  const auto yc = get_or<std::string>(j, "hydro", "year_convention", "calendar");
  if (yc == "calendar") c.year_convention = hydro::YearConvention::Calendar;
  else if (yc == "water") c.year_convention = hydro::YearConvention::Water;
  else throw ConfigError(fmt::format("hydro.year_convention must be calendar or water, got '{}'", yc));
  const auto ri = get_or<std::string>(j, "hydro", "rating_interpolation", "linear");
  if (ri == "linear") c.rating_interpolation = hydro::RatingInterpolation::Linear;
  else if (ri == "loglog") c.rating_interpolation = hydro::RatingInterpolation::LogLog;
  else throw ConfigError(fmt::format("hydro.rating_interpolation must be linear or loglog, got '{}'", ri));

  c.priors.mu_sd = get_or(j, "hazard", "prior_sd_mu", c.priors.mu_sd);
  c.priors.sigma_sd = get_or(j, "hazard", "prior_sd_sigma", c.priors.sigma_sd);
  c.priors.xi_sd = get_or(j, "hazard", "prior_sd_xi", c.priors.xi_sd);
  c.mcmc.n_samples = get_or(j, "hazard", "n_samples", c.mcmc.n_samples);
  c.mcmc.burn_in = get_or(j, "hazard", "burn_in", c.mcmc.burn_in);
  const auto init = get_or(j, "hazard", "init", std::vector<double>{5.0, 1.0, 0.1});
  if (init.size() != 3) throw ConfigError("hazard.init needs three values");
  c.mcmc.init = {init[0], init[1], init[2]};
  c.mcmc.seed = c.mcmc_seed;

  c.smoothing_window = get_or(j, "discount", "smoothing_window", c.smoothing_window);
  const auto fc = get_or<std::string>(j, "discount", "factor_convention", "discount_first_year");
  if (fc == "discount_first_year") c.factor_convention = discount::FactorConvention::DiscountFirstYear;
  else if (fc == "undiscounted_first_year") c.factor_convention = discount::FactorConvention::UndiscountedFirstYear;
  else throw ConfigError(fmt::format("discount.factor_convention '{}' unknown", fc));

  c.ensemble_size = get_or(j, "ensemble", "size", c.ensemble_size);
  const auto mode = get_or<std::string>(j, "ensemble", "mode", "deep");
  if (mode == "deep") c.ensemble_mode = sow::EnsembleMode::DeepSwitching;
  else if (mode == "fixed") c.ensemble_mode = sow::EnsembleMode::FixedScenario;
  else throw ConfigError(fmt::format("ensemble.mode must be deep or fixed, got '{}'", mode));
  c.scenario = parse_scenario(get_or<std::string>(j, "ensemble", "scenario", "HAZUS+BackgroundTrend"));
  c.damage_weights = get_or(j, "ensemble", "damage_weights", c.damage_weights);
  c.discount_weights = get_or(j, "ensemble", "discount_weights", c.discount_weights);
  c.lifetime.shape = get_or(j, "ensemble", "lifetime_shape", c.lifetime.shape);
  c.lifetime.scale = get_or(j, "ensemble", "lifetime_scale", c.lifetime.scale);
  if (!(c.lifetime.shape > 0 && c.lifetime.scale > 0)) throw ConfigError("lifetime shape and scale must be positive");

  c.ignoring_rate = get_or(j, "ignoring", "rate", c.ignoring_rate);
  c.ignoring_lifetime = get_or(j, "ignoring", "lifetime", c.ignoring_lifetime);

  c.t_min = get_or(j, "objectives", "t_min", c.t_min);
  c.t_max = get_or(j, "objectives", "t_max", c.t_max);
  c.ead_nodes = get_or(j, "objectives", "nodes", c.ead_nodes);
  c.h_step = get_or(j, "objectives", "h_step", c.h_step);
  c.freeboard = get_or(j, "objectives", "freeboard", c.freeboard);
  if (j.contains("objectives") && j["objectives"].contains("cost_mode")) {
    const auto cm = j["objectives"]["cost_mode"].get<std::string>();
    if (cm == "step") c.cost_mode = exposure::CostMode::Step;
    else if (cm == "interpolated") c.cost_mode = exposure::CostMode::Interpolated;
    else throw ConfigError(fmt::format("objectives.cost_mode must be step or interpolated, got '{}'", cm));
  }

  c.ranges.bcr_min = get_or(j, "robustness", "bcr_min", c.ranges.bcr_min);
  c.ranges.total_cost_ratio_max = get_or(j, "robustness", "total_cost_ratio_max", c.ranges.total_cost_ratio_max);
  c.ranges.reliability_min = get_or(j, "robustness", "reliability_min", c.ranges.reliability_min);
  c.ranges.bcr_fails_at_zero = get_or(j, "robustness", "bcr_fails_at_zero", c.ranges.bcr_fails_at_zero);

  c.house.value = get_or(j, "house", "value", c.house.value);
  c.house.size = get_or(j, "house", "size", c.house.size);
  c.house.floor_rel_bfe = get_or(j, "house", "floor_rel_bfe", c.house.floor_rel_bfe);
  c.house.label = get_or<std::string>(j, "house", "label", "sample");
  try {
    exposure::validate(c.house);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("config house: {}", e.what()));
  }

  c.pool.count = get_or(j, "sweep", "houses", c.pool.count);
  c.sweep_ensemble_size = get_or(j, "sweep", "ensemble_size", c.sweep_ensemble_size);
  c.sweep_dz = get_or(j, "sweep", "dz", c.sweep_dz);
  c.pool.value_min = get_or(j, "sweep", "value_min", c.pool.value_min);
  c.pool.value_max = get_or(j, "sweep", "value_max", c.pool.value_max);
  c.pool.size_min = get_or(j, "sweep", "size_min", c.pool.size_min);
  c.pool.size_max = get_or(j, "sweep", "size_max", c.pool.size_max);
  c.pool.floor_min = get_or(j, "sweep", "floor_min", c.pool.floor_min);
  c.pool.floor_max = get_or(j, "sweep", "floor_max", c.pool.floor_max);

  c.sensitivity_n = get_or(j, "sensitivity", "n", c.sensitivity_n);
  c.bootstrap = get_or(j, "sensitivity", "bootstrap", c.bootstrap);
  const auto sm = get_or<std::string>(j, "sensitivity", "sampler", "lhs");
  if (sm == "lhs") c.sampler = sensitivity::Sampler::LatinHypercube;
  else if (sm == "random") c.sampler = sensitivity::Sampler::PseudoRandom;
  else throw ConfigError(fmt::format("sensitivity.sampler must be lhs or random, got '{}'", sm));
  c.bank_size = get_or(j, "sensitivity", "bank_size", c.bank_size);
  c.bank_horizon = get_or(j, "sensitivity", "bank_horizon", c.bank_horizon);
  c.rate_min = get_or(j, "sensitivity", "rate_min", c.rate_min);
  c.rate_max = get_or(j, "sensitivity", "rate_max", c.rate_max);

  c.api_port = get_or(j, "api", "port", c.api_port);
  c.api_default_ensemble = get_or(j, "api", "default_ensemble", c.api_default_ensemble);
  c.api_max_ensemble = get_or(j, "api", "max_ensemble", c.api_max_ensemble);

  if (c.ensemble_size == 0 || c.sweep_ensemble_size == 0 || c.api_default_ensemble == 0)
    throw ConfigError("ensemble sizes must be positive");
  c.raw = config_json(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

ojson config_json(const RunConfig& c) {
  auto kind = [](hydro::YearConvention y) { return y == hydro::YearConvention::Calendar ? "calendar" : "water"; };
  ojson j;
  j["paths"] = {{"gage_rdb", c.gage_rdb.string()},
                {"rating_curve", c.rating_curve.string()},
                {"discount_series", c.discount_series.string()},
                {"damage_manifest", c.damage_manifest.string()},
                {"cost_model", c.cost_model.string()}};
  j["output_dir"] = c.output_dir.string();
  j["seeds"] = {{"mcmc", c.mcmc_seed}, {"sow", c.sow_seed}, {"houses", c.sweep_seed}, {"sensitivity", c.sensitivity_seed}};
  j["hydro"] = {{"min_coverage", c.min_coverage},
                {"year_convention", kind(c.year_convention)},
                {"rating_interpolation", c.rating_interpolation == hydro::RatingInterpolation::Linear ? "linear" : "loglog"}};
  j["hazard"] = {{"prior_sd_mu", c.priors.mu_sd},   {"prior_sd_sigma", c.priors.sigma_sd},
                 {"prior_sd_xi", c.priors.xi_sd},   {"n_samples", c.mcmc.n_samples},
                 {"burn_in", c.mcmc.burn_in},       {"init", {c.mcmc.init.mu, c.mcmc.init.sigma, c.mcmc.init.xi}},
                 {"adapt_start", c.mcmc.adapt_start}, {"adapt_interval", c.mcmc.adapt_interval}};
  j["discount"] = {{"smoothing_window", c.smoothing_window},
                   {"factor_convention", c.factor_convention == discount::FactorConvention::DiscountFirstYear
                                             ? "discount_first_year"
                                             : "undiscounted_first_year"}};
  j["ensemble"] = {{"size", c.ensemble_size},
                   {"mode", c.ensemble_mode == sow::EnsembleMode::DeepSwitching ? "deep" : "fixed"},
                   {"scenario", sow::scenario_name(c.scenario)},
                   {"damage_weights", c.damage_weights},
                   {"discount_weights", c.discount_weights},
                   {"lifetime_shape", c.lifetime.shape},
                   {"lifetime_scale", c.lifetime.scale}};
  j["ignoring"] = {{"rate", c.ignoring_rate}, {"lifetime", c.ignoring_lifetime}};
  j["objectives"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"nodes", c.ead_nodes}, {"h_step", c.h_step},
                     {"freeboard", c.freeboard}};
  if (c.cost_mode) j["objectives"]["cost_mode"] = *c.cost_mode == exposure::CostMode::Step ? "step" : "interpolated";
  j["robustness"] = {{"bcr_min", c.ranges.bcr_min},
                     {"total_cost_ratio_max", c.ranges.total_cost_ratio_max},
                     {"reliability_min", c.ranges.reliability_min},
                     {"bcr_fails_at_zero", c.ranges.bcr_fails_at_zero}};
  j["house"] = {{"value", c.house.value}, {"size", c.house.size}, {"floor_rel_bfe", c.house.floor_rel_bfe},
                {"label", c.house.label}};
  j["sweep"] = {{"houses", c.pool.count},         {"ensemble_size", c.sweep_ensemble_size},
                {"dz", c.sweep_dz},               {"value_min", c.pool.value_min},
                {"value_max", c.pool.value_max},  {"size_min", c.pool.size_min},
                {"size_max", c.pool.size_max},    {"floor_min", c.pool.floor_min},
                {"floor_max", c.pool.floor_max}};
  j["sensitivity"] = {{"n", c.sensitivity_n},
                      {"bootstrap", c.bootstrap},
                      {"sampler", c.sampler == sensitivity::Sampler::LatinHypercube ? "lhs" : "random"},
                      {"bank_size", c.bank_size},
                      {"bank_horizon", c.bank_horizon},
                      {"rate_min", c.rate_min},
                      {"rate_max", c.rate_max}};
  j["api"] = {{"port", c.api_port}, {"default_ensemble", c.api_default_ensemble}, {"max_ensemble", c.api_max_ensemble}};
  return j;
}

std::string config_hash(const RunConfig& c) { return io::content_hash(config_json(c).dump()); }

objectives::EadGrid ead_grid(const RunConfig& c) { return objectives::make_ead_grid(c.t_min, c.t_max, c.ead_nodes); }

exposure::ElevationCostModel load_cost_model(const RunConfig& c) {
  auto m = exposure::parse_cost_model_json(io::read_file(c.cost_model));
  if (c.cost_mode) m.mode = *c.cost_mode;
  return m;
}

std::vector<exposure::House> house_pool(const HousePoolSpec& spec, std::uint64_t seed) {
  auto rng = derive_rng(seed, 0x9001);
  const auto u = sow::lhs_sample(3, spec.count, rng);
  std::vector<exposure::House> pool(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i)
    pool[i] = {spec.value_min + u(i, 0) * (spec.value_max - spec.value_min),
               spec.size_min + u(i, 1) * (spec.size_max - spec.size_min),
               spec.floor_min + u(i, 2) * (spec.floor_max - spec.floor_min), fmt::format("house_{:04}", i)};
  return pool;
}

AnalysisOptions default_options(const RunConfig& c) {
  AnalysisOptions o;
  o.ensemble_size = c.ensemble_size;
  o.seed = c.sow_seed;
  o.ensemble_mode = c.ensemble_mode;
  o.scenario = c.scenario;
  o.ranges = c.ranges;
  return o;
}

namespace {

sow::SowConfig sow_config(const RunConfig& c, std::size_t n, std::uint64_t seed, sow::EnsembleMode mode,
                          const sow::Scenario& sc) {
  sow::SowConfig s;
  s.n = n;
  s.seed = seed;
  s.mode = mode;
  s.scenario = sc;
  s.damage_weights = c.damage_weights;
  s.discount_weights = c.discount_weights;
  s.lifetime = c.lifetime;
  return s;
}

objectives::ObjectiveInputs considering(const Artifacts& a, const sow::SowEnsemble& e) {
  if (a.config.factor_convention == discount::FactorConvention::DiscountFirstYear)
    return objectives::considering_inputs(e, a.bfe, a.curves, ead_grid(a.config));
  std::vector<objectives::SowInput> sows(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& s = e.sows[i];
    const auto f = discount::discount_factors_stochastic(s.rate_path, a.config.factor_convention);
    sows[i] = {s.gev, static_cast<int>(s.scenario.damage), s.damage_error, s.lifetime,
               discount::factor_sum(f, s.lifetime)};
  }
  return objectives::make_inputs(objectives::Mode::ConsideringUncertainty, a.bfe, a.curves, std::move(sows),
                                 ead_grid(a.config));
}

objectives::ObjectiveInputs ignoring(const Artifacts& a) {
  const auto& c = a.config;
  const auto f = discount::discount_factors_fixed(c.ignoring_rate, static_cast<std::size_t>(c.ignoring_lifetime) + 1,
                                                  c.factor_convention);
  objectives::SowInput s{a.map, static_cast<int>(exposure::DamageModel::HAZUS), 0.0, c.ignoring_lifetime,
                         discount::factor_sum(f, c.ignoring_lifetime)};
  return objectives::make_inputs(objectives::Mode::IgnoringUncertainty, a.bfe, a.curves, {s}, ead_grid(c));
}

double clamp_height(const exposure::ElevationCostModel& cost, double h) {
  return std::clamp(h, cost.min_height, cost.max_height);
}

}  // namespace

HouseAnalysis analyze_house(const Artifacts& a, const exposure::House& house, const AnalysisOptions& opt) {
  exposure::validate(house);
  robustness::validate(opt.ranges);
  HouseAnalysis an;
  an.house = house;
  an.options = opt;
  const auto ens = sow::generate_sows(a.posterior, a.models,
                                      sow_config(a.config, opt.ensemble_size, opt.seed, opt.ensemble_mode, opt.scenario));
  const auto in_c = considering(a, ens);
  const auto hs = objectives::height_grid(a.cost, a.config.h_step);
  an.considering = objectives::evaluate_surface(in_c, house, a.cost, hs);
  an.opt_index = objectives::argmin_total(an.considering);
  an.robustness = robustness::robustness_curves(an.considering, opt.ranges);
  an.tradeoff = robustness::tradeoff_table(an.considering, an.robustness);

  std::optional<objectives::ObjectiveInputs> in_i;
  if (opt.with_ignoring) {
    in_i = ignoring(a);
    an.ignoring = objectives::evaluate_surface(*in_i, house, a.cost, hs);
    an.ignoring_opt_index = objectives::argmin_total(*an.ignoring);
  }

  an.fema = objectives::fema_recommendation(house, a.config.freeboard, a.cost.min_height);
  struct Pick {
    const char* name;
    double h;
    bool feasible;
  };
  std::vector<Pick> picks{{"do_nothing", 0.0, true},
                          {"fema", clamp_height(a.cost, an.fema.h), an.fema.feasible && an.fema.h <= a.cost.max_height}};
  if (an.ignoring_opt_index) picks.push_back({"optimal_ignoring", an.ignoring->policies[*an.ignoring_opt_index].h, true});
  picks.push_back({"optimal_considering", an.considering.policies[an.opt_index].h, true});

  objectives::ObjectiveSurface strat;
  strat.mode = an.considering.mode;
  strat.house = house;
  strat.led0 = an.considering.led0;
  for (const auto& p : picks) strat.policies.push_back(objectives::evaluate_policy(in_c, house, a.cost, p.h, strat.led0));
  for (std::size_t i = 0; i < picks.size(); ++i) {
    Strategy s;
    s.name = picks[i].name;
    s.h = picks[i].h;
    s.feasible = picks[i].feasible;
    s.result = strat.policies[i];
    s.robustness = robustness::domain_measure(strat, opt.ranges, i);
    if (in_i) {
      const auto led0_i = objectives::led_vector(*in_i, house, 0.0);
      s.ignoring_total = objectives::evaluate_policy(*in_i, house, a.cost, s.h, led0_i).total.mean;
    } else {
      s.ignoring_total = std::numeric_limits<double>::quiet_NaN();
    }
    an.strategies.push_back(std::move(s));
  }
  return an;
}

namespace {

double half_width(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = io::mean(v);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
  const double var = io::mean(d) * static_cast<double>(v.size()) / static_cast<double>(v.size() - 1);
  return 1.96 * std::sqrt(var / static_cast<double>(v.size()));
}

ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

ojson strategies_json(const HouseAnalysis& an) {
  const double v = an.house.value;
  ojson arr = ojson::array();
  for (const auto& s : an.strategies) {
    const auto& r = s.result;
    arr.push_back({{"name", s.name},
                   {"h", s.h},
                   {"feasible", s.feasible},
                   {"upfront_usd", r.upfront},
                   {"upfront_ratio", r.upfront / v},
                   {"expected_total_usd", r.total.mean},
                   {"expected_total_ratio", r.total.mean / v},
                   {"total_ratio_q05", r.total.q05 / v},
                   {"total_ratio_q95", r.total.q95 / v},
                   {"expected_damages_usd", r.led_mean},
                   {"bcr", num(r.bcr_mean)},
                   {"reliability", r.rel_mean},
                   {"robustness",
                    {{"bcr", s.robustness.bcr},
                     {"total_cost", s.robustness.total_cost},
                     {"reliability", s.robustness.reliability},
                     {"joint", s.robustness.joint}}},
                   {"ignoring_total_usd", num(s.ignoring_total)},
                   {"ignoring_total_ratio", num(s.ignoring_total / v)}});
  }
  return arr;
}

std::string strategies_csv(const HouseAnalysis& an) {
  const double v = an.house.value;
  std::string out =
      "strategy,h,feasible,upfront_usd,upfront_ratio,expected_total_usd,expected_total_ratio,total_ratio_q05,"
      "total_ratio_q95,bcr,reliability,joint_robustness,ignoring_total_ratio\n";
  for (const auto& s : an.strategies) {
    const auto& r = s.result;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.name, io::fmt_double(s.h), s.feasible ? 1 : 0,
                       io::fmt_double(r.upfront), io::fmt_double(r.upfront / v), io::fmt_double(r.total.mean),
                       io::fmt_double(r.total.mean / v), io::fmt_double(r.total.q05 / v),
                       io::fmt_double(r.total.q95 / v), io::fmt_double(r.bcr_mean), io::fmt_double(r.rel_mean),
                       io::fmt_double(s.robustness.joint), io::fmt_double(s.ignoring_total / v));
  }
  return out;
}

ojson analysis_json(const HouseAnalysis& an) {
  const auto& sc = an.considering;
  const double v = an.house.value;
  ojson j;
  j["house"] = {{"value", an.house.value}, {"size", an.house.size}, {"floor_rel_bfe", an.house.floor_rel_bfe},
                {"label", an.house.label}};
  j["ensemble"] = {{"size", an.options.ensemble_size},
                   {"seed", an.options.seed},
                   {"mode", an.options.ensemble_mode == sow::EnsembleMode::DeepSwitching
                                ? "deep"
                                : sow::scenario_name(an.options.scenario)}};
  ojson grid = ojson::array();
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const auto& p = sc.policies[i];
    const auto& r = an.robustness[i];
    ojson row = {{"h", p.h},
                 {"upfront_usd", p.upfront},
                 {"upfront_ratio", p.upfront / v},
                 {"total_mean_ratio", p.total.mean / v},
                 {"total_q05_ratio", p.total.q05 / v},
                 {"total_q95_ratio", p.total.q95 / v},
                 {"total_halfwidth_ratio", half_width(p.led) / v},
                 {"damages_mean_ratio", p.led_mean / v},
                 {"bcr_mean", num(p.bcr_mean)},
                 {"reliability_mean", p.rel_mean},
                 {"passes_cb_test", an.tradeoff[i].passes_cb_test},
                 {"on_front", an.tradeoff[i].on_front},
                 {"robustness",
                  {{"bcr", r.bcr}, {"total_cost", r.total_cost}, {"reliability", r.reliability}, {"joint", r.joint}}}};
    if (an.ignoring) {
      const auto& q = an.ignoring->policies[i];
      row["ignoring_total_ratio"] = q.total.mean / v;
      row["ignoring_reliability"] = q.rel_mean;
    }
    grid.push_back(std::move(row));
  }
  j["grid"] = std::move(grid);
  const auto& o = sc.policies[an.opt_index];
  j["optimal_considering"] = {{"h", o.h}, {"expected_total_ratio", o.total.mean / v}, {"bcr", num(o.bcr_mean)}};
  if (an.ignoring_opt_index)
    j["optimal_ignoring"] = {{"h", an.ignoring->policies[*an.ignoring_opt_index].h},
                             {"total_ratio", an.ignoring->policies[*an.ignoring_opt_index].total.mean / v}};
  j["fema"] = {{"h", an.fema.h}, {"feasible", an.fema.feasible}};
  j["strategies"] = strategies_json(an);
  ojson front = ojson::array();
  for (const auto& t : an.tradeoff)
    if (t.on_front)
      front.push_back({{"h", t.h}, {"upfront_usd", t.upfront}, {"reliability", t.reliability},
                       {"passes_cb_test", t.passes_cb_test}});
  j["pareto_front"] = std::move(front);
  return j;
}

SweepSummary summarize_sweep(const std::vector<SweepRow>& rows) {
  SweepSummary s;
  s.houses = rows.size();
  if (rows.empty()) return s;
  std::size_t above = 0, zero = 0, fema = 0, nonzero = 0, nonzero_pass = 0, zero_i = 0;
  for (const auto& r : rows) {
    above += r.above_fema;
    zero += r.h_opt == 0.0;
    fema += r.fema_passes_cb;
    zero_i += r.h_opt_ignoring == 0.0;
    if (r.h_opt > 0) {
      ++nonzero;
      nonzero_pass += r.opt_passes_cb;
    }
  }
  const double n = static_cast<double>(rows.size());
  s.share_above_fema = above / n;
  s.share_zero_optimal = zero / n;
  s.share_fema_passes_cb = fema / n;
  s.share_nonzero_opt_passing_cb = nonzero ? static_cast<double>(nonzero_pass) / static_cast<double>(nonzero) : 1.0;
  s.share_zero_optimal_ignoring = zero_i / n;
  return s;
}

SweepResult sweep_houses(const Artifacts& a, const std::vector<exposure::House>& pool) {
  const auto& c = a.config;
  const auto ens = sow::generate_sows(
      a.posterior, a.models, sow_config(c, c.sweep_ensemble_size, c.sow_seed, c.ensemble_mode, c.scenario));
  const auto in_c = considering(a, ens);
  const auto in_i = ignoring(a);
  const auto hs = objectives::height_grid(a.cost, c.h_step);
  double zmin = 0, zmax = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    zmin = i == 0 ? pool[i].floor_rel_bfe : std::min(zmin, pool[i].floor_rel_bfe);
    zmax = i == 0 ? pool[i].floor_rel_bfe : std::max(zmax, pool[i].floor_rel_bfe);
  }
  const auto table = objectives::tabulate(in_c, zmin - c.sweep_dz, zmax + a.cost.max_height + c.sweep_dz, c.sweep_dz);

  SweepResult res;
  res.rows.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& house = pool[i];
    exposure::validate(house);
    auto& row = res.rows[i];
    row.id = i;
    row.house = house;
    const double l0 = table.led_at(house.floor_rel_bfe);
    double best = 0, best_i = 0, best_total = 0, best_total_i = 0;
    const double l0_i = objectives::ead_fraction(in_i, 0, house.floor_rel_bfe) * in_i.sows[0].discount_sum;
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const double h = hs[k];
      const double cost = exposure::elevation_cost(a.cost, house, h);
      const double total = cost + house.value * (h == 0 ? l0 : table.led_at(house.floor_rel_bfe + h));
      const double total_i = cost + house.value * (h == 0 ? l0_i
                                                          : objectives::ead_fraction(in_i, 0, house.floor_rel_bfe + h) *
                                                                in_i.sows[0].discount_sum);
      if (k == 0 || total < best_total) {
        best_total = total;
        best = h;
      }
      if (k == 0 || total_i < best_total_i) {
        best_total_i = total_i;
        best_i = h;
      }
    }
    row.h_opt = best;
    row.h_opt_ignoring = best_i;
    row.total_ratio_opt = best_total / house.value;
    const auto fema = objectives::fema_recommendation(house, c.freeboard, a.cost.min_height);
    row.fema_feasible = fema.feasible && fema.h <= a.cost.max_height;
    row.h_fema = clamp_height(a.cost, fema.h);
    const double cf = exposure::elevation_cost(a.cost, house, row.h_fema);
    row.bcr_fema = house.value * (l0 - table.led_at(house.floor_rel_bfe + row.h_fema)) / cf;
    row.fema_passes_cb = row.bcr_fema >= 1.0;
    if (best > 0) {
      const double co = exposure::elevation_cost(a.cost, house, best);
      row.bcr_opt = house.value * (l0 - table.led_at(house.floor_rel_bfe + best)) / co;
      row.opt_passes_cb = row.bcr_opt >= 1.0;
    } else {
      row.bcr_opt = std::numeric_limits<double>::quiet_NaN();
      row.opt_passes_cb = false;
    }
    row.above_fema = best > row.h_fema + 1e-9;
    row.reliability_opt = table.reliability_at(house.floor_rel_bfe + best);
    row.reliability_fema = table.reliability_at(house.floor_rel_bfe + row.h_fema);
  }
  res.summary = summarize_sweep(res.rows);
  return res;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out =
      "id,value,size,floor_rel_bfe,h_opt,h_opt_ignoring,h_fema,fema_feasible,total_ratio_opt,bcr_opt,bcr_fema,"
      "fema_passes_cb,opt_passes_cb,above_fema,reliability_opt,reliability_fema\n";
  for (const auto& x : r.rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", x.id, io::fmt_double(x.house.value),
                       io::fmt_double(x.house.size), io::fmt_double(x.house.floor_rel_bfe), io::fmt_double(x.h_opt),
                       io::fmt_double(x.h_opt_ignoring), io::fmt_double(x.h_fema), x.fema_feasible ? 1 : 0,
                       io::fmt_double(x.total_ratio_opt), io::fmt_double(x.bcr_opt), io::fmt_double(x.bcr_fema),
                       x.fema_passes_cb ? 1 : 0, x.opt_passes_cb ? 1 : 0, x.above_fema ? 1 : 0,
                       io::fmt_double(x.reliability_opt), io::fmt_double(x.reliability_fema));
  return out;
}

IshigamiCheck ishigami_self_test(std::size_t n, std::uint64_t seed) {
  const double a = 7.0, b = 0.1, pi = std::numbers::pi;
  const double v1 = 0.5 * std::pow(1 + b * std::pow(pi, 4) / 5, 2);
  const double v2 = a * a / 8;
  const double v13 = b * b * std::pow(pi, 8) * (1.0 / 18 - 1.0 / 50);
  const double var = v1 + v2 + v13;
  const auto d = sensitivity::saltelli_design(3, n, sensitivity::Sampler::LatinHypercube, seed);
  const auto y = sensitivity::evaluate(d, [](const std::vector<double>& x) { return sensitivity::ishigami(x); });
  const auto s = sensitivity::sobol_indices(d, y);
  IshigamiCheck c{s.first[0], s.first[1], s.first[2], s.total[0], 0};
  c.max_error = std::max({std::abs(c.s1 - v1 / var), std::abs(c.s2 - v2 / var), std::abs(c.s3),
                          std::abs(c.st1 - (v1 + v13) / var)});
  return c;
}

}  // namespace heighten::pipeline
