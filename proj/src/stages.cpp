#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "heighten/io.hpp"
#include "heighten/pipeline.hpp"
#include "heighten/version.hpp"

namespace heighten::pipeline {

using ojson = nlohmann::ordered_json;

namespace {

const char* kManifest = "manifest.json";

std::string file_hash(const fs::path& p) { return io::content_hash(io::read_file(p)); }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace

Pipeline::Pipeline(RunConfig config) : cfg_(std::move(config)) { load_manifest(); }

void Pipeline::load_manifest() {
  const auto path = cfg_.output_dir / kManifest;
  if (fs::exists(path)) {
    try {
      manifest_ = ojson::parse(io::read_file(path));
    } catch (const nlohmann::json::exception&) {
      throw ArtifactError(fmt::format("{} is not valid JSON; delete it to start over", path.string()));
    }
  }
  if (!manifest_.is_object()) manifest_ = ojson::object();
  if (!manifest_.contains("stages")) manifest_["stages"] = ojson::object();
}

void Pipeline::save_manifest() {
  manifest_["tool"] = "heighten";
  manifest_["version"] = kVersion;
  manifest_["config_hash"] = config_hash(cfg_);
  manifest_["config"] = cfg_.raw;
  // stages in a fixed order regardless of run order
  ojson stages = ojson::object();
  for (const char* s : {"ingest", "fit-hazard", "fit-discount", "analyze", "robustness", "sweep", "sensitivity",
                        "export-plots"})
    if (manifest_["stages"].contains(s)) stages[s] = manifest_["stages"][s];
  manifest_["stages"] = stages;
  ojson ordered;
  for (const char* k : {"tool", "version", "config_hash", "config", "stages"}) ordered[k] = manifest_[k];
  io::write_file(cfg_.output_dir / kManifest, dump(ordered));
}

std::string Pipeline::stage_hash(const std::string& stage) const {
  const auto& raw = cfg_.raw;
  auto outputs = [&](const char* s) {
    return manifest_["stages"].contains(s) ? manifest_["stages"][s]["outputs"].dump() : std::string("missing");
  };
  std::string key;
  if (stage == "ingest") {
    key = file_hash(cfg_.gage_rdb) + file_hash(cfg_.rating_curve) + raw["hydro"].dump();
  } else if (stage == "fit-hazard") {
    key = outputs("ingest") + raw["hazard"].dump() + raw["seeds"]["mcmc"].dump();
  } else if (stage == "fit-discount") {
    key = file_hash(cfg_.discount_series) + raw["discount"]["smoothing_window"].dump();
  } else {
    key = outputs("fit-hazard") + outputs("fit-discount") + config_hash(cfg_);
  }
  return io::content_hash(stage + key);
}

void Pipeline::require(const std::string& stage) {
  const auto& st = manifest_["stages"];
  const bool present = st.contains(stage);
  const bool fresh = present && st[stage].value("fingerprint", "") == stage_hash(stage);
  if (fresh) return;
  if (run_deps_) {
    if (stage == "ingest") ingest();
    else if (stage == "fit-hazard") fit_hazard();
    else if (stage == "fit-discount") fit_discount();
    return;
  }
  throw ArtifactError(fmt::format(
      "stage '{}' {}; run `heighten {} --config <file>` first (or pass --with-deps)", stage,
      present ? "is stale for the current config or inputs" : "has not been run", stage));
}

void Pipeline::begin_stage(const std::string& stage) {
  manifest_["pending"] = {{"stage", stage}, {"outputs", ojson::object()}};
}

void Pipeline::write(const std::string& stage, const std::string& rel, const std::string& content) {
  io::write_file(cfg_.output_dir / rel, content);
  if (!manifest_.contains("pending") || manifest_["pending"]["stage"] != stage)
    throw std::logic_error("write outside of a stage");
  manifest_["pending"]["outputs"][rel] = io::content_hash(content);
}

void Pipeline::commit_stage(const std::string& stage) {
  auto outputs = manifest_["pending"]["outputs"];
  manifest_.erase("pending");
  manifest_["stages"][stage] = {{"fingerprint", stage_hash(stage)}, {"outputs", outputs}};
  save_manifest();
}

std::string Pipeline::read_verified(const std::string& stage, const std::string& rel) {
  require(stage);
  const auto& outs = manifest_["stages"][stage]["outputs"];
  if (!outs.contains(rel)) throw ArtifactError(fmt::format("manifest has no artifact {} for stage '{}'", rel, stage));
  const auto path = cfg_.output_dir / rel;
  if (!fs::exists(path))
    throw ArtifactError(fmt::format("artifact {} is missing; re-run `heighten {}`", path.string(), stage));
  auto text = io::read_file(path);
  if (io::content_hash(text) != outs[rel].get<std::string>())
    throw ArtifactError(
        fmt::format("artifact {} does not match its manifest hash; re-run `heighten {}`", path.string(), stage));
  return text;
}

void Pipeline::ingest() {
  const std::string st = "ingest";
  begin_stage(st);
  const auto series = hydro::parse_usgs_rdb(io::read_file(cfg_.gage_rdb));
  const auto curve = hydro::parse_rating_csv(io::read_file(cfg_.rating_curve), cfg_.rating_interpolation);
  const auto levels = hydro::to_water_levels(series, curve);
  const auto maxima = hydro::annual_maxima(levels, cfg_.min_coverage, cfg_.year_convention);
  write(st, "ingest/annual_maxima.csv", hydro::annual_maxima_csv(maxima));
  ojson rep;
  rep["gage_id"] = series.gage_id;
  rep["first_date"] = series.records.front().date.iso();
  rep["last_date"] = series.records.back().date.iso();
  rep["records"] = series.records.size();
  rep["gaps"] = series.gap_count();
  rep["extrapolated_days"] = levels.extrapolated_days;
  rep["min_coverage"] = cfg_.min_coverage;
  rep["years_used"] = maxima.entries.size();
  if (!maxima.entries.empty()) {
    rep["first_year"] = maxima.entries.front().year;
    rep["last_year"] = maxima.entries.back().year;
  }
  ojson ex = ojson::array();
  for (const auto& e : maxima.excluded) ex.push_back({{"year", e.year}, {"coverage", e.coverage}});
  rep["excluded_years"] = ex;
  write(st, "ingest/report.json", dump(rep));
  commit_stage(st);
}

hydro::AnnualMaxima Pipeline::load_maxima() {
  return hydro::parse_annual_maxima_csv(read_verified("ingest", "ingest/annual_maxima.csv"));
}

void Pipeline::fit_hazard() {
  const auto maxima = load_maxima();
  const std::string st = "fit-hazard";
  begin_stage(st);
  const auto data = maxima.levels();
  const auto post = hazard::mcmc_sample(data, cfg_.priors, cfg_.mcmc);
  write(st, "hazard/posterior.csv", hazard::posterior_csv(post));
  write(st, "hazard/posterior.json", hazard::posterior_metadata_json(post));
  const auto map = hazard::map_estimate(post);
  ojson s;
  s["map"] = {{"mu", map.mu}, {"sigma", map.sigma}, {"xi", map.xi}};
  double m[3] = {0, 0, 0};
  for (const auto& p : post.samples) {
    m[0] += p.params.mu;
    m[1] += p.params.sigma;
    m[2] += p.params.xi;
  }
  const double n = static_cast<double>(post.size());
  s["posterior_mean"] = {{"mu", m[0] / n}, {"sigma", m[1] / n}, {"xi", m[2] / n}};
  s["bfe"] = hazard::base_flood_elevation(map);
  ojson rl = ojson::array();
  for (double t : {2.0, 10.0, 50.0, 100.0, 500.0}) {
    const auto r = hazard::return_level_summary(post, t);
    rl.push_back({{"period_years", t},
                  {"map_level", r.map_level},
                  {"mean_level", r.mean_level},
                  {"q05", r.q05},
                  {"q95", r.q95},
                  {"relative_gap", (r.mean_level - r.map_level) / r.map_level}});
  }
  s["return_levels"] = rl;
  s["observations"] = data.size();
  write(st, "hazard/summary.json", dump(s));
  commit_stage(st);
}

void Pipeline::fit_discount() {
  const std::string st = "fit-discount";
  begin_stage(st);
  auto series = discount::parse_discount_csv(io::read_file(cfg_.discount_series), cfg_.discount_series.filename().string());
  if (cfg_.smoothing_window > 1) series = discount::moving_average(series, cfg_.smoothing_window);
  ojson models = ojson::object();
  std::vector<discount::Ar3Model> fitted;
  for (auto k : discount::kAllKinds) {
    fitted.push_back(discount::fit_ar3(series, k));
    models[std::string(discount::kind_name(k))] = ojson::parse(discount::model_json(fitted.back()));
  }
  write(st, "discount/models.json", dump(models));
  std::string csv = "model,log_likelihood,n_params,aic,bic,lowest_aic,equivalent_to_best\n";
  for (const auto& r : discount::model_selection_table(fitted))
    csv += fmt::format("{},{},{},{},{},{},{}\n", discount::kind_name(r.kind), io::fmt_double(r.log_likelihood),
                       r.n_params, io::fmt_double(r.aic), io::fmt_double(r.bic), r.best_aic ? 1 : 0,
                       r.equivalent_to_best ? 1 : 0);
  write(st, "discount/selection.csv", csv);
  commit_stage(st);
}

Artifacts Pipeline::load_artifacts() {
  Artifacts a;
  a.config = cfg_;
  const auto pcsv = read_verified("fit-hazard", "hazard/posterior.csv");
  const auto pjson = read_verified("fit-hazard", "hazard/posterior.json");
  a.posterior = hazard::parse_posterior(pcsv, pjson);
  a.map = hazard::map_estimate(a.posterior);
  a.bfe = hazard::base_flood_elevation(a.map);
  const auto mtext = read_verified("fit-discount", "discount/models.json");
  const auto mj = nlohmann::json::parse(mtext);
  a.models.resize(3);
  for (auto k : discount::kAllKinds)
    a.models[static_cast<int>(k)] = discount::parse_model_json(mj.at(std::string(discount::kind_name(k))).dump());
  a.curves = exposure::load_damage_curves(cfg_.damage_manifest);
  a.cost = load_cost_model(cfg_);
  a.hashes["posterior"] = io::content_hash(pcsv);
  a.hashes["posterior_metadata"] = io::content_hash(pjson);
  a.hashes["discount_models"] = io::content_hash(mtext);
  a.hashes["damage_manifest"] = file_hash(cfg_.damage_manifest);
  a.hashes["cost_model"] = file_hash(cfg_.cost_model);
  return a;
}

HouseAnalysis Pipeline::analyze() {
  const auto a = load_artifacts();
  const std::string st = "analyze";
  begin_stage(st);
  auto an = analyze_house(a, cfg_.house, default_options(cfg_));
  auto rep = analysis_json(an);
  rep["bfe"] = a.bfe;
  write(st, "analysis/report.json", dump(rep));
  write(st, "analysis/strategies.csv", strategies_csv(an));
  write(st, "analysis/surface_considering.csv", objectives::surface_csv(an.considering));
  if (an.ignoring) write(st, "analysis/surface_ignoring.csv", objectives::surface_csv(*an.ignoring));
  write(st, "analysis/robustness.csv", robustness::robustness_csv(an.robustness));
  write(st, "analysis/tradeoff.csv", robustness::tradeoff_csv(an.tradeoff));
  commit_stage(st);
  return an;
}

void Pipeline::robustness() {
  const auto a = load_artifacts();
  const std::string st = "robustness";
  begin_stage(st);
  auto opt = default_options(cfg_);
  opt.with_ignoring = false;
  const auto an = analyze_house(a, cfg_.house, opt);
  write(st, "robustness/robustness.csv", robustness::robustness_csv(an.robustness));
  write(st, "robustness/tradeoff.csv", robustness::tradeoff_csv(an.tradeoff));
  std::string front = "h,upfront_usd,reliability,passes_cb_test\n";
  for (const auto& t : an.tradeoff)
    if (t.on_front)
      front += fmt::format("{},{},{},{}\n", io::fmt_double(t.h), io::fmt_double(t.upfront),
                           io::fmt_double(t.reliability), t.passes_cb_test ? 1 : 0);
  write(st, "robustness/pareto_front.csv", front);
  commit_stage(st);
}

SweepResult Pipeline::sweep() {
  const auto a = load_artifacts();
  const std::string st = "sweep";
  begin_stage(st);
  const auto pool = house_pool(cfg_.pool, cfg_.sweep_seed);
  auto res = sweep_houses(a, pool);
  write(st, "sweep/houses.csv", sweep_csv(res));
  const auto& s = res.summary;
  ojson j = {{"houses", s.houses},
             {"ensemble_size", cfg_.sweep_ensemble_size},
             {"share_above_fema", s.share_above_fema},
             {"share_zero_optimal", s.share_zero_optimal},
             {"share_fema_passes_cb", s.share_fema_passes_cb},
             {"share_nonzero_optimal_passing_cb", s.share_nonzero_opt_passing_cb},
             {"share_zero_optimal_ignoring", s.share_zero_optimal_ignoring}};
  write(st, "sweep/summary.json", dump(j));
  commit_stage(st);
  return res;
}

std::vector<fs::path> Pipeline::sensitivity(const std::string& variant, const std::string& scenario) {
  std::vector<fs::path> written;
  const std::string st = "sensitivity";
  if (variant == "ishigami") {
    begin_stage(st);
    const auto c = ishigami_self_test(std::size_t{1} << 14, cfg_.sensitivity_seed);
    ojson j = {{"n", 1 << 14}, {"s1", c.s1}, {"s2", c.s2}, {"s3", c.s3}, {"st1", c.st1}, {"max_error", c.max_error},
               {"pass", c.max_error <= 0.02}};
    write(st, "sensitivity/ishigami.json", dump(j));
    commit_stage(st);
    return {cfg_.output_dir / "sensitivity/ishigami.json"};
  }
  const auto a = load_artifacts();
  sensitivity::DamageModelInputs in;
  in.posterior = &a.posterior;
  in.models = &a.models;
  in.curves = &a.curves;
  in.bfe = a.bfe;
  in.grid = ead_grid(cfg_);

  struct Job {
    std::string name;
    sensitivity::SensitivityConfig cfg;
  };
  auto base = [&](sensitivity::Variant v) {
    sensitivity::SensitivityConfig c;
    c.variant = v;
    c.scenario = cfg_.scenario;
    c.house = cfg_.house;
    c.n = cfg_.sensitivity_n;
    c.seed = cfg_.sensitivity_seed;
    c.sampler = cfg_.sampler;
    c.bootstrap = cfg_.bootstrap;
    c.bank_size = cfg_.bank_size;
    c.horizon = cfg_.bank_horizon;
    c.rate_min = cfg_.rate_min;
    c.rate_max = cfg_.rate_max;
    c.lifetime = cfg_.lifetime;
    return c;
  };
  std::vector<Job> jobs;
  if (variant == "scenario") {
    std::vector<sow::Scenario> scs;
    if (scenario == "all") {
      scs = sow::all_scenarios();
    } else {
      const auto plus = scenario.find('+');
      if (plus == std::string::npos) throw ConfigError(fmt::format("bad scenario '{}'", scenario));
      scs.push_back({exposure::parse_damage_model(scenario.substr(0, plus)), discount::parse_kind(scenario.substr(plus + 1))});
    }
    for (const auto& sc : scs) {
      auto c = base(sensitivity::Variant::Scenario);
      c.scenario = sc;
      jobs.push_back({"scenario_" + sow::scenario_name(sc), c});
    }
  } else if (variant == "deep") {
    jobs.push_back({"deep", base(sensitivity::Variant::DeepChoice)});
  } else if (variant == "fixed-rate") {
    jobs.push_back({"fixed_rate", base(sensitivity::Variant::FixedRate)});
  } else if (variant == "exposure") {
    for (const auto& h : sensitivity::house_presets()) {
      auto c = base(sensitivity::Variant::Scenario);
      c.house = h;
      jobs.push_back({"exposure_" + h.label, c});
    }
  } else {
    throw ConfigError(fmt::format("unknown sensitivity variant '{}' (scenario, deep, fixed-rate, exposure, ishigami)", variant));
  }
  begin_stage(st);
  ojson summary = ojson::array();
  for (const auto& job : jobs) {
    const auto r = sensitivity::damage_sensitivity(in, job.cfg);
    const std::string rel = "sensitivity/" + job.name + ".csv";
    write(st, rel, sensitivity::indices_csv(r.indices, r.factors));
    written.push_back(cfg_.output_dir / rel);
    ojson s = {{"run", job.name}, {"n", job.cfg.n}, {"evaluations", r.design.evaluations()}, {"degenerate", r.indices.degenerate}};
    if (!r.indices.degenerate) {
      std::vector<std::size_t> order(r.factors.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return r.indices.first[x] > r.indices.first[y]; });
      ojson rank = ojson::array();
      for (auto i : order) rank.push_back(r.factors[i]);
      s["first_order_ranking"] = rank;
    }
    summary.push_back(s);
  }
  write(st, "sensitivity/summary_" + variant + ".json", dump(summary));
  commit_stage(st);
  return written;
}

void Pipeline::export_plots() {
  const auto a = load_artifacts();
  const auto maxima = load_maxima();
  const std::string st = "export-plots";
  begin_stage(st);

  std::string rl = "return_period,map_level,mean_level,q05,q95\n";
  for (int i = 0; i <= 60; ++i) {
    const double t = std::exp(std::log(1.1) + (std::log(1000.0) - std::log(1.1)) * i / 60.0);
    const auto r = hazard::return_level_summary(a.posterior, t);
    rl += fmt::format("{},{},{},{},{}\n", io::fmt_double(t), io::fmt_double(r.map_level), io::fmt_double(r.mean_level),
                      io::fmt_double(r.q05), io::fmt_double(r.q95));
  }
  write(st, "plots/return_levels.csv", rl);

  auto levels = maxima.entries;
  std::stable_sort(levels.begin(), levels.end(), [](const auto& x, const auto& y) { return x.level_ft > y.level_ft; });
  std::string am = "year,level_ft,rank,return_period\n";
  for (std::size_t i = 0; i < levels.size(); ++i)
    am += fmt::format("{},{},{},{}\n", levels[i].year, io::fmt_double(levels[i].level_ft), i + 1,
                      io::fmt_double((levels.size() + 1.0) / static_cast<double>(i + 1)));
  write(st, "plots/annual_maxima.csv", am);

  std::string dp = "model,year_ahead,q05,q50,q95,mean\n";
  for (auto k : discount::kAllKinds) {
    const auto paths = discount::simulate_rates(a.models[static_cast<int>(k)], 100, 1000, cfg_.sow_seed);
    for (std::size_t t = 0; t < 100; ++t) {
      std::vector<double> v(paths.size());
      for (std::size_t i = 0; i < paths.size(); ++i) v[i] = paths[i][t];
      dp += fmt::format("{},{},{},{},{},{}\n", discount::kind_name(k), t + 1, io::fmt_double(io::quantile(v, 0.05)),
                        io::fmt_double(io::quantile(v, 0.5)), io::fmt_double(io::quantile(v, 0.95)),
                        io::fmt_double(io::mean(v)));
    }
  }
  write(st, "plots/discount_projection.csv", dp);

  std::string dc = "depth_ft,hazus,jrc\n";
  for (int i = -4; i <= 100; ++i) {
    const double d = i * 0.25;
    dc += fmt::format("{},{},{}\n", io::fmt_double(d), io::fmt_double(exposure::damage_fraction(a.curves[0], d, 0)),
                      io::fmt_double(exposure::damage_fraction(a.curves[1], d, 0)));
  }
  write(st, "plots/damage_curves.csv", dc);

  auto step = a.cost, interp = a.cost;
  step.mode = exposure::CostMode::Step;
  interp.mode = exposure::CostMode::Interpolated;
  std::string cc = "h,step_usd,interpolated_usd\n";
  for (double h : objectives::height_grid(a.cost, cfg_.h_step))
    cc += fmt::format("{},{},{}\n", io::fmt_double(h), io::fmt_double(exposure::elevation_cost(step, cfg_.house, h)),
                      io::fmt_double(exposure::elevation_cost(interp, cfg_.house, h)));
  write(st, "plots/cost_curve.csv", cc);

  std::string lt = "years,density\n";
  const double k = cfg_.lifetime.shape, lam = cfg_.lifetime.scale;
  for (int y = 1; y <= 200; ++y) {
    const double x = y / lam;
    lt += fmt::format("{},{}\n", y, io::fmt_double(k / lam * std::pow(x, k - 1) * std::exp(-std::pow(x, k))));
  }
  write(st, "plots/lifetime_pdf.csv", lt);
  commit_stage(st);
}

}  // namespace heighten::pipeline
