#include "heighten/api_service.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <httplib.h>

#include "heighten/version.hpp"

namespace heighten::api {

using ojson = nlohmann::ordered_json;

namespace {

Response json_response(int status, const ojson& j) { return {status, j.dump() + "\n", 0}; }

Response not_ready() { return json_response(503, {{"error", "artifacts not loaded"}}); }

struct FieldErrors {
  ojson list = ojson::array();
  void add(const std::string& field, const std::string& msg) { list.push_back({{"field", field}, {"message", msg}}); }
  bool empty() const { return list.empty(); }
};

std::optional<double> number(const nlohmann::json& obj, const char* key, const std::string& field, FieldErrors& err,
                             bool required) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (required) err.add(field, "is required");
    return std::nullopt;
  }
  const auto& v = obj[key];
  if (!v.is_number()) {
    err.add(field, "must be a number");
    return std::nullopt;
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    err.add(field, "must be finite");
    return std::nullopt;
  }
  return d;
}

}  // namespace

ApiService::ApiService(ServiceOptions opt) : opt_(opt) {}

void ApiService::load(pipeline::Artifacts a) {
  std::atomic_store(&art_, std::shared_ptr<const pipeline::Artifacts>(
                               std::make_shared<pipeline::Artifacts>(std::move(a))));
}

std::shared_ptr<const pipeline::Artifacts> ApiService::artifacts() const { return std::atomic_load(&art_); }

bool ApiService::ready() const { return artifacts() != nullptr; }

Response ApiService::analyze(std::string_view body) const {
  const auto t0 = std::chrono::steady_clock::now();
  const auto art = artifacts();
  if (!art) return not_ready();
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return json_response(400, {{"errors", {{{"field", "body"}, {"message", std::string("invalid JSON: ") + e.what()}}}}});
  }
  FieldErrors err;
  if (!req.is_object()) {
    err.add("body", "must be a JSON object");
    return json_response(400, {{"errors", err.list}});
  }
  const auto house_j = req.value("house", nlohmann::json());
  if (!house_j.is_object()) err.add("house", "is required and must be an object");
  const auto value = number(house_j, "value", "house.value", err, true);
  const auto size = number(house_j, "size", "house.size", err, true);
  const auto floor = number(house_j, "floor_rel_bfe", "house.floor_rel_bfe", err, true);
  if (value && !(*value > 0)) err.add("house.value", "must be positive");
  if (size && !(*size > 0)) err.add("house.size", "must be positive");

  const auto opts = req.value("options", nlohmann::json::object());
  if (!opts.is_object()) err.add("options", "must be an object");
  auto options = pipeline::default_options(art->config);
  options.ensemble_size = opt_.default_ensemble;
  std::size_t requested = opt_.default_ensemble;
  if (opts.is_object()) {
    if (!opts.contains("seed")) {
      err.add("options.seed", "is required");
    } else if (!opts["seed"].is_number_unsigned()) {
      err.add("options.seed", "must be a non-negative integer");
    } else {
      options.seed = opts["seed"].get<std::uint64_t>();
    }
    if (opts.contains("ensemble_size")) {
      if (!opts["ensemble_size"].is_number_unsigned() || opts["ensemble_size"].get<std::uint64_t>() == 0)
        err.add("options.ensemble_size", "must be a positive integer");
      else
        requested = opts["ensemble_size"].get<std::size_t>();
    }
    if (opts.contains("mode")) {
      const auto m = opts["mode"].is_string() ? opts["mode"].get<std::string>() : std::string();
      if (m == "considering") options.with_ignoring = false;
      else if (m != "both") err.add("options.mode", "must be 'both' or 'considering'");
    }
    if (opts.contains("scenario")) {
      const auto s = opts["scenario"].is_string() ? opts["scenario"].get<std::string>() : std::string();
      if (s == "deep") {
        options.ensemble_mode = sow::EnsembleMode::DeepSwitching;
      } else {
        const auto plus = s.find('+');
        try {
          if (plus == std::string::npos) throw std::invalid_argument("bad");
          options.scenario = {exposure::parse_damage_model(s.substr(0, plus)), discount::parse_kind(s.substr(plus + 1))};
          options.ensemble_mode = sow::EnsembleMode::FixedScenario;
        } catch (const std::invalid_argument&) {
          err.add("options.scenario", "must be 'deep' or '<HAZUS|JRC>+<RandomWalk|MeanReverting|BackgroundTrend>'");
        }
      }
    }
    if (opts.contains("ranges")) {
      const auto& r = opts["ranges"];
      if (const auto v = number(r, "bcr_min", "options.ranges.bcr_min", err, false)) options.ranges.bcr_min = *v;
      if (const auto v = number(r, "total_cost_ratio_max", "options.ranges.total_cost_ratio_max", err, false))
        options.ranges.total_cost_ratio_max = *v;
      if (const auto v = number(r, "reliability_min", "options.ranges.reliability_min", err, false))
        options.ranges.reliability_min = *v;
      if (options.ranges.total_cost_ratio_max < 0) err.add("options.ranges.total_cost_ratio_max", "must be >= 0");
      if (options.ranges.reliability_min > 1) err.add("options.ranges.reliability_min", "must be <= 1");
    }
  }
  if (!err.empty()) return json_response(400, {{"errors", err.list}});

  const bool capped = requested > opt_.max_ensemble;
  options.ensemble_size = capped ? opt_.max_ensemble : requested;
  exposure::House house{*value, *size, *floor, "request"};
  const auto& pool = art->config.pool;
  ojson out_of_range = ojson::array();
  if (house.value < pool.value_min || house.value > pool.value_max) out_of_range.push_back("house.value");
  if (house.size < pool.size_min || house.size > pool.size_max) out_of_range.push_back("house.size");
  if (house.floor_rel_bfe < pool.floor_min || house.floor_rel_bfe > pool.floor_max)
    out_of_range.push_back("house.floor_rel_bfe");

  const auto an = pipeline::analyze_house(*art, house, options);
  auto j = pipeline::analysis_json(an);
  j["bfe"] = art->bfe;
  j["ensemble_size_requested"] = requested;
  j["ensemble_size_used"] = options.ensemble_size;
  j["capped"] = capped;
  j["out_of_range"] = out_of_range;
  auto r = json_response(200, j);
  r.compute_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Response ApiService::hazard_summary() const {
  const auto art = artifacts();
  if (!art) return not_ready();
  ojson j;
  j["bfe"] = art->bfe;
  j["map"] = {{"mu", art->map.mu}, {"sigma", art->map.sigma}, {"xi", art->map.xi}};
  ojson rl = ojson::array();
  for (double t : {10.0, 50.0, 100.0, 500.0}) {
    const auto r = hazard::return_level_summary(art->posterior, t);
    rl.push_back({{"period_years", t}, {"map_level", r.map_level}, {"mean_level", r.mean_level}, {"q05", r.q05},
                  {"q95", r.q95}});
  }
  j["return_levels"] = rl;
  j["samples"] = art->posterior.size();
  return json_response(200, j);
}

Response ApiService::meta() const {
  const auto art = artifacts();
  if (!art) return not_ready();
  const auto& c = art->config;
  ojson j;
  j["version"] = kVersion;
  j["config_hash"] = pipeline::config_hash(c);
  j["seeds"] = {{"mcmc", c.mcmc_seed}, {"sow", c.sow_seed}, {"houses", c.sweep_seed}, {"sensitivity", c.sensitivity_seed}};
  ojson h = ojson::object();
  for (const auto& [k, v] : art->hashes) h[k] = v;
  j["artifacts"] = h;
  j["ensemble"] = {{"default", opt_.default_ensemble}, {"max", opt_.max_ensemble}};
  j["house_bounds"] = {{"value", {c.pool.value_min, c.pool.value_max}},
                       {"size", {c.pool.size_min, c.pool.size_max}},
                       {"floor_rel_bfe", {c.pool.floor_min, c.pool.floor_max}}};
  return json_response(200, j);
}

namespace {
void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_header("X-Compute-Time-Ms", fmt::format("{:.3f}", r.compute_ms));
  res.set_content(r.body, "application/json");
}
}  // namespace

void mount(httplib::Server& server, const ApiService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Expose-Headers", "X-Compute-Time-Ms"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/api/analyze", [&service](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, service.analyze(req.body));
    } catch (const std::exception& e) {
      reply(res, json_response(500, {{"error", e.what()}}));
    }
  });
  server.Get("/api/hazard/summary",
             [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.hazard_summary()); });
  server.Get("/api/meta", [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.meta()); });
}

void serve(const ApiService& service, const std::string& host, int port) {
  httplib::Server server;
  mount(server, service);
  if (!server.listen(host, port)) throw std::runtime_error(fmt::format("cannot listen on {}:{}", host, port));
}

}  // namespace heighten::api
