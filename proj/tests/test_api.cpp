#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "heighten/api_service.hpp"
#include "support.hpp"

using namespace heighten;
using nlohmann::json;

namespace {

struct Fixture {
  support::TempDir dir{"api"};
  pipeline::Artifacts art = support::fitted_artifacts(dir.path);
  api::ApiService service{api::ServiceOptions{300, 600}};
  Fixture() { service.load(art); }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

std::string request(double value, double size, double floor, json options) {
  return json{{"house", {{"value", value}, {"size", size}, {"floor_rel_bfe", floor}}}, {"options", options}}.dump();
}

std::vector<std::string> error_fields(const api::Response& r) {
  std::vector<std::string> out;
  const auto j = json::parse(r.body);
  for (const auto& e : j["errors"]) out.push_back(e["field"].get<std::string>());
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("service unavailable before artifacts load") {
  const api::ApiService empty;
  CHECK_FALSE(empty.ready());
  CHECK(empty.analyze(request(3e5, 1500, -4, {{"seed", 1}})).status == 503);
  CHECK(empty.hazard_summary().status == 503);
  CHECK(empty.meta().status == 503);
}

TEST_CASE("request validation reports each bad field") {
  const auto& s = fixture().service;
  REQUIRE(s.ready());
  auto bad = [&](const std::string& body) {
    const auto r = s.analyze(body);
    CHECK(r.status == 400);
    return error_fields(r);
  };
  CHECK(has(bad("not json"), "body"));
  CHECK(has(bad("[1,2]"), "body"));
  CHECK(has(bad(request(3e5, 1500, -4, json::object())), "options.seed"));
  CHECK(has(bad(request(3e5, 1500, -4, {{"seed", -3}})), "options.seed"));
  CHECK(has(bad(request(3e5, 1500, -4, {{"seed", "abc"}})), "options.seed"));
  CHECK(has(bad(request(3e5, 1500, -4, {{"seed", 1}, {"scenario", "HAZUS+Nothing"}})), "options.scenario"));
  CHECK(has(bad(request(3e5, 1500, -4, {{"seed", 1}, {"mode", "neither"}})), "options.mode"));
  CHECK(has(bad(request(3e5, 1500, -4, {{"seed", 1}, {"ensemble_size", 0}})), "options.ensemble_size"));

  const auto several = bad(json{{"house", {{"value", "lots"}, {"size", 1500}}}, {"options", {{"seed", 1}}}}.dump());
  CHECK(has(several, "house.value"));
  CHECK(has(several, "house.floor_rel_bfe"));
  CHECK_FALSE(has(several, "house.size"));
  CHECK(has(bad(json{{"options", {{"seed", 1}}}}.dump()), "house"));
}

TEST_CASE("ensemble size is capped and out-of-range houses are flagged") {
  const auto& s = fixture().service;
  const auto r = s.analyze(request(2e6, 1500, -4, {{"seed", 1}, {"ensemble_size", 5000}, {"mode", "considering"}}));
  REQUIRE(r.status == 200);
  const auto j = json::parse(r.body);
  CHECK(j["capped"] == true);
  CHECK(j["ensemble_size_requested"] == 5000);
  CHECK(j["ensemble_size_used"] == 600);
  CHECK(j["out_of_range"] == json::array({"house.value"}));

  const auto d = json::parse(s.analyze(request(3e5, 1500, -4, {{"seed", 1}})).body);
  CHECK(d["capped"] == false);
  CHECK(d["ensemble_size_used"] == 300);
  CHECK(d["out_of_range"].empty());
}

TEST_CASE("responses are reproducible") {
  const auto& s = fixture().service;
  const auto body = request(250000, 2000, -6, {{"seed", 9}, {"scenario", "JRC+RandomWalk"}});
  const auto a = s.analyze(body), b = s.analyze(body);
  REQUIRE(a.status == 200);
  CHECK(a.body == b.body);
  CHECK(a.compute_ms > 0);
  CHECK(s.analyze(request(250000, 2000, -6, {{"seed", 10}, {"scenario", "JRC+RandomWalk"}})).body != a.body);
}

TEST_CASE("strategies match a direct library analysis") {
  auto& f = fixture();
  const auto r = f.service.analyze(request(300000, 1500, -4, {{"seed", 42}, {"ensemble_size", 400}}));
  REQUIRE(r.status == 200);
  const auto j = json::parse(r.body);
  auto opt = pipeline::default_options(f.art.config);
  opt.seed = 42;
  opt.ensemble_size = 400;
  const auto an = pipeline::analyze_house(f.art, exposure::House{300000, 1500, -4, "request"}, opt);
  CHECK(j["strategies"] == json::parse(pipeline::strategies_json(an).dump()));
  CHECK(j["bfe"].get<double>() == f.art.bfe);
}

TEST_CASE("a house far above the flood plain stays put") {
  const auto& s = fixture().service;
  const auto j = json::parse(s.analyze(request(300000, 1500, 0, {{"seed", 2}, {"mode", "considering"}})).body);
  const auto dry = json::parse(s.analyze(request(300000, 1500, 40, {{"seed", 2}, {"mode", "considering"}})).body);
  for (const auto& st : dry["strategies"])
    if (st["name"] != "fema") CHECK(st["h"] == 0.0);
  CHECK(dry["out_of_range"] == json::array({"house.floor_rel_bfe"}));
  CHECK(j["strategies"].size() == 3);
}

TEST_CASE("hazard summary and metadata") {
  auto& f = fixture();
  const auto h = json::parse(f.service.hazard_summary().body);
  REQUIRE(h["return_levels"].size() == 4);
  std::vector<int> periods;
  for (const auto& rl : h["return_levels"]) {
    periods.push_back(rl["period_years"]);
    CHECK(rl["q05"].get<double>() <= rl["q95"].get<double>());
  }
  CHECK(periods == std::vector<int>{10, 50, 100, 500});
  CHECK(h["return_levels"][2]["map_level"].get<double>() == doctest::Approx(f.art.bfe));
  CHECK(h["samples"] == f.art.posterior.size());

  const auto m = json::parse(f.service.meta().body);
  CHECK(m["config_hash"] == pipeline::config_hash(f.art.config));
  CHECK(m["ensemble"]["max"] == 600);
  CHECK(m.contains("artifacts"));
}

TEST_CASE("http round trip") {
  auto& f = fixture();
  httplib::Server server;
  api::mount(server, f.service);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto body = request(300000, 1500, -4, {{"seed", 3}, {"mode", "considering"}});
  const auto res = client.Post("/api/analyze", body, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(std::stod(res->get_header_value("X-Compute-Time-Ms")) > 0);
  CHECK(res->body == f.service.analyze(body).body);

  const auto pre = client.Options("/api/analyze");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  const auto bad = client.Post("/api/analyze", "{}", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto summary = client.Get("/api/hazard/summary");
  REQUIRE(summary);
  CHECK(summary->status == 200);
  const auto meta = client.Get("/api/meta");
  REQUIRE(meta);
  CHECK(meta->status == 200);

  server.stop();
  t.join();
}
