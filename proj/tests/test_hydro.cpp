#include <doctest.h>

#include <map>
#include <random>

#include "heighten/hydro_ingest.hpp"
#include "heighten/io.hpp"
#include "support.hpp"

using namespace heighten;
using namespace heighten::hydro;

namespace {

const char* kHeader =
    "# comment\n"
    "agency_cd\tsite_no\tdatetime\t1_00060_00003\t1_00060_00003_cd\n"
    "5s\t15s\t20d\t14n\t10s\n";

WaterLevelSeries daily(Date start, const std::vector<std::optional<double>>& values) {
  WaterLevelSeries s;
  long d = start.days_since_epoch();
  for (const auto& v : values) s.records.push_back({Date::from_days(d++), v});
  return s;
}

std::vector<std::optional<double>> year_of(int year, double level) {
  return std::vector<std::optional<double>>(days_in_year(year), level);
}

}  // namespace

TEST_CASE("rdb rows map to discharge records") {
  const std::string text = std::string(kHeader) +
                           "USGS\t01554000\t2001-01-01\t1000\tA\n"
                           "USGS\t01554000\t2001-01-02\t1200\tA\n";
  const auto s = parse_usgs_rdb(text);
  REQUIRE(s.records.size() == 2);
  CHECK(s.gage_id == "01554000");
  CHECK(*s.records[0].discharge_cfs == 1000);
  CHECK(*s.records[1].discharge_cfs == 1200);
  CHECK(s.records[1].date == Date{2001, 1, 2});
}

TEST_CASE("empty and qualifier-only values become explicit gaps") {
  const std::string text = std::string(kHeader) +
                           "USGS\t01554000\t2001-01-01\t\tA\n"
                           "USGS\t01554000\t2001-01-02\tIce\t\n"
                           "USGS\t01554000\t2001-01-03\t900\tA:e\n";
  const auto s = parse_usgs_rdb(text);
  REQUIRE(s.records.size() == 3);
  CHECK_FALSE(s.records[0].discharge_cfs);
  CHECK_FALSE(s.records[1].discharge_cfs);
  CHECK(s.records[1].qualifier == "Ice");
  CHECK(*s.records[2].discharge_cfs == 900);
  CHECK(s.gap_count() == 2);
}

TEST_CASE("malformed rdb input is rejected with its line number") {
  SUBCASE("missing discharge column") {
    CHECK_THROWS_AS(parse_usgs_rdb("agency_cd\tsite_no\tdatetime\nUSGS\t1\t2001-01-01\n"), ParseError);
  }
  SUBCASE("bad date") {
    try {
      parse_usgs_rdb(std::string(kHeader) + "USGS\t01554000\t2001-13-01\t5\tA\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("negative discharge") {
    CHECK_THROWS_AS(parse_usgs_rdb(std::string(kHeader) + "USGS\t01554000\t2001-01-01\t-5\tA\n"), ValidationError);
  }
  SUBCASE("dates out of order") {
    CHECK_THROWS_AS(parse_usgs_rdb(std::string(kHeader) +
                                   "USGS\t01554000\t2001-01-02\t5\tA\nUSGS\t01554000\t2001-01-01\t5\tA\n"),
                    ValidationError);
  }
  SUBCASE("no format row") { CHECK_THROWS_AS(parse_usgs_rdb("# only comments\n"), ParseError); }
}

TEST_CASE("shipped gage record spans 1937 to 2019") {
  const auto s = parse_usgs_rdb(io::read_file(support::data_dir() / "gage" / "usgs_01554000_dv.rdb"));
  REQUIRE_FALSE(s.records.empty());
  CHECK(s.records.front().date.year == 1937);
  CHECK(s.records.back().date.year == 2019);
}

TEST_CASE("rdb write then parse preserves every date and value") {
  const auto original = parse_usgs_rdb(io::read_file(support::data_dir() / "gage" / "usgs_01554000_dv.rdb"));
  const auto again = parse_usgs_rdb(write_usgs_rdb(original));
  REQUIRE(again.records.size() == original.records.size());
  bool same = true;
  for (std::size_t i = 0; i < original.records.size(); ++i) {
    same = same && again.records[i].date == original.records[i].date &&
           again.records[i].discharge_cfs == original.records[i].discharge_cfs;
  }
  CHECK(same);
  CHECK(again.gap_count() == original.gap_count());
}

TEST_CASE("rating curve interpolation") {
  const RatingCurve curve({{1000, 2.0}, {5000, 6.0}, {20000, 12.0}});
  CHECK(discharge_to_stage(curve, 5000).stage_ft == 6.0);
  CHECK_FALSE(discharge_to_stage(curve, 5000).extrapolated);
  CHECK(discharge_to_stage(curve, 3000).stage_ft == doctest::Approx(4.0));
  CHECK(discharge_to_stage(curve, 12500).stage_ft == doctest::Approx(9.0));

  // line through the last two knots
  const double q = 30000;
  const double slope = (12.0 - 6.0) / (20000.0 - 5000.0);
  const auto above = discharge_to_stage(curve, q);
  CHECK(above.extrapolated);
  CHECK(above.stage_ft == doctest::Approx(12.0 + slope * (q - 20000.0)).epsilon(1e-12));

  CHECK(discharge_to_stage(curve, 500).extrapolated);
  CHECK_THROWS_AS(discharge_to_stage(curve, 0), std::domain_error);
  CHECK_THROWS_AS(RatingCurve({{1000, 2.0}, {1000, 3.0}}), ValidationError);
  CHECK_THROWS_AS(RatingCurve({{1000, 3.0}, {2000, 2.0}}), ValidationError);
  CHECK_THROWS_AS(RatingCurve({{1000, 3.0}}), ValidationError);
}

TEST_CASE("stage is monotone in discharge") {
  const auto curve = parse_rating_csv(io::read_file(support::data_dir() / "gage" / "usgs_01554000_rating.csv"));
  for (auto mode : {RatingInterpolation::Linear, RatingInterpolation::LogLog}) {
    const RatingCurve c(curve.points(), mode);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> logq(std::log(100.0), std::log(1e6));
    std::vector<double> qs(5000);
    for (auto& q : qs) q = std::exp(logq(rng));
    std::sort(qs.begin(), qs.end());
    double prev = -INFINITY;
    bool monotone = true;
    for (double q : qs) {
      const double s = c.stage(q).stage_ft;
      monotone = monotone && s >= prev;
      prev = s;
    }
    CHECK(monotone);
  }
}

TEST_CASE("annual maxima of simple series") {
  SUBCASE("constant year") {
    const auto m = annual_maxima(daily({2001, 1, 1}, year_of(2001, 10.0)));
    REQUIRE(m.entries.size() == 1);
    CHECK(m.entries[0].year == 2001);
    CHECK(m.entries[0].level_ft == 10.0);
    CHECK(m.entries[0].coverage == 1.0);
  }
  SUBCASE("two years") {
    auto v = year_of(2001, 3.0);
    v[100] = 12.0;
    auto w = year_of(2002, 4.0);
    w[200] = 15.0;
    v.insert(v.end(), w.begin(), w.end());
    const auto m = annual_maxima(daily({2001, 1, 1}, v));
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].year == 2001);
    CHECK(m.entries[0].level_ft == 12.0);
    CHECK(m.entries[1].year == 2002);
    CHECK(m.entries[1].level_ft == 15.0);
  }
  SUBCASE("half-covered year is excluded and reported") {
    auto v = year_of(2001, 5.0);
    for (std::size_t i = 0; i < v.size() / 2 + 1; ++i) v[i] = std::nullopt;
    const auto m = annual_maxima(daily({2001, 1, 1}, v), 0.8);
    CHECK(m.entries.empty());
    REQUIRE(m.excluded.size() == 1);
    CHECK(m.excluded[0].year == 2001);
    CHECK(m.excluded[0].coverage < 0.5);
  }
  SUBCASE("water years end in September") {
    auto v = year_of(2001, 1.0);
    const auto oct1 = Date{2001, 10, 1}.days_since_epoch() - Date{2001, 1, 1}.days_since_epoch();
    v[oct1] = 9.0;
    const auto m = annual_maxima(daily({2001, 1, 1}, v), 0.0, YearConvention::Water);
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].year == 2001);
    CHECK(m.entries[0].level_ft == 1.0);
    CHECK(m.entries[1].year == 2002);
    CHECK(m.entries[1].level_ft == 9.0);
  }
  CHECK_THROWS_AS(annual_maxima(WaterLevelSeries{}), std::invalid_argument);
}

TEST_CASE("annual maxima equal a brute-force maximum per year") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 30);
  std::bernoulli_distribution gap(0.03);
  std::vector<std::optional<double>> v(365 * 12 + 3);
  for (auto& x : v) x = gap(rng) ? std::nullopt : std::optional<double>(u(rng));
  const auto series = daily({1990, 1, 1}, v);
  std::map<int, double> oracle;
  for (const auto& r : series.records)
    if (r.level_ft) oracle[r.date.year] = std::max(oracle.count(r.date.year) ? oracle[r.date.year] : -1.0, *r.level_ft);
  const auto m = annual_maxima(series, 0.0);
  REQUIRE(m.entries.size() == oracle.size());
  for (const auto& e : m.entries) CHECK(e.level_ft == oracle.at(e.year));
}

TEST_CASE("annual maxima csv round trip") {
  AnnualMaxima m;
  m.entries = {{2000, 12.125, 1.0}, {2001, 15.0 / 7.0, 0.95}};
  const auto back = parse_annual_maxima_csv(annual_maxima_csv(m));
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].level_ft == m.entries[1].level_ft);
  CHECK(back.entries[1].coverage == m.entries[1].coverage);
}

TEST_CASE("zero discharge has no stage") {
  DischargeSeries s;
  s.records = {{{2001, 1, 1}, 0.0, "A"}, {{2001, 1, 2}, 2000.0, "A"}};
  const auto lv = to_water_levels(s, RatingCurve({{1000, 2.0}, {5000, 6.0}}));
  CHECK_FALSE(lv.records[0].level_ft);
  CHECK(*lv.records[1].level_ft == doctest::Approx(3.0));
}
