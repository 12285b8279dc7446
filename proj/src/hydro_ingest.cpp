#include "heighten/hydro_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "heighten/io.hpp"

namespace heighten::hydro {

namespace {

// Howard Hinnant's civil-date algorithms.
long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap_year(y) ? 29 : kDays[m - 1];
}

bool is_numeric(std::string_view s) {
  if (s.empty()) return false;
  try {
    io::parse_double(s);
    return true;
  } catch (const io::IoError&) {
    return false;
  }
}

}  // namespace

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }
int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

long Date::days_since_epoch() const {
  return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

Date Date::from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date Date::parse(std::string_view iso) {
  iso = io::trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw std::invalid_argument(fmt::format("bad date '{}'", iso));
  Date d{static_cast<int>(io::parse_int(iso.substr(0, 4))), static_cast<int>(io::parse_int(iso.substr(5, 2))),
         static_cast<int>(io::parse_int(iso.substr(8, 2)))};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
    throw std::invalid_argument(fmt::format("bad date '{}'", iso));
  return d;
}

std::string Date::iso() const { return fmt::format("{:04d}-{:02d}-{:02d}", year, month, day); }

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::size_t DischargeSeries::gap_count() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [](const auto& r) { return !r.discharge_cfs; }));
}

DischargeSeries parse_usgs_rdb(std::string_view text) {
  DischargeSeries out;
  std::vector<std::string> header;
  bool format_seen = false;
  std::size_t date_col = 0, value_col = 0, site_col = 0;
  std::optional<std::size_t> code_col;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    auto fields = io::split(line, '\t');
    if (header.empty()) {
      for (auto f : fields) header.emplace_back(io::trim(f));
      auto find = [&](auto pred) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
          if (pred(header[i])) return i;
        return std::nullopt;
      };
      auto d = find([](const std::string& h) { return h == "datetime"; });
      auto s = find([](const std::string& h) { return h == "site_no"; });
      // daily mean discharge is parameter 00060, statistic 00003
      auto v = find([](const std::string& h) {
        return h.size() >= 12 && h.ends_with("_00060_00003");
      });
      if (!d || !s || !v)
        throw ParseError(line_no, "header must contain site_no, datetime and a *_00060_00003 column");
      date_col = *d;
      site_col = *s;
      value_col = *v;
      code_col = find([&](const std::string& h) { return h == header[*v] + "_cd"; });
      continue;
    }
    if (!format_seen) {
      // format row, e.g. "5s 15s 20d 14n 10s"
      if (fields.size() != header.size())
        throw ParseError(line_no, "format row does not match header width");
      for (auto f : fields) {
        f = io::trim(f);
        if (f.empty() || (f.back() != 's' && f.back() != 'd' && f.back() != 'n'))
          throw ParseError(line_no, fmt::format("malformed format spec '{}'", f));
      }
      format_seen = true;
      continue;
    }
    if (fields.size() < header.size()) {
      // trailing empty qualifier columns are sometimes trimmed
      if (fields.size() <= value_col)
        throw ParseError(line_no, "data row is shorter than the header");
    }
    DailyDischarge rec;
    try {
      rec.date = Date::parse(fields[date_col]);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (out.gage_id.empty()) out.gage_id = std::string(io::trim(fields[site_col]));
    const auto value = io::trim(fields[value_col]);
    if (is_numeric(value)) {
      const double q = io::parse_double(value);
      if (q < 0) throw ValidationError(fmt::format("line {}: negative discharge", line_no));
      rec.discharge_cfs = q;
    }
    if (code_col && *code_col < fields.size()) rec.qualifier = std::string(io::trim(fields[*code_col]));
    if (!rec.discharge_cfs && !value.empty()) rec.qualifier = std::string(value);
    if (!out.records.empty() && !(out.records.back().date < rec.date))
      throw ValidationError(fmt::format("line {}: date {} is not after {}", line_no, rec.date.iso(),
                                        out.records.back().date.iso()));
    out.records.push_back(std::move(rec));
  }
  if (header.empty()) throw ParseError(line_no, "no header row");
  if (!format_seen) throw ParseError(line_no, "no format row");
  return out;
}

std::string write_usgs_rdb(const DischargeSeries& series) {
  std::string out = "# written by heighten\n";
  out += "agency_cd\tsite_no\tdatetime\t1_00060_00003\t1_00060_00003_cd\n";
  out += "5s\t15s\t20d\t14n\t10s\n";
  for (const auto& r : series.records) {
    const bool gap_marker = !r.discharge_cfs && !r.qualifier.empty();
    out += fmt::format("USGS\t{}\t{}\t{}\t{}\n", series.gage_id, r.date.iso(),
                       r.discharge_cfs ? io::fmt_double(*r.discharge_cfs) : (gap_marker ? r.qualifier : ""),
                       gap_marker ? "" : r.qualifier);
  }
  return out;
}

RatingCurve::RatingCurve(std::vector<RatingPoint> points, RatingInterpolation mode)
    : points_(std::move(points)), mode_(mode) {
  if (points_.size() < 2) throw ValidationError("rating curve needs at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].discharge_cfs > points_[i - 1].discharge_cfs))
      throw ValidationError("rating discharge must be strictly increasing");
    if (points_[i].stage_ft < points_[i - 1].stage_ft)
      throw ValidationError("rating stage must be non-decreasing");
  }
  if (mode_ == RatingInterpolation::LogLog && (points_.front().discharge_cfs <= 0 || points_.front().stage_ft <= 0))
    throw ValidationError("log-log rating needs positive discharge and stage");
}

StageEstimate RatingCurve::stage(double q) const {
  if (!(q > 0)) throw std::domain_error("discharge must be positive");
  const auto& p = points_;
  const bool below = q < p.front().discharge_cfs;
  const bool above = q > p.back().discharge_cfs;
  std::size_t i = 0;
  if (above) {
    i = p.size() - 2;
  } else if (!below) {
    auto it = std::upper_bound(p.begin(), p.end(), q,
                               [](double v, const RatingPoint& pt) { return v < pt.discharge_cfs; });
    i = static_cast<std::size_t>(std::distance(p.begin(), it));
    i = i == 0 ? 0 : std::min(i - 1, p.size() - 2);
  }
  const auto& a = p[i];
  const auto& b = p[i + 1];
  double s = 0;
  if (mode_ == RatingInterpolation::Linear) {
    s = a.stage_ft + (q - a.discharge_cfs) * (b.stage_ft - a.stage_ft) / (b.discharge_cfs - a.discharge_cfs);
  } else {
    const double t = std::log(q / a.discharge_cfs) / std::log(b.discharge_cfs / a.discharge_cfs);
    s = std::exp(std::log(a.stage_ft) + t * (std::log(b.stage_ft) - std::log(a.stage_ft)));
  }
  return {s, below || above};
}

RatingCurve parse_rating_csv(std::string_view text, RatingInterpolation mode) {
  const auto table = io::parse_csv(text);
  const auto qc = table.column("discharge");
  const auto sc = table.column("stage");
  std::vector<RatingPoint> pts;
  pts.reserve(table.rows.size());
  for (const auto& row : table.rows) pts.push_back({io::parse_double(row[qc]), io::parse_double(row[sc])});
  return RatingCurve(std::move(pts), mode);
}

StageEstimate discharge_to_stage(const RatingCurve& curve, double q_cfs) { return curve.stage(q_cfs); }

WaterLevelSeries to_water_levels(const DischargeSeries& series, const RatingCurve& curve) {
  WaterLevelSeries out;
  out.gage_id = series.gage_id;
  out.records.reserve(series.records.size());
  for (const auto& r : series.records) {
    DailyLevel lvl{r.date, std::nullopt};
    if (r.discharge_cfs && *r.discharge_cfs > 0) {
      const auto est = curve.stage(*r.discharge_cfs);
      lvl.level_ft = est.stage_ft;
      out.extrapolated_days += est.extrapolated;
    }
    out.records.push_back(lvl);
  }
  return out;
}

std::vector<double> AnnualMaxima::levels() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.level_ft);
  return v;
}

AnnualMaxima annual_maxima(const WaterLevelSeries& levels, double min_coverage, YearConvention convention) {
  if (levels.records.empty()) throw std::invalid_argument("annual_maxima: empty series");
  struct Acc {
    double max = -INFINITY;
    int valid = 0;
  };
  std::map<int, Acc> years;
  for (const auto& r : levels.records) {
    int y = r.date.year;
    if (convention == YearConvention::Water && r.date.month >= 10) ++y;
    auto& acc = years[y];
    if (r.level_ft) {
      acc.max = std::max(acc.max, *r.level_ft);
      ++acc.valid;
    }
  }
  AnnualMaxima out;
  for (const auto& [year, acc] : years) {
    // a water year Y spans Oct (Y-1) .. Sep Y, whose length follows Feb of Y
    const int len = days_in_year(year);
    const double coverage = std::clamp(static_cast<double>(acc.valid) / len, 0.0, 1.0);
    AnnualMaximum e{year, acc.valid > 0 ? acc.max : std::nan(""), coverage};
    if (acc.valid > 0 && coverage >= min_coverage)
      out.entries.push_back(e);
    else
      out.excluded.push_back(e);
  }
  return out;
}

std::string annual_maxima_csv(const AnnualMaxima& maxima) {
  std::string out = "year,level,coverage\n";
  for (const auto& e : maxima.entries)
    out += fmt::format("{},{},{}\n", e.year, io::fmt_double(e.level_ft), io::fmt_double(e.coverage));
  return out;
}

AnnualMaxima parse_annual_maxima_csv(std::string_view text) {
  const auto t = io::parse_csv(text);
  const auto yc = t.column("year"), lc = t.column("level"), cc = t.column("coverage");
  AnnualMaxima out;
  for (const auto& row : t.rows)
    out.entries.push_back({static_cast<int>(io::parse_int(row[yc])), io::parse_double(row[lc]),
                           io::parse_double(row[cc])});
  return out;
}

}  // namespace heighten::hydro
