#pragma once

// USGS daily-discharge ingestion, stage-discharge conversion and annual maxima.

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heighten::hydro {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Days since 1970-01-01 (proleptic Gregorian).
  long days_since_epoch() const;
  static Date from_days(long days);
  static Date parse(std::string_view iso);  // YYYY-MM-DD
  std::string iso() const;
};

bool is_leap_year(int year);
int days_in_year(int year);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One daily value. `discharge_cfs` is empty for missing or qualified-missing
/// days (USGS codes such as Ice, Eqp, Ssn), which are kept as explicit gaps.
struct DailyDischarge {
  Date date;
  std::optional<double> discharge_cfs;
  std::string qualifier;
};

struct DischargeSeries {
  std::string gage_id;
  std::vector<DailyDischarge> records;

  std::size_t gap_count() const;
};

DischargeSeries parse_usgs_rdb(std::string_view text);
std::string write_usgs_rdb(const DischargeSeries& series);

enum class RatingInterpolation { Linear, LogLog };

struct RatingPoint {
  double discharge_cfs;
  double stage_ft;
};

struct StageEstimate {
  double stage_ft;
  bool extrapolated;
};

class RatingCurve {
 public:
  /// Throws ValidationError unless discharge is strictly increasing, stage is
  /// non-decreasing and there are at least two points.
  explicit RatingCurve(std::vector<RatingPoint> points,
                       RatingInterpolation mode = RatingInterpolation::Linear);

  const std::vector<RatingPoint>& points() const { return points_; }
  RatingInterpolation mode() const { return mode_; }

  /// Throws std::domain_error for q <= 0.
  StageEstimate stage(double q_cfs) const;

 private:
  std::vector<RatingPoint> points_;
  RatingInterpolation mode_;
};

RatingCurve parse_rating_csv(std::string_view text,
                             RatingInterpolation mode = RatingInterpolation::Linear);

StageEstimate discharge_to_stage(const RatingCurve& curve, double q_cfs);

struct DailyLevel {
  Date date;
  std::optional<double> level_ft;
};

struct WaterLevelSeries {
  std::string gage_id;
  std::vector<DailyLevel> records;
  std::size_t extrapolated_days = 0;
};

/// Zero discharge has no stage on a rating curve; such days become gaps.
WaterLevelSeries to_water_levels(const DischargeSeries& series, const RatingCurve& curve);

enum class YearConvention { Calendar, Water };  // Water: Oct 1 .. Sep 30, labelled by the ending year

struct AnnualMaximum {
  int year;
  double level_ft;
  double coverage;
};

struct AnnualMaxima {
  std::vector<AnnualMaximum> entries;
  /// Years with coverage below the threshold; level is the max over valid days
  /// (NaN when the year has none).
  std::vector<AnnualMaximum> excluded;

  std::vector<double> levels() const;
};

/// Throws std::invalid_argument on an empty series.
AnnualMaxima annual_maxima(const WaterLevelSeries& levels, double min_coverage = 0.9,
                           YearConvention convention = YearConvention::Calendar);

std::string annual_maxima_csv(const AnnualMaxima& maxima);
AnnualMaxima parse_annual_maxima_csv(std::string_view text);

}  // namespace heighten::hydro
