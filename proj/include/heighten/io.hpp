#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heighten::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// FNV-1a 64-bit, rendered as 16 hex digits. Used for artifact integrity
/// checks and config fingerprints.
std::string content_hash(std::string_view content);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

/// Lines of a simple comma-separated table, without the header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(std::string_view name) const;
};
CsvTable parse_csv(std::string_view text);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

/// Shortest round-trippable rendering of a double.
std::string fmt_double(double v);

/// Mean and sample quantile helpers shared by report code.
double mean(std::span<const double> v);
double quantile(std::vector<double> v, double q);

}  // namespace heighten::io
