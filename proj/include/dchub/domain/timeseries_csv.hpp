#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dchub/domain/types.hpp"

namespace dchub {

/// Comma-separated table with a header row. Quoting is not supported; the
/// files this project reads are purely numeric apart from timestamps.
struct CsvTable {
  std::string source;  // file name used in error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name; throws InputError if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

struct TimeSeries {
  std::string name;
  std::vector<std::chrono::sys_seconds> timestamps;
  std::vector<double> values;
};

/// Reads `timestamp,<series>`; `column` selects one of several value columns
/// (default: the first after the timestamp).
TimeSeries read_series_csv(const std::filesystem::path& path, std::string_view column = {});

void write_series_csv(std::ostream& out, const std::string& name, const TimeGrid& grid,
                      const std::vector<double>& values);

/// Shortest round-trip decimal representation, locale independent.
std::string format_number(double v);

}  // namespace dchub
