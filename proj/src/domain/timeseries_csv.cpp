#include "dchub/domain/timeseries_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "dchub/domain/errors.hpp"

namespace dchub {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  while (true) {
    const auto comma = line.find(',');
    cells.emplace_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError(source + ": missing column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty()) {
    throw InputError(source + ":" + std::to_string(row + 2) + ": column '" + header.at(col) +
                     "': not a number: '" + cell + "'");
  }
  return v;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  table.source = source;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    if (line.find('"') != std::string::npos) {
      throw InputError(source + ":" + std::to_string(lineno) + ": quoted fields are not supported");
    }
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw InputError(source + ": empty CSV file");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return parse_csv(in, path.string());
}

TimeSeries read_series_csv(const std::filesystem::path& path, std::string_view column) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "timestamp") {
    throw InputError(path.string() + ": header must be 'timestamp,<series>'");
  }
  const std::size_t col = column.empty() ? 1 : table.column(column);
  TimeSeries series;
  series.name = table.header[col];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      series.timestamps.push_back(parse_timestamp(table.rows[r][0]));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(r + 2) + ": " + e.what());
    }
    series.values.push_back(table.number(r, col));
  }
  return series;
}

void write_series_csv(std::ostream& out, const std::string& name, const TimeGrid& grid,
                      const std::vector<double>& values) {
  out << "timestamp," << name << "\n";
  const auto step = std::chrono::seconds(std::llround(grid.step_hours * 3600.0));
  for (std::size_t t = 0; t < values.size(); ++t) {
    out << format_timestamp(grid.start + step * static_cast<long long>(t)) << ','
        << format_number(values[t]) << "\n";
  }
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace dchub
