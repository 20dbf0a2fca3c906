#include "dchub/scenario/bootstrap.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/scenario/rng.hpp"

namespace dchub {

std::vector<std::vector<double>> bootstrap_scenarios(const std::vector<double>& point_forecast,
                                                     const ResidualHistory& history, std::size_t n,
                                                     std::uint64_t seed, SeriesDomain domain,
                                                     std::uint64_t stream) {
  if (history.residuals.empty()) throw InputError("residual history is empty");
  if (n == 0) throw InputError("bootstrap needs n >= 1");
  for (std::size_t d = 0; d < history.days(); ++d) {
    if (history.residuals[d].size() != point_forecast.size()) {
      throw InputError("residual row " + std::to_string(d) + " has " +
                       std::to_string(history.residuals[d].size()) + " steps, forecast has " +
                       std::to_string(point_forecast.size()));
    }
  }
  std::vector<std::vector<double>> out(n, point_forecast);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = uniform_index(counter_hash(seed, stream, i), history.days());
    const auto& r = history.residuals[row];
    for (std::size_t t = 0; t < point_forecast.size(); ++t) {
      double v = point_forecast[t] + r[t];
      if (domain == SeriesDomain::nonnegative) v = std::max(v, 0.0);
      if (domain == SeriesDomain::unit_interval) v = std::clamp(v, 0.0, 1.0);
      out[i][t] = v;
    }
  }
  return out;
}

ResidualHistory read_residual_history(const std::filesystem::path& path, std::size_t steps) {
  const CsvTable table = read_csv(path);
  ResidualHistory history;
  const bool long_format = table.header.size() == 3 && table.header[0] == "date" &&
                           table.header[1] == "hour" && table.header[2] == "value";
  if (long_format) {
    std::map<std::string, std::vector<double>> days;
    std::map<std::string, std::vector<bool>> seen;
    std::vector<std::string> order;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& date = table.rows[r][0];
      const double hour = table.number(r, 1);
      const auto h = static_cast<std::size_t>(hour);
      if (hour < 0 || double(h) != hour || h >= steps) {
        throw InputError(path.string() + ":" + std::to_string(r + 2) + ": hour must be an integer in [0," +
                         std::to_string(steps) + ")");
      }
      if (!days.count(date)) {
        days[date].assign(steps, 0.0);
        seen[date].assign(steps, false);
        order.push_back(date);
      }
      if (seen[date][h]) {
        throw InputError(path.string() + ":" + std::to_string(r + 2) + ": duplicate hour for " + date);
      }
      seen[date][h] = true;
      days[date][h] = table.number(r, 2);
    }
    for (const auto& date : order) {
      if (std::find(seen[date].begin(), seen[date].end(), false) != seen[date].end()) {
        throw InputError(path.string() + ": day " + date + " is incomplete");
      }
      history.residuals.push_back(days[date]);
    }
  } else {
    const std::size_t first = (!table.header.empty() && table.header[0] == "date") ? 1 : 0;
    if (table.header.size() - first != steps) {
      throw InputError(path.string() + ": expected " + std::to_string(steps) +
                       " value columns per day, got " + std::to_string(table.header.size() - first));
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      std::vector<double> row;
      for (std::size_t c = first; c < table.header.size(); ++c) row.push_back(table.number(r, c));
      history.residuals.push_back(std::move(row));
    }
  }
  if (history.residuals.empty()) throw InputError(path.string() + ": residual history is empty");
  return history;
}

}  // namespace dchub
