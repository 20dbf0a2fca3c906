#include "dchub/scenario/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"

namespace dchub {

double lower_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double n = double(values.size());
  // Guard n*p against representation error (e.g. 5 * 0.6).
  auto k = static_cast<std::size_t>(std::ceil(n * p - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

namespace {

std::vector<double> ratios(const std::vector<double>& spot, const std::vector<double>& actual) {
  std::vector<double> out;
  for (std::size_t i = 0; i < spot.size(); ++i) {
    if (spot[i] > 0.0) out.push_back(actual[i] / spot[i]);
  }
  return out;
}

}  // namespace

ImbalanceFactors calibrate_imbalance_factors(const std::vector<double>& spot,
                                             const std::vector<double>& price_short,
                                             const std::vector<double>& price_long,
                                             double target_underestimation) {
  if (spot.size() != price_short.size() || spot.size() != price_long.size()) {
    throw InputError("imbalance calibration series are not aligned");
  }
  if (spot.size() < 10) throw InputError("imbalance calibration needs at least 10 rows");
  if (!(target_underestimation > 0.0 && target_underestimation < 1.0)) {
    throw InputError("underestimation target must lie in (0, 1)");
  }
  const auto rs = ratios(spot, price_short);
  const auto rl = ratios(spot, price_long);
  if (rs.empty()) throw InputError("imbalance calibration: no rows with positive spot price");
  const double p = 1.0 - target_underestimation;
  ImbalanceFactors f{lower_quantile(rs, p), lower_quantile(rl, p)};
  if (!std::isfinite(f.k_short) || !std::isfinite(f.k_long) || f.k_short < 0 || f.k_long < 0) {
    throw InputError("imbalance calibration produced a negative or non-finite factor");
  }
  return f;
}

double underestimation_fraction(const std::vector<double>& spot, const std::vector<double>& actual,
                                double k) {
  std::size_t used = 0, under = 0;
  for (std::size_t i = 0; i < spot.size(); ++i) {
    if (spot[i] <= 0.0) continue;
    ++used;
    if (k * spot[i] < actual[i]) ++under;
  }
  return used == 0 ? 0.0 : double(under) / double(used);
}

ImbalanceHistory read_imbalance_history(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const auto cs = table.column("spot"), cshort = table.column("short"), clong = table.column("long");
  ImbalanceHistory h;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    h.spot.push_back(table.number(r, cs));
    h.price_short.push_back(table.number(r, cshort));
    h.price_long.push_back(table.number(r, clong));
  }
  return h;
}

}  // namespace dchub
