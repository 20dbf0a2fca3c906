#pragma once

#include <filesystem>
#include <vector>

namespace dchub {

/// Imbalance prices modeled as multiples of the spot price.
struct ImbalanceFactors {
  double k_short = 1.0;
  double k_long = 1.0;
};

/// Each factor is the lower (type-1) empirical quantile at 1 - target of
/// actual/spot over rows with positive spot, so that k * spot underestimates
/// the actual price on a `target` fraction of those rows.
ImbalanceFactors calibrate_imbalance_factors(const std::vector<double>& spot,
                                             const std::vector<double>& price_short,
                                             const std::vector<double>& price_long,
                                             double target_underestimation);

/// Type-1 empirical quantile (inverse of the empirical CDF).
double lower_quantile(std::vector<double> values, double p);

/// Fraction of rows with spot > 0 where k * spot < actual.
double underestimation_fraction(const std::vector<double>& spot, const std::vector<double>& actual,
                                double k);

struct ImbalanceHistory {
  std::vector<double> spot, price_short, price_long;
};

/// CSV with columns `spot,short,long` (any further columns, e.g. a timestamp, are ignored).
ImbalanceHistory read_imbalance_history(const std::filesystem::path& path);

}  // namespace dchub
