#pragma once

#include <map>
#include <string>
#include <vector>

#include "dchub/domain/types.hpp"

namespace dchub {

/// Hourly resource usage of one cluster; each row holds CPU, GPU, MEM-CPU, MEM-GPU.
using UsageTable = std::vector<PerResource<double>>;

struct PowerModelFit {
  double rho_intercept_kw = 0.0;
  PerResource<double> rho_coeff_kw{};
  PerResource<bool> dropped{};  // zero-variance columns, reported with coefficient 0
};

/// Ordinary least-squares affine fit of cluster power on resource usage.
/// Zero-variance columns are dropped before fitting; a rank-deficient design
/// raises FitError naming the collinear columns.
PowerModelFit fit_cluster_power_model(const UsageTable& usage, const std::vector<double>& power_kw);

/// Mean over rows of memory usage / compute usage, ignoring rows with zero
/// compute usage. Throws FitError if every row has zero compute usage.
double fit_memory_ratio(const UsageTable& usage, Resource compute);

/// Ratios for MEM-CPU and MEM-GPU of every cluster, keyed by cluster id.
std::map<std::string, PerCompute<double>> fit_memory_ratios(
    const std::map<std::string, UsageTable>& usage_by_cluster);

}  // namespace dchub
