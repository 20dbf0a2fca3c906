#include "dchub/domain/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "dchub/domain/errors.hpp"

namespace dchub {

PowerModelFit fit_cluster_power_model(const UsageTable& usage, const std::vector<double>& power_kw) {
  if (usage.size() != power_kw.size()) {
    throw FitError("usage history has " + std::to_string(usage.size()) + " rows but power history " +
                   std::to_string(power_kw.size()));
  }
  std::set<PerResource<double>> distinct(usage.begin(), usage.end());
  if (distinct.size() < 2) {
    throw FitError("power model fit needs at least 2 distinct usage rows, got " +
                   std::to_string(distinct.size()));
  }

  PowerModelFit fit;
  std::vector<Resource> kept;
  for (Resource r : kAllResources) {
    const double first = usage.front()[index_of(r)];
    const bool constant = std::all_of(usage.begin(), usage.end(), [&](const auto& row) {
      return row[index_of(r)] == first;
    });
    fit.dropped[index_of(r)] = constant;
    if (!constant) kept.push_back(r);
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(usage.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(kept.size()) + 1;
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      design(i, Eigen::Index(j) + 1) = usage[std::size_t(i)][index_of(kept[j])];
    }
    target(i) = power_kw[std::size_t(i)];
  }

  // Column scaling keeps the rank decision independent of resource units.
  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    // Each dependent column is a combination of the leading pivot columns;
    // report every column that takes part in such a combination.
    const Eigen::Index rank = qr.rank();
    const auto perm = qr.colsPermutation().indices();
    const Eigen::MatrixXd r = qr.matrixR().topRows(rank).template triangularView<Eigen::Upper>();
    std::vector<bool> involved(std::size_t(cols), false);
    for (Eigen::Index k = rank; k < cols; ++k) {
      involved[std::size_t(perm(k))] = true;
      const Eigen::VectorXd x =
          r.topLeftCorner(rank, rank).triangularView<Eigen::Upper>().solve(r.block(0, k, rank, 1));
      for (Eigen::Index j = 0; j < rank; ++j)
        if (std::abs(x(j)) > 1e-8) involved[std::size_t(perm(j))] = true;
    }
    std::string names;
    for (Eigen::Index col = 0; col < cols; ++col) {
      if (!involved[std::size_t(col)]) continue;
      if (!names.empty()) names += ", ";
      names += col == 0 ? std::string("intercept") : std::string(to_string(kept[std::size_t(col - 1)]));
    }
    throw FitError("rank-deficient usage design matrix; collinear columns: " + names);
  }
  const Eigen::VectorXd beta = scale.cwiseInverse().asDiagonal() * qr.solve(target);
  fit.rho_intercept_kw = beta(0);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    fit.rho_coeff_kw[index_of(kept[j])] = beta(Eigen::Index(j) + 1);
  }
  return fit;
}

double fit_memory_ratio(const UsageTable& usage, Resource compute) {
  const Resource mem = memory_of(compute);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : usage) {
    const double c = row[index_of(compute)];
    if (c == 0.0) continue;
    sum += row[index_of(mem)] / c;
    ++n;
  }
  if (n == 0) {
    throw FitError("cannot fit " + std::string(to_string(mem)) + " ratio: every row has zero " +
                   std::string(to_string(compute)) + " usage");
  }
  return sum / double(n);
}

std::map<std::string, PerCompute<double>> fit_memory_ratios(
    const std::map<std::string, UsageTable>& usage_by_cluster) {
  std::map<std::string, PerCompute<double>> out;
  for (const auto& [id, table] : usage_by_cluster) {
    PerCompute<double> ratios{};
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      try {
        ratios[k] = fit_memory_ratio(table, kComputeResources[k]);
      } catch (const FitError& e) {
        throw FitError("cluster " + id + ": " + e.what());
      }
    }
    out.emplace(id, ratios);
  }
  return out;
}

}  // namespace dchub
