#include "dchub/scenario/redistribute.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dchub/domain/errors.hpp"

namespace dchub {

namespace {

// Adds `units` resource-steps to `series` by water filling under `cap`.
void water_fill(std::vector<double>& series, double cap, double units, const std::string& where) {
  if (units <= 0.0) return;
  const std::size_t T = series.size();
  std::vector<double> room(T);
  for (std::size_t t = 0; t < T; ++t) room[t] = std::max(0.0, cap - series[t]);
  const double total_room = std::accumulate(room.begin(), room.end(), 0.0);
  if (units > total_room * (1.0 + 1e-12) + 1e-9) {
    throw InfeasibleError(where + ": flexible demand of " + std::to_string(units) +
                          " resource-steps exceeds remaining capacity " + std::to_string(total_room));
  }
  std::vector<double> sorted = room;
  std::sort(sorted.begin(), sorted.end());
  // Level x with sum_t min(room_t, x) = units.
  double remaining = units;
  double level = sorted.back();
  for (std::size_t i = 0; i < T; ++i) {
    const double open = double(T - i);
    if (sorted[i] * open >= remaining) {
      level = remaining / open;
      break;
    }
    remaining -= sorted[i];
  }
  double added = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double a = std::min(room[t], level);
    series[t] += a;
    added += a;
  }
  // Push the rounding residue onto the step with the most room left.
  const double residue = units - added;
  if (residue != 0.0) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < T; ++t) {
      if (cap - series[t] > cap - series[best]) best = t;
    }
    series[best] += residue;
  }
}

void check_shape(const WorkloadScenario& w, const DataCenterSpec& dc, const TimeGrid& grid) {
  if (w.clusters.size() != dc.clusters.size()) {
    throw InputError("workload has " + std::to_string(w.clusters.size()) + " clusters, hub has " +
                     std::to_string(dc.clusters.size()));
  }
  for (const auto& c : w.clusters) {
    for (const auto& s : c.inelastic) {
      if (s.size() != grid.steps_per_day) throw InputError("inelastic series length differs from grid");
    }
  }
}

}  // namespace

WorkloadScenario redistribute_flexible_partial(const WorkloadScenario& workload,
                                               const DataCenterSpec& dc, const TimeGrid& grid,
                                               double fraction) {
  check_shape(workload, dc, grid);
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("flexible fraction must lie in [0, 1]");
  WorkloadScenario out = workload;
  for (std::size_t c = 0; c < dc.clusters.size(); ++c) {
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      auto& cw = out.clusters[c];
      const double moved = cw.flexible[k] * (1.0 - fraction);
      const std::string where = "cluster " + dc.clusters[c].id + " " +
                                std::string(to_string(kComputeResources[k]));
      water_fill(cw.inelastic[k], dc.clusters[c].capacity[k], moved / grid.step_hours, where);
      cw.flexible[k] = fraction == 0.0 ? 0.0 : cw.flexible[k] * fraction;
    }
  }
  return out;
}

WorkloadScenario redistribute_flexible_uniform(const WorkloadScenario& workload,
                                               const DataCenterSpec& dc, const TimeGrid& grid) {
  return redistribute_flexible_partial(workload, dc, grid, 0.0);
}

ScenarioSet redistribute_flexible_uniform(const ScenarioSet& set, const DataCenterSpec& dc) {
  ScenarioSet out = set;
  for (auto& s : out.scenarios) s.workload = redistribute_flexible_uniform(s.workload, dc, set.grid);
  return out;
}

}  // namespace dchub
