#pragma once

#include "dchub/domain/types.hpp"

namespace dchub {

/// Spreads each daily flexible total evenly over the day on top of the
/// inelastic series ("water filling"): every step receives the same increment
/// unless it hits capacity, in which case the excess goes to the remaining
/// steps. The result has no flexible demand and the same total resource-hours.
/// Throws InfeasibleError if a total does not fit under capacity.
WorkloadScenario redistribute_flexible_uniform(const WorkloadScenario& workload,
                                               const DataCenterSpec& dc, const TimeGrid& grid);

/// Keeps `fraction` of every flexible total flexible and folds the rest into
/// the inelastic series as above.
WorkloadScenario redistribute_flexible_partial(const WorkloadScenario& workload,
                                               const DataCenterSpec& dc, const TimeGrid& grid,
                                               double fraction);

ScenarioSet redistribute_flexible_uniform(const ScenarioSet& set, const DataCenterSpec& dc);

}  // namespace dchub
