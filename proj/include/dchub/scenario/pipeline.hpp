#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dchub/domain/types.hpp"
#include "dchub/scenario/bootstrap.hpp"
#include "dchub/scenario/combine.hpp"
#include "dchub/scenario/imbalance.hpp"
#include "dchub/scenario/kmeans.hpp"

namespace dchub {

/// Point forecast plus residual history of one stochastic series.
struct SeriesSource {
  std::vector<double> forecast;
  ResidualHistory history;
};

struct ScenarioInputs {
  TimeGrid grid;
  std::size_t n_per_parameter = 40;
  std::size_t n_combinations = 500000;
  std::size_t k = 60;
  std::uint64_t seed = 0;
  ImbalanceFactors imbalance;
  std::vector<double> heat_demand;  // deterministic, kW_th per step

  SeriesSource spot, renewable_share, carbon_intensity, ghi;
  std::vector<PerCompute<SeriesSource>> inelastic;  // per cluster, per step
  std::vector<PerCompute<SeriesSource>> flexible;   // per cluster, one value per day
};

/// Reads the scenario-input document (see docs/hub_config.md). File
/// references are resolved against the document's directory.
ScenarioInputs load_scenario_inputs(const std::filesystem::path& path, const DataCenterSpec& dc);

// Group order of the flattened combination vector.
enum ParameterGroupId : std::size_t {
  kGroupSpot,
  kGroupRenewableShare,
  kGroupCarbon,
  kGroupGhi,
  kGroupInelasticCpu,  // clusters concatenated, steps_per_day values each
  kGroupInelasticGpu,
  kGroupFlexibleCpu,   // one value per cluster
  kGroupFlexibleGpu,
  kGroupCount
};

/// Bootstraps n_per_parameter scenarios of every group.
std::vector<ParameterGroup> generate_parameter_groups(const ScenarioInputs& in, const DataCenterSpec& dc);

/// Turns combination `combo` back into a scenario (probability left at 0).
Scenario decode_combination(const CombinationSet& set, std::size_t combo, const ScenarioInputs& in,
                            const DataCenterSpec& dc);

struct ScenarioPipelineResult {
  ScenarioSet set;
  KMeansResult clustering;
  std::size_t distinct_combinations = 0;
};

/// bootstrap -> combine -> reduce.
ScenarioPipelineResult build_scenario_set(const ScenarioInputs& in, const DataCenterSpec& dc,
                                          const KMeansOptions& options = {});

}  // namespace dchub
