#pragma once

#include <string>
#include <vector>

#include "dchub/domain/types.hpp"

namespace dchub {

struct Violation {
  std::string path;       // e.g. "bess.e_min_kwh"
  std::string invariant;  // e.g. "e_min ≤ e_max"
  std::string detail;
};

/// Report-style validation result: empty means valid.
struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool mentions(std::string_view invariant) const;
  std::string to_string() const;
};

ValidationReport validate_time_grid(const TimeGrid& grid);
ValidationReport validate_hub_spec(const HubSpec& spec);
/// Checks the scenario set on its own and against the hub (cluster count,
/// series lengths, workload within capacity, probabilities).
ValidationReport validate_scenario_set(const ScenarioSet& set, const HubSpec& spec);

}  // namespace dchub
