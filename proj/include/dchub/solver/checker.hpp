#pragma once

#include <string>
#include <vector>

#include "dchub/milp/model.hpp"

namespace dchub {

struct CheckViolation {
  std::string what;
  double amount = 0.0;
};

struct CheckReport {
  std::vector<CheckViolation> violations;
  double max_violation = 0.0;
  double objective = 0.0;  // recomputed from the values

  bool ok() const { return violations.empty(); }
  std::string summary(std::size_t max_items = 10) const;
};

/// Re-evaluates every bound, integrality requirement, row and SOS2 set of
/// `model` at `values`, independently of any solver. Absolute tolerance.
CheckReport check_solution(const MilpModel& model, const std::vector<double>& values, double tol = 1e-6);

}  // namespace dchub
