#pragma once

#include <cstddef>
#include <vector>

#include "dchub/domain/types.hpp"

namespace dchub {

struct BudgetCheck {
  double derating_energy_kwh = 0.0;  // sum of (rated - cap) * step
  double limit_kwh = 0.0;            // (rated - min) * t_lim
  bool pass = true;
};

/// Outcome of checking a DSO de-rating request against the PPA limits.
struct DeratingVerdict {
  std::vector<std::size_t> below_minimum_steps;  // steps with cap < p_gcp_min
  std::vector<std::size_t> above_rated_steps;    // steps with cap > p_gcp_rated
  std::vector<BudgetCheck> daily;                // one per day of the profile
  std::vector<BudgetCheck> weekly;               // one per (possibly partial) 7-day block

  bool minimum_capacity_ok() const { return below_minimum_steps.empty(); }
  bool daily_ok() const;
  bool weekly_ok() const;
  bool pass() const {
    return minimum_capacity_ok() && above_rated_steps.empty() && daily_ok() && weekly_ok();
  }
};

/// Checks the minimum-capacity guarantee and the cumulative daily and weekly
/// de-rating budgets. The profile must cover a whole number of days.
DeratingVerdict validate_derating(const DeratingProfile& profile, const PpaContract& contract,
                                  const TimeGrid& grid);

}  // namespace dchub
