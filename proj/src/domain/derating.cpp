#include "dchub/domain/derating.hpp"

#include <algorithm>
#include <string>

#include "dchub/domain/errors.hpp"

namespace dchub {

bool DeratingVerdict::daily_ok() const {
  return std::all_of(daily.begin(), daily.end(), [](const BudgetCheck& b) { return b.pass; });
}

bool DeratingVerdict::weekly_ok() const {
  return std::all_of(weekly.begin(), weekly.end(), [](const BudgetCheck& b) { return b.pass; });
}

DeratingVerdict validate_derating(const DeratingProfile& profile, const PpaContract& contract,
                                  const TimeGrid& grid) {
  const std::size_t per_day = grid.steps_per_day;
  const std::size_t n = profile.cap_kw.size();
  if (per_day == 0 || n == 0 || n % per_day != 0) {
    throw InputError("de-rating profile has " + std::to_string(n) +
                     " steps, not a whole number of days of " + std::to_string(per_day));
  }
  constexpr double tol = 1e-9;
  const double headroom = contract.p_gcp_rated_kw - contract.p_gcp_min_kw;
  const double daily_limit = headroom * contract.t_daily_lim_h;
  const double weekly_limit = headroom * contract.t_weekly_lim_h;

  DeratingVerdict verdict;
  const std::size_t days = n / per_day;
  verdict.daily.resize(days);
  for (std::size_t t = 0; t < n; ++t) {
    const double cap = profile.cap_kw[t];
    if (cap < contract.p_gcp_min_kw - tol) verdict.below_minimum_steps.push_back(t);
    if (cap > contract.p_gcp_rated_kw + tol) verdict.above_rated_steps.push_back(t);
    verdict.daily[t / per_day].derating_energy_kwh +=
        (contract.p_gcp_rated_kw - cap) * grid.step_hours;
  }
  for (auto& d : verdict.daily) {
    d.limit_kwh = daily_limit;
    d.pass = d.derating_energy_kwh <= daily_limit + tol;
  }
  for (std::size_t first = 0; first < days; first += 7) {
    BudgetCheck w;
    w.limit_kwh = weekly_limit;
    for (std::size_t d = first; d < std::min(days, first + 7); ++d) {
      w.derating_energy_kwh += verdict.daily[d].derating_energy_kwh;
    }
    w.pass = w.derating_energy_kwh <= weekly_limit + tol;
    verdict.weekly.push_back(w);
  }
  return verdict;
}

}  // namespace dchub
