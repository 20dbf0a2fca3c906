#pragma once

// Synthetic hubs and scenario sets shared by the unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "dchub/domain/types.hpp"

namespace dchub::testing {

struct ToyHubOptions {
  std::size_t clusters = 1;
  bool bess = true;
  bool pv = true;
  bool orc = true;
  double cvar_beta = 0.0;
  double renewable_target = 0.0;
  double renewable_alpha = 1.0;
  double gamma_inelastic = 1.0;
  double gamma_flexible = 1.0;
};

/// 200 kW-class data center behind a 300 kW connection, sized after the
/// case-study site: A100/H100/V100-like clusters, 250 kW / 250 kWh BESS,
/// 200 kW PV, 100 kW_th ORC.
HubSpec toy_hub(const ToyHubOptions& o = {});

struct ToyScenarioOptions {
  std::size_t scenarios = 2;
  std::size_t steps = 24;
  std::uint64_t seed = 1;
  double spot_mean = 0.10;        // EUR/kWh
  double spot_volatility = 0.5;   // relative amplitude of the daily shape and noise
  double k_short = 1.3;
  double k_long = 0.7;
  double inelastic_load = 0.35;   // fraction of capacity
  double flexible_share = 0.5;    // flexible share of total compute demand
  double heat_demand_kw = 40.0;
};

/// Equiprobable scenarios with smooth daily shapes and seeded noise.
ScenarioSet toy_scenarios(const HubSpec& hub, const ToyScenarioOptions& o = {});

/// 75/25/25/50 kW at 17:00-20:00 on a 300 kW connection, rated elsewhere.
DeratingProfile case_study_derating(std::size_t steps = 24, double rated = 300.0);

/// One CPU cluster and no DERs: P_dc = 1.2 * (10 + 0.5 * u_cpu) kW.
HubSpec bare_hub();

/// W equiprobable hourly days at flat prices (spot 0.1, short 0.2, long 0.05).
ScenarioSet flat_day(std::size_t W, double inelastic_cpu, double flexible_cpu = 0.0);

}  // namespace dchub::testing
