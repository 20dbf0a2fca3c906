#include "toy_hub.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dchub/scenario/rng.hpp"

namespace dchub::testing {

namespace {

ClusterSpec cluster(std::size_t c) {
  // Capacities per cluster row of the site description: GPU, CPU cores,
  // GPU memory, CPU memory.
  static const double caps[3][4] = {{1024, 256, 32768, 10240}, {960, 80, 15360, 6400}, {576, 64, 6160, 2048}};
  static const char* ids[3] = {"A100", "H100", "V100"};
  const auto& k = caps[c % 3];
  ClusterSpec cl;
  cl.id = std::string(ids[c % 3]) + (c >= 3 ? "_" + std::to_string(c / 3) : "");
  cl.capacity = {k[0], k[1], k[2], k[3]};
  cl.rho_intercept_kw = 12.0;
  cl.rho_coeff_kw = {0.02, 0.25, 0.0005, 0.0};
  cl.mem_ratio = {0.5 * k[2] / k[0], 0.5 * k[3] / k[1]};
  cl.rec_efficiency = 0.7;
  cl.rec_idle_kw = 4.0;
  cl.cooled = {false, true};
  return cl;
}

double noise(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
  return 2.0 * uniform_unit(counter_hash(seed, stream, i)) - 1.0;
}

}  // namespace

HubSpec toy_hub(const ToyHubOptions& o) {
  HubSpec h;
  auto& dc = h.data_center;
  dc.pue = 1.2;
  dc.gamma_inelastic = o.gamma_inelastic;
  dc.gamma_flexible = o.gamma_flexible;
  for (std::size_t c = 0; c < o.clusters; ++c) dc.clusters.push_back(cluster(c));
  if (o.bess) {
    BessSpec b;
    b.e_min_kwh = 25;
    b.e_max_kwh = 250;
    b.e_rated_kwh = 250;
    b.p_rated_kw = 250;
    b.eta_oneway = 0.95;
    b.e_init_kwh = 125;
    b.rated_cycles = 5000;
    b.investment_cost_eur = 100000;
    b.lca_emissions_kg = 20000;
    h.bess = b;
  }
  if (o.pv) h.pv = PvSpec{200.0, 1000.0};
  if (o.orc) h.orc = OrcCurve{{{0, 0}, {50, 5}, {100, 12}}};
  h.ppa = PpaContract{300.0, 25.0, 4.0, 12.0};
  auto& e = h.economics;
  e.carbon_price = 0.265;
  e.heat_price = 0.03;
  e.renewable_target = o.renewable_target;
  e.renewable_alpha = o.renewable_alpha;
  e.cvar_alpha = 0.95;
  e.cvar_beta = o.cvar_beta;
  std::vector<double> tariff(24);
  for (std::size_t t = 0; t < 24; ++t) tariff[t] = (t >= 7 && t < 20) ? 0.14 : 0.10;
  e.tou_tariff = tariff;
  return h;
}

ScenarioSet toy_scenarios(const HubSpec& hub, const ToyScenarioOptions& o) {
  ScenarioSet set;
  set.grid.step_hours = 24.0 / double(o.steps);
  set.grid.steps_per_day = o.steps;
  set.grid.start = parse_timestamp("2025-07-18T00:00:00Z");
  const double dt = set.grid.step_hours;
  const auto T = o.steps;
  for (std::size_t w = 0; w < o.scenarios; ++w) {
    Scenario s;
    s.probability = 1.0 / double(o.scenarios);
    auto& x = s.exogenous;
    for (std::size_t t = 0; t < T; ++t) {
      const double hour = (double(t) + 0.5) * dt;
      const double shape = std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
      const double evening = std::exp(-std::pow((hour - 19.0) / 2.0, 2));
      const double solar = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 14.0));
      const double spot = o.spot_mean * (1.0 + o.spot_volatility * (0.6 * evening - 0.4 * solar + 0.2 * shape +
                                                                     0.3 * noise(o.seed, 1 + 10 * w, t)));
      x.spot.push_back(spot);
      x.price_short.push_back(o.k_short * spot);
      x.price_long.push_back(o.k_long * spot);
      x.carbon_intensity.push_back(std::max(0.0, 0.12 - 0.04 * solar + 0.01 * noise(o.seed, 2 + 10 * w, t)));
      x.renewable_share.push_back(std::clamp(0.55 + 0.2 * solar + 0.05 * noise(o.seed, 3 + 10 * w, t), 0.0, 1.0));
      x.ghi.push_back(std::max(0.0, 850.0 * solar * (1.0 + 0.2 * noise(o.seed, 4 + 10 * w, t))));
      x.heat_demand.push_back(o.heat_demand_kw);
    }
    for (std::size_t c = 0; c < hub.data_center.clusters.size(); ++c) {
      const auto& cl = hub.data_center.clusters[c];
      ClusterWorkload wl;
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        const double cap = cl.capacity[k];
        double total = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          const double hour = (double(t) + 0.5) * dt;
          const double day = 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * (hour - 10.0) / 24.0);
          const double v =
              o.inelastic_load * cap * day * (1.0 + 0.1 * noise(o.seed, 100 + 10 * w + c * 1000 + k, t));
          wl.inelastic[k].push_back(std::clamp(v, 0.0, cap));
          total += wl.inelastic[k].back() * dt;
        }
        // Flexible resource-hours as a share of the day's total compute demand.
        wl.flexible[k] = o.flexible_share / (1.0 - o.flexible_share) * total;
      }
      s.workload.clusters.push_back(std::move(wl));
    }
    set.scenarios.push_back(std::move(s));
  }
  return set;
}

DeratingProfile case_study_derating(std::size_t steps, double rated) {
  DeratingProfile p = DeratingProfile::flat(rated, steps);
  const double per_hour = double(steps) / 24.0;
  const double caps[4] = {75, 25, 25, 50};
  for (std::size_t h = 0; h < 4; ++h)
    for (std::size_t k = 0; k < std::size_t(per_hour); ++k) p.cap_kw.at(std::size_t((17 + h) * per_hour) + k) = caps[h];
  return p;
}

HubSpec bare_hub() {
  HubSpec h;
  ClusterSpec cl;
  cl.id = "c";
  cl.capacity = {200, 10, 1000, 1000};
  cl.rho_intercept_kw = 10.0;
  cl.rho_coeff_kw = {0.5, 0, 0, 0};
  cl.rec_efficiency = 0.5;
  cl.rec_idle_kw = 4.0;
  cl.cooled = {true, false};
  h.data_center.clusters.push_back(cl);
  h.data_center.pue = 1.2;
  h.ppa = PpaContract{300, 25, 6, 30};
  h.economics.cvar_alpha = 0.95;
  return h;
}

ScenarioSet flat_day(std::size_t W, double inelastic_cpu, double flexible_cpu) {
  ScenarioSet s;
  for (std::size_t w = 0; w < W; ++w) {
    Scenario sc;
    sc.probability = 1.0 / double(W);
    auto& x = sc.exogenous;
    x.spot.assign(24, 0.1);
    x.price_short.assign(24, 0.2);
    x.price_long.assign(24, 0.05);
    x.carbon_intensity.assign(24, 0.1);
    x.renewable_share.assign(24, 0.5);
    x.ghi.assign(24, 0.0);
    x.heat_demand.assign(24, 0.0);
    ClusterWorkload wl;
    wl.inelastic = {std::vector<double>(24, inelastic_cpu), std::vector<double>(24, 0.0)};
    wl.flexible = {flexible_cpu, 0.0};
    sc.workload.clusters.push_back(wl);
    s.scenarios.push_back(sc);
  }
  return s;
}

}  // namespace dchub::testing
