// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "dchub/bidding/bidding.hpp"
#include "dchub/domain/config_io.hpp"
#include "dchub/domain/derating.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/evaluate/evaluate.hpp"
#include "dchub/milp/planning.hpp"
#include "dchub/scenario/imbalance.hpp"
#include "dchub/scenario/pipeline.hpp"
#include "dchub/scenario/redistribute.hpp"
#include "dchub/scenario/rng.hpp"
#include "dchub/solver/checker.hpp"
#include "toy_hub.hpp"

using namespace dchub;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = fs::path(DCHUB_FIXTURES) / "toy";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Brute-force oracle

// P_dc = 10 + 2 u (PUE 1); u is integer in [0, 15], p_da in {0, 2, ..., 62}.
struct OracleDay {
  double p;
  double spot[2], shrt[2], lng[2], ci[2];
  int inel[2];
  double flex_per_step;  // F / dT
};

Outcome criterion_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = 12.0, carbon_price = 0.1;
  const std::vector<OracleDay> days = {
      {0.5, {0.10, 0.30}, {0.25, 0.45}, {0.02, 0.15}, {0.2, 0.1}, {6, 9}, 4.0},
      {0.5, {0.12, 0.22}, {0.30, 0.40}, {0.05, 0.10}, {0.3, 0.1}, {10, 3}, 3.0},
  };

  HubSpec hub;
  ClusterSpec cl;
  cl.id = "c";
  cl.capacity = {15, 1, 0, 0};
  cl.rho_intercept_kw = 10.0;
  cl.rho_coeff_kw = {2.0, 0, 0, 0};
  hub.data_center.clusters.push_back(cl);
  hub.data_center.pue = 1.0;
  hub.data_center.gamma_inelastic = 0.5;
  hub.data_center.gamma_flexible = 0.5;
  hub.ppa = PpaContract{300, 25, 6, 30};
  hub.economics.carbon_price = carbon_price;
  hub.economics.cvar_alpha = 0.9;

  ScenarioSet sc;
  sc.grid.step_hours = dt;
  sc.grid.steps_per_day = 2;
  for (const auto& d : days) {
    Scenario s;
    s.probability = d.p;
    auto& x = s.exogenous;
    x.spot = {d.spot[0], d.spot[1]};
    x.price_short = {d.shrt[0], d.shrt[1]};
    x.price_long = {d.lng[0], d.lng[1]};
    x.carbon_intensity = {d.ci[0], d.ci[1]};
    x.renewable_share = {0.5, 0.5};
    x.ghi = {0, 0};
    x.heat_demand = {0, 0};
    ClusterWorkload wl;
    wl.inelastic = {std::vector<double>{double(d.inel[0]), double(d.inel[1])}, std::vector<double>{0, 0}};
    wl.flexible = {d.flex_per_step * dt, 0.0};
    s.workload.clusters.push_back(wl);
    sc.scenarios.push_back(s);
  }

  // MILP with the decisions restricted to the grid by binary expansion.
  auto pm = build_planning_model(hub, sc, DeratingProfile::flat(300, 2), {});
  auto& m = pm.model;
  auto discretize = [&](VarId v, const std::string& tag, int bits, double step) {
    LinearExpr e;
    e.add(v, 1.0);
    for (int b = 0; b < bits; ++b)
      e.add(m.add_variable("grid_" + tag + "_b" + std::to_string(b), VarKind::binary, 0, 1), -step * double(1 << b));
    m.add_constraint("grid_" + tag, e, RowSense::eq, 0.0);
  };
  for (std::size_t t = 0; t < 2; ++t) {
    discretize(pm.idx.p_da(t), "da" + std::to_string(t), 5, 2.0);
    for (std::size_t w = 0; w < 2; ++w)
      discretize(pm.idx.u(w, t, 0, 0), "u" + std::to_string(w) + std::to_string(t), 4, 1.0);
  }
  SolveOptions so;
  so.mip_gap = 0.0;
  const auto sol = solve(m, so);
  if (sol.status != SolveStatus::optimal) return {false, "MILP status " + std::string(to_string(sol.status))};

  // Exhaustive enumeration. For a fixed bid each scenario's cost depends on
  // its own usage; the chance constraints couple scenarios only through the
  // violation pattern (inelastic t0, inelastic t1, flexible).
  const double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  std::size_t evaluated = 0;
  for (int a0 = 0; a0 <= 62; a0 += 2) {
    for (int a1 = 0; a1 <= 62; a1 += 2) {
      const int bid[2] = {a0, a1};
      double pattern_cost[2][8];
      for (std::size_t w = 0; w < 2; ++w) {
        std::fill(std::begin(pattern_cost[w]), std::end(pattern_cost[w]), inf);
        const auto& d = days[w];
        for (int u0 = 0; u0 <= 15; ++u0) {
          for (int u1 = 0; u1 <= 15; ++u1) {
            const int u[2] = {u0, u1};
            const double extra = double(u0 + u1 - d.inel[0] - d.inel[1]);
            if (extra > d.flex_per_step + 1e-12) continue;  // no over-provisioning
            if (extra < 0.0) continue;                      // flexible big-M leaves sum(u - I) >= 0
            int need = 0;
            if (u0 < d.inel[0]) need |= 1;
            if (u1 < d.inel[1]) need |= 2;
            if (extra < d.flex_per_step - 1e-12) need |= 4;
            double cost = 0.0;
            for (int t = 0; t < 2; ++t) {
              const double gcp = 10.0 + 2.0 * u[t];
              const double imb = gcp - bid[t];
              cost += dt * (d.spot[t] * bid[t] + d.shrt[t] * std::max(imb, 0.0) - d.lng[t] * std::max(-imb, 0.0) +
                            carbon_price * d.ci[t] * gcp);
            }
            ++evaluated;
            for (int mask = 0; mask < 8; ++mask)
              if ((mask & need) == need) pattern_cost[w][mask] = std::min(pattern_cost[w][mask], cost);
          }
        }
      }
      for (int ma = 0; ma < 8; ++ma) {
        for (int mb = 0; mb < 8; ++mb) {
          // Quotas 1 - gamma = 0.5 with p = 0.5 each: no index may be violated in both.
          if (ma & mb) continue;
          best = std::min(best, days[0].p * pattern_cost[0][ma] + days[1].p * pattern_cost[1][mb]);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  const double diff = std::abs(sol.objective - best);
  return {diff <= 1e-6 && secs < 10.0,
          fmt("MILP %.9f EUR, enumeration %.9f EUR over %zu usage profiles, |diff| %.2e, %.2f s", sol.objective, best,
              evaluated, diff, secs)};
}

// ---------------------------------------------------------------------------
// 2. Random instances through the constraint checker

Outcome criterion_invariants() {
  std::mt19937_64 rng(20250718);
  auto pick = [&](auto... v) {
    const std::vector<double> options{double(v)...};
    return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
  };
  auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };
  std::size_t solved = 0, attempts = 0, infeasible = 0, failed = 0;
  std::string first_failure;
  double worst_balance = 0.0, worst_check = 0.0, worst_excl = 0.0;
  while (solved < 50 && attempts < 200) {
    ++attempts;
    testing::ToyHubOptions ho;
    ho.clusters = coin() ? 1 : 2;
    ho.bess = coin();
    ho.pv = coin();
    ho.orc = coin();
    ho.cvar_beta = pick(0.0, 0.3, 1.0);
    ho.renewable_target = pick(0.0, 0.5, 0.7);
    ho.renewable_alpha = pick(0.2, 1.0);
    ho.gamma_inelastic = pick(1.0, 0.9);
    ho.gamma_flexible = pick(1.0, 0.8);
    const HubSpec hub = testing::toy_hub(ho);
    testing::ToyScenarioOptions so;
    so.steps = std::size_t(pick(4, 6, 8, 12, 24));
    so.scenarios = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    so.seed = rng();
    so.spot_volatility = std::uniform_real_distribution<double>(0.2, 1.2)(rng);
    so.flexible_share = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    so.heat_demand_kw = std::uniform_real_distribution<double>(0.0, 80.0)(rng);
    const auto sc = testing::toy_scenarios(hub, so);
    ModelOptions mo;
    if (so.steps == 24 && coin()) mo.scheme = SupplyScheme::tou;
    mo.accounting = coin() ? RenewableAccounting::signed_net : RenewableAccounting::imports_only;
    mo.quotas = coin() ? QuotaGranularity::per_index : QuotaGranularity::pooled;
    const auto caps = so.steps == 24 && coin() ? testing::case_study_derating() : DeratingProfile::flat(300, so.steps);

    const auto pm = build_planning_model(hub, sc, caps, mo);
    SolveOptions opt;
    opt.mip_gap = 1e-4;
    opt.time_limit = 120;
    const auto sol = solve(pm.model, opt);
    if (sol.status == SolveStatus::infeasible) {
      ++infeasible;
      continue;
    }
    if (!sol.has_values()) {
      ++failed;
      if (first_failure.empty()) first_failure = fmt("attempt %zu: no incumbent", attempts);
      continue;
    }
    ++solved;
    const auto check = check_solution(pm.model, sol.values);
    const auto audit = audit_solution(pm, hub, sc, sol.values);
    worst_check = std::max(worst_check, check.max_violation);
    worst_balance = std::max(worst_balance, audit.balance_residual);
    worst_excl = std::max(worst_excl, audit.exclusivity_product);
    if (!check.ok() || !audit.ok() || audit.balance_residual > 1e-6 || audit.sos2_breaches ||
        !audit.quota_breaches.empty()) {
      ++failed;
      if (first_failure.empty()) {
        first_failure = fmt("attempt %zu:", attempts);
        for (const auto& f : audit.failures) first_failure += " " + f;
        if (!check.ok()) first_failure += fmt(" checker %.2e", check.max_violation);
      }
    }
  }
  std::string detail = fmt("%zu solved (%zu infeasible draws skipped), worst row violation %.2e, "
                           "balance residual %.2e kW, exclusivity product %.2e kW^2",
                           solved, infeasible, worst_check, worst_balance, worst_excl);
  if (!first_failure.empty()) detail += "; " + first_failure;
  return {solved == 50 && failed == 0, detail};
}

// ---------------------------------------------------------------------------
// 3 and 4. Flexibility and de-rating monotonicity

struct Fixture {
  HubSpec hub;
  ScenarioSet flex, rigid;
};

std::vector<Fixture> monotonicity_fixtures() {
  std::vector<Fixture> out;
  for (std::size_t i = 0; i < 20; ++i) {
    Fixture f;
    f.hub = testing::toy_hub();
    testing::ToyScenarioOptions so;
    so.scenarios = 3;
    so.seed = 100 + i;
    so.flexible_share = 0.5;
    // Fixture 0 is the volatile-price day.
    so.spot_volatility = i == 0 ? 1.6 : 0.2 + 0.05 * double(i);
    f.flex = testing::toy_scenarios(f.hub, so);
    f.rigid = redistribute_flexible_uniform(f.flex, f.hub.data_center);
    out.push_back(std::move(f));
  }
  return out;
}

PlanOptions tight() {
  PlanOptions o;
  o.solve.mip_gap = 1e-6;
  o.solve.time_limit = 300;
  o.triage = false;
  return o;
}

double slack(double a, double b) { return 2e-6 * std::max(std::abs(a), std::abs(b)) + 1e-6; }

struct FlatCapsObjectives {
  std::vector<double> flex, rigid;
};

FlatCapsObjectives& flat_objectives() {
  static FlatCapsObjectives cache = [] {
    FlatCapsObjectives r;
    for (const auto& f : monotonicity_fixtures()) {
      const auto caps = DeratingProfile::flat(f.hub.ppa.p_gcp_rated_kw, 24);
      r.flex.push_back(plan_day(f.hub, f.flex, caps, tight()).objective);
      r.rigid.push_back(plan_day(f.hub, f.rigid, caps, tight()).objective);
    }
    return r;
  }();
  return cache;
}

Outcome criterion_flexibility() {
  const auto& obj = flat_objectives();
  std::size_t ok = 0;
  double min_gain = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obj.flex.size(); ++i) {
    if (obj.flex[i] <= obj.rigid[i] + slack(obj.flex[i], obj.rigid[i])) ++ok;
    min_gain = std::min(min_gain, obj.rigid[i] - obj.flex[i]);
  }
  const double volatile_gain = obj.rigid[0] - obj.flex[0];
  return {ok == obj.flex.size() && volatile_gain > 1e-3,
          fmt("%zu/%zu fixtures with objective(flex) <= objective(no flex), smallest gain %.4f EUR, "
              "volatile fixture gain %.4f EUR (%.2f%%)",
              ok, obj.flex.size(), min_gain, volatile_gain, 100.0 * volatile_gain / obj.rigid[0])};
}

Outcome criterion_derating() {
  const auto fixtures = monotonicity_fixtures();
  const auto& flat = flat_objectives();
  const auto caps = testing::case_study_derating();
  std::size_t ok = 0, checked = 0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& f = fixtures[i];
    for (int variant = 0; variant < 2; ++variant) {
      const auto& set = variant == 0 ? f.flex : f.rigid;
      const double base = variant == 0 ? flat.flex[i] : flat.rigid[i];
      ++checked;
      try {
        const double capped = plan_day(f.hub, set, caps, tight()).objective;
        if (capped >= base - slack(capped, base)) ++ok;
      } catch (const InfeasibleError&) {
        ++ok;  // an infeasible capped day is an unbounded increase
      }
    }
  }
  // Shipped fixture: hub.json with the first planning day.
  const HubSpec hub = load_hub_spec(kToy / "hub.json");
  const auto flex = load_scenario_set(kToy / "planning" / "2025-07-18.json", hub.data_center);
  const auto rigid = redistribute_flexible_uniform(flex, hub.data_center);
  const auto shipped_caps = load_derating_profile(kToy / "derating.json");
  const auto rated = DeratingProfile::flat(hub.ppa.p_gcp_rated_kw, 24);
  const double flex_inc =
      plan_day(hub, flex, shipped_caps, tight()).objective - plan_day(hub, flex, rated, tight()).objective;
  const double rigid_inc =
      plan_day(hub, rigid, shipped_caps, tight()).objective - plan_day(hub, rigid, rated, tight()).objective;
  return {ok == checked && rigid_inc > flex_inc,
          fmt("%zu/%zu capped runs never cheaper; shipped fixture increase: no flex %.4f EUR > flex %.4f EUR", ok,
              checked, rigid_inc, flex_inc)};
}

// ---------------------------------------------------------------------------
// 5. CVaR

Outcome criterion_cvar() {
  struct Case {
    std::vector<double> cost, prob;
    double alpha, expected;
  };
  // Tail averages worked out by hand.
  const std::vector<Case> cases = {
      {{10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.75, 40.0},
      {{10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.5, 35.0},
      {{10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.6, 36.25},
      {{10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.1, 80.0 / 3.0},
      {{40, 30, 20, 10}, {0.1, 0.2, 0.3, 0.4}, 0.8, 35.0},
  };
  double worst_reported = 0.0, worst_milp = 0.0, worst_mean = 0.0;
  for (const auto& c : cases) {
    // Costs fixed by construction: no usage, 12 kW idle draw, spot = cost / (12 kW * 24 h),
    // imbalance settled at spot so the bid does not matter.
    HubSpec hub = testing::bare_hub();
    hub.economics.cvar_alpha = c.alpha;
    auto sc = testing::flat_day(4, 0.0);
    for (std::size_t w = 0; w < 4; ++w) {
      auto& x = sc.scenarios[w].exogenous;
      x.spot.assign(24, c.cost[w] / 288.0);
      x.price_short = x.spot;
      x.price_long = x.spot;
      sc.scenarios[w].probability = c.prob[w];
    }
    PlanOptions o;
    o.solve.mip_gap = 0.0;
    for (double beta : {0.0, 1.0}) {
      hub.economics.cvar_beta = beta;
      const auto bid = plan_day(hub, sc, DeratingProfile::flat(300, 24), o);
      worst_reported = std::max(worst_reported, std::abs(bid.cvar - c.expected));
      if (beta == 1.0) worst_milp = std::max(worst_milp, std::abs(bid.objective - c.expected));
      if (beta == 0.0) worst_mean = std::max(worst_mean, std::abs(bid.objective - bid.expected_cost));
    }
  }
  return {worst_reported <= 1e-9 && worst_milp <= 1e-6 && worst_mean <= 1e-9,
          fmt("%zu hand cases incl. alpha 0.75 on {10,20,30,40} -> 40: reported CVaR |err| %.1e, "
              "beta=1 objective |err| %.1e, beta=0 objective vs expected cost |err| %.1e",
              cases.size(), worst_reported, worst_milp, worst_mean)};
}

// ---------------------------------------------------------------------------
// 6. Scenario pipeline

Outcome criterion_pipeline() {
  const HubSpec hub = load_hub_spec(kToy / "hub.json");
  const auto& dc = hub.data_center;
  const auto in = load_scenario_inputs(kToy / "scenario_inputs.json", dc);
  const auto res = build_scenario_set(in, dc);
  const double psum =
      std::accumulate(res.clustering.probabilities.begin(), res.clustering.probabilities.end(), 0.0);

  // Rebuild the combination set and compare representatives against it
  // through the documented flattening order.
  const auto combos = combine_scenarios(generate_parameter_groups(in, dc), in.n_combinations,
                                        splitmix64(in.seed ^ 0x636f6d62ULL));
  const std::size_t C = dc.clusters.size();
  std::size_t identical = 0;
  for (std::size_t k = 0; k < res.set.size(); ++k) {
    const auto v = combos.vector(res.clustering.representatives[k]);
    const auto& s = res.set.scenarios[k];
    std::vector<double> flat;
    for (const auto* series : {&s.exogenous.spot, &s.exogenous.renewable_share, &s.exogenous.carbon_intensity,
                               &s.exogenous.ghi})
      flat.insert(flat.end(), series->begin(), series->end());
    for (std::size_t r = 0; r < kComputeCount; ++r)
      for (std::size_t c = 0; c < C; ++c)
        flat.insert(flat.end(), s.workload.clusters[c].inelastic[r].begin(), s.workload.clusters[c].inelastic[r].end());
    for (std::size_t r = 0; r < kComputeCount; ++r)
      for (std::size_t c = 0; c < C; ++c) flat.push_back(s.workload.clusters[c].flexible[r]);
    const bool member = res.clustering.assignment[res.clustering.representatives[k]] == k;
    if (member && flat.size() == v.size() && std::equal(flat.begin(), flat.end(), v.begin(), [](double a, double b) {
          return std::memcmp(&a, &b, sizeof a) == 0;
        }))
      ++identical;
  }

  const auto hist = read_imbalance_history(kToy / "series" / "imbalance_history.csv");
  const auto f = calibrate_imbalance_factors(hist.spot, hist.price_short, hist.price_long, 0.4);
  std::size_t n = 0;
  for (double s : hist.spot) n += s > 0.0;
  const double frac_short = underestimation_fraction(hist.spot, hist.price_short, f.k_short);
  const double frac_long = underestimation_fraction(hist.spot, hist.price_long, f.k_long);
  const double tol = 1.0 / double(n);
  const bool calib = std::abs(frac_short - 0.4) <= tol && std::abs(frac_long - 0.4) <= tol;
  return {std::abs(psum - 1.0) <= 1e-9 && identical == res.set.size() && calib,
          fmt("probability sum 1%+.1e over %zu clusters, %zu/%zu representatives bit-identical members; "
              "underestimation short %.4f, long %.4f (target 0.4, 1/n = %.4f)",
              psum - 1.0, res.set.size(), identical, res.set.size(), frac_short, frac_long, tol)};
}

// ---------------------------------------------------------------------------
// 7. De-rating validator

Outcome criterion_validator() {
  const PpaContract ppa{300, 25, 6, 30};
  TimeGrid g;
  const auto profile = testing::case_study_derating();
  const auto ok = validate_derating(profile, ppa, g);
  const double energy = ok.daily.empty() ? -1.0 : ok.daily[0].derating_energy_kwh;

  // One step below the minimum capacity.
  auto below = profile;
  below.cap_kw[18] = 20.0;
  const auto v2 = validate_derating(below, ppa, g);
  // 7 h at 25 kW is 1925 kWh, over the 1650 kWh daily budget; one day only, so the weekly budget holds.
  auto daily = DeratingProfile::flat(300, 24);
  for (std::size_t t = 10; t < 17; ++t) daily.cap_kw[t] = 25.0;
  const auto v3 = validate_derating(daily, ppa, g);
  // 7 days of 5 h at 25 kW: 1375 kWh per day, 9625 kWh per week > 8250.
  DeratingProfile week;
  for (int d = 0; d < 7; ++d) {
    auto day = DeratingProfile::flat(300, 24);
    for (std::size_t t = 12; t < 17; ++t) day.cap_kw[t] = 25.0;
    week.cap_kw.insert(week.cap_kw.end(), day.cap_kw.begin(), day.cap_kw.end());
  }
  const auto v4 = validate_derating(week, ppa, g);

  const bool pass = ok.pass() && std::abs(energy - 1025.0) < 1e-9 &&
                    (!v2.minimum_capacity_ok() && v2.daily_ok() && v2.weekly_ok() && !v2.pass()) &&
                    (v3.minimum_capacity_ok() && !v3.daily_ok() && v3.weekly_ok() && !v3.pass()) &&
                    (v4.minimum_capacity_ok() && v4.daily_ok() && !v4.weekly_ok() && !v4.pass());
  return {pass, fmt("case-study profile %s with %.1f kWh/day; minimum-capacity violation %s, daily %s, weekly %s",
                    ok.pass() ? "PASS" : "FAIL", energy, v2.pass() ? "PASS" : "FAIL", v3.pass() ? "PASS" : "FAIL",
                    v4.pass() ? "PASS" : "FAIL")};
}

// ---------------------------------------------------------------------------
// 8. Ex-post replay

Outcome criterion_replay() {
  testing::ToyHubOptions ho;
  ho.bess = false;
  ho.cvar_beta = 0.0;
  ho.renewable_target = 0.0;
  ho.gamma_inelastic = 1.0;
  ho.gamma_flexible = 1.0;
  const HubSpec hub = testing::toy_hub(ho);
  testing::ToyScenarioOptions so;
  so.scenarios = 5;
  so.seed = 31;
  so.spot_volatility = 0.8;
  const auto sc = testing::toy_scenarios(hub, so);
  const auto caps = DeratingProfile::flat(hub.ppa.p_gcp_rated_kw, 24);
  PlanOptions po;
  po.solve.mip_gap = 1e-6;
  const auto bid = plan_day(hub, sc, caps, po);
  ExpostOptions eo;
  eo.solve = po.solve;
  double mean = 0.0;
  for (std::size_t w = 0; w < sc.size(); ++w) {
    const auto& s = sc.scenarios[w];
    const auto out = expost_reoptimize(hub, bid, RealizedDay{"w" + std::to_string(w), s.exogenous, s.workload}, caps, eo);
    mean += s.probability * out.cost;
  }
  const double rel = std::abs(mean - bid.expected_cost) / std::abs(bid.expected_cost);
  const double allowed = bid.gap + 1e-4;
  return {rel <= allowed, fmt("ex-post mean %.6f EUR, ex-ante expected %.6f EUR, relative diff %.2e <= %.2e "
                              "(beta 0, gamma 1, no renewable target, no BESS, rated connection)",
                              mean, bid.expected_cost, rel, allowed)};
}

// ---------------------------------------------------------------------------
// 9. Determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dchub");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(int(argv.size()), argv.data(), out, err);
}

Outcome criterion_determinism() {
  const auto root = fs::temp_directory_path() / ("dchub_acceptance_" + std::to_string(::getpid()));
  const auto manifest = (kToy / "manifest.json").string();
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    fs::create_directories(d);
    for (const char* cmd : {"scenarios", "bid", "evaluate"}) {
      if (const int rc = run_cli({cmd, "-m", manifest, "-o", d.string()}); rc != 0) {
        fs::remove_all(root);
        return {false, fmt("%s exited with %d", cmd, rc)};
      }
    }
  }
  const std::vector<std::string> files{"scenarios.json", "model.lp", "bid.json", "bid.csv", "vcc_A100.csv",
                                       "report.json",    "outcomes.csv"};
  std::size_t same = 0;
  std::string differing;
  for (const auto& f : files) {
    const auto a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
    if (!a.empty() && a == b) ++same;
    else differing += " " + f;
  }
  fs::remove_all(root);
  return {same == files.size(), fmt("%zu/%zu pipeline outputs byte-identical across two runs%s", same, files.size(),
                                    differing.empty() ? "" : ("; differ:" + differing).c_str())};
}

// ---------------------------------------------------------------------------
// 10. Scale

Outcome criterion_scale() {
  testing::ToyHubOptions ho;
  ho.clusters = 3;
  const HubSpec hub = testing::toy_hub(ho);
  testing::ToyScenarioOptions so;
  so.scenarios = 60;
  so.seed = 11;
  const auto sc = testing::toy_scenarios(hub, so);
  PlanOptions po;
  po.solve.mip_gap = 0.01;
  po.solve.time_limit = 600;
  const auto t0 = std::chrono::steady_clock::now();
  const auto pm = build_planning_model(hub, sc, testing::case_study_derating(), po.model);
  const std::size_t vars = pm.model.variables().size(), rows = pm.model.constraints().size(),
                    bins = pm.model.count_binaries();
  const auto bid = plan_day(hub, sc, testing::case_study_derating(), po);
  const double secs = seconds_since(t0);
  return {bid.status == SolveStatus::optimal && bid.gap <= 0.01 && secs < 600.0 && bid.audit.ok(),
          fmt("60 scenarios x 24 steps x 3 clusters: %zu variables (%zu binary), %zu rows; status %s, gap %.2e, "
              "%.1f s including build",
              vars, bins, rows, std::string(to_string(bid.status)).c_str(), bid.gap, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"brute-force oracle", criterion_oracle},
      {"solution invariants", criterion_invariants},
      {"flexibility monotonicity", criterion_flexibility},
      {"de-rating monotonicity", criterion_derating},
      {"CVaR", criterion_cvar},
      {"scenario pipeline", criterion_pipeline},
      {"de-rating validator", criterion_validator},
      {"ex-post replay", criterion_replay},
      {"determinism", criterion_determinism},
      {"scale", criterion_scale},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
