#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dchub/domain/errors.hpp"
#include "dchub/milp/planning.hpp"
#include "dchub/solver/checker.hpp"
#include "dchub/solver/solver.hpp"
#include "toy_hub.hpp"

using namespace dchub;
using dchub::testing::toy_hub;
using dchub::testing::toy_scenarios;

namespace {

// One cluster drawing 10 kW idle plus 0.5 kW per CPU unit; no DERs unless added.
HubSpec micro_hub() {
  HubSpec h;
  ClusterSpec cl;
  cl.id = "c";
  cl.capacity = {200, 10, 1000, 1000};
  cl.rho_intercept_kw = 10.0;
  cl.rho_coeff_kw = {0.5, 0, 0, 0};
  cl.mem_ratio = {0, 0};
  cl.rec_efficiency = 0.5;
  cl.rec_idle_kw = 4.0;
  cl.cooled = {true, false};
  h.data_center.clusters.push_back(cl);
  h.data_center.pue = 1.2;
  h.ppa = PpaContract{300, 25, 6, 30};
  h.economics.cvar_alpha = 0.95;
  return h;
}

ScenarioSet micro_scenarios(std::size_t W, std::size_t T, double inelastic_cpu, double flexible_cpu = 0.0) {
  ScenarioSet s;
  s.grid.step_hours = 24.0 / double(T);
  s.grid.steps_per_day = T;
  for (std::size_t w = 0; w < W; ++w) {
    Scenario sc;
    sc.probability = 1.0 / double(W);
    auto& x = sc.exogenous;
    x.spot.assign(T, 0.1);
    x.price_short.assign(T, 0.2);
    x.price_long.assign(T, 0.05);
    x.carbon_intensity.assign(T, 0.1);
    x.renewable_share.assign(T, 0.5);
    x.ghi.assign(T, 0.0);
    x.heat_demand.assign(T, 0.0);
    ClusterWorkload wl;
    wl.inelastic = {std::vector<double>(T, inelastic_cpu), std::vector<double>(T, 0.0)};
    wl.flexible = {flexible_cpu, 0.0};
    sc.workload.clusters.push_back(wl);
    s.scenarios.push_back(sc);
  }
  return s;
}

double row_activity(const LinearConstraint& row, const std::vector<double>& x) {
  double a = 0.0;
  for (const auto& t : row.terms) a += t.coef * x[t.var.index];
  return a;
}

bool row_holds(const LinearConstraint& row, const std::vector<double>& x, double tol = 1e-9) {
  const double a = row_activity(row, x);
  switch (row.sense) {
    case RowSense::le: return a <= row.rhs + tol;
    case RowSense::ge: return a >= row.rhs - tol;
    case RowSense::eq: return std::abs(a - row.rhs) <= tol;
  }
  return false;
}

const LinearConstraint& row(const MilpModel& m, const std::string& name) {
  const auto r = m.find_constraint(name);
  REQUIRE_MESSAGE(r.has_value(), name);
  return m.constraints()[*r];
}

double coef(const LinearConstraint& r, VarId v) {
  for (const auto& t : r.terms)
    if (t.var == v) return t.coef;
  return 0.0;
}

std::size_t count_with_suffix(const MilpModel& m, const std::string& family, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& v : m.variables())
    if (family_of(v.name) == family && v.name.size() > suffix.size() &&
        v.name.compare(v.name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ++n;
  return n;
}

Solution solve_ok(const MilpModel& m, double gap = 1e-7) {
  SolveOptions o;
  o.mip_gap = gap;
  auto s = solve(m, o);
  REQUIRE(s.has_values());
  const auto rep = check_solution(m, s.values);
  CHECK_MESSAGE(rep.ok(), rep.summary());
  return s;
}

// Hand-built power/heat/ORC stack for a single step with a free heat source.
PlanningModel orc_only_model(Sos2Encoding enc, double heat_in) {
  HubSpec h = micro_hub();
  h.data_center.clusters[0].rec_efficiency = 1.0;
  h.data_center.clusters[0].rec_idle_kw = 500.0;
  const auto sc = micro_scenarios(1, 1, 0.0);
  ModelOptions mo;
  mo.sos2 = enc;
  auto pm = begin_planning_model(sc, 1, mo);
  add_workload_block(pm, h.data_center, sc);
  add_power_heat_block(pm, h.data_center, true);
  add_orc_block(pm, OrcCurve{{{0, 0}, {50, 5}, {100, 12}}});
  pm.model.fix(pm.idx.q_orc_in(0, 0), heat_in);
  pm.model.set_objective(LinearExpr().add(pm.idx.p_orc(0, 0), -1.0));
  return pm;
}

}  // namespace

TEST_CASE("workload block: hand index count") {
  const HubSpec h = micro_hub();
  const auto sc = micro_scenarios(1, 24, 50.0, 100.0);
  auto pm = begin_planning_model(sc, 1, {});
  add_workload_block(pm, h.data_center, sc);
  const auto& m = pm.model;
  CHECK(count_with_suffix(m, "u", ",CPU)") + count_with_suffix(m, "u", ",GPU)") == 48);
  CHECK(m.count_rows("mem") == 48);
  CHECK(m.count_rows("cap_u") == 96);
  CHECK(m.count_rows("cc_inel") == 48);
  CHECK(m.count_rows("cc_flex") == 2);
  CHECK(m.count_rows("overprov") == 2);
}

TEST_CASE("workload block: quotas and flexibility") {
  SUBCASE("gamma = 1 makes every inelastic quota zero") {
    const auto sc = micro_scenarios(3, 4, 50.0);
    auto pm = begin_planning_model(sc, 1, {});
    add_workload_block(pm, micro_hub().data_center, sc);
    for (const auto& r : pm.model.constraints())
      if (family_of(r.name) == "quota_inel") CHECK(r.rhs == 0.0);
  }
  SUBCASE("gamma = 0.9 leaves a 0.1 quota") {
    HubSpec h = micro_hub();
    h.data_center.gamma_inelastic = 0.9;
    const auto sc = micro_scenarios(3, 4, 50.0);
    auto pm = begin_planning_model(sc, 1, {});
    add_workload_block(pm, h.data_center, sc);
    CHECK(row(pm.model, "quota_inel(t00,c00,CPU)").rhs == doctest::Approx(0.1));
  }
  SUBCASE("no flexible demand pins usage to the inelastic series") {
    HubSpec h = micro_hub();
    const auto sc = micro_scenarios(1, 6, 40.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 6));
    const auto s = solve_ok(pm.model);
    double total = 0.0;
    for (std::size_t t = 0; t < 6; ++t) total += s.value(pm.idx.u(0, t, 0, 0));
    CHECK(total == doctest::Approx(6 * 40.0));
  }
  SUBCASE("memory follows compute") {
    HubSpec h = micro_hub();
    h.data_center.clusters[0].mem_ratio = {4.0, 0.0};
    const auto sc = micro_scenarios(1, 4, 30.0, 20.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 4));
    const auto s = solve_ok(pm.model);
    for (std::size_t t = 0; t < 4; ++t)
      CHECK(s.value(pm.idx.u(0, t, 0, 2)) == doctest::Approx(4.0 * s.value(pm.idx.u(0, t, 0, 0))));
  }
}

TEST_CASE("constraint-count formulas on random sizes") {
  const std::size_t sizes[][3] = {{1, 4, 1}, {2, 6, 2}, {3, 8, 3}, {5, 3, 2}, {4, 12, 1}};
  for (const auto& sz : sizes) {
    const std::size_t W = sz[0], T = sz[1], C = sz[2];
    const HubSpec h = toy_hub({.clusters = C});
    auto sc = toy_scenarios(h, {.scenarios = W, .steps = T});
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, T));
    const auto& m = pm.model;
    CAPTURE(W);
    CAPTURE(T);
    CAPTURE(C);
    CHECK(m.count_rows("cc_inel") == W * T * C * 2);
    CHECK(m.count_rows("quota_inel") + m.count_rows("quota_flex") + m.count_rows("quota_ren") == T * C * 2 + C * 2 + 1);
    CHECK(m.sos2_sets().size() == W * T);
    CHECK(m.count_variables("z_bess") + m.count_variables("z_imb") == 2 * W * T);
  }
}

TEST_CASE("power and heat block") {
  SUBCASE("P_dc from the affine model") {
    const HubSpec h = micro_hub();
    const auto sc = micro_scenarios(1, 2, 100.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    const auto s = solve_ok(pm.model);
    CHECK(s.value(pm.idx.p_dc(0, 0)) == doctest::Approx(1.2 * (10.0 + 0.5 * 100.0)));
    CHECK(s.value(pm.idx.p_dc(0, 0)) == doctest::Approx(72.0));
  }
  SUBCASE("idle recovered heat") {
    const HubSpec h = micro_hub();
    const auto sc = micro_scenarios(1, 2, 0.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    const auto s = solve_ok(pm.model);
    CHECK(s.value(pm.idx.q_rec(0, 1)) == doctest::Approx(0.5 * 4.0));
  }
  SUBCASE("only cooled resources feed recovered heat") {
    HubSpec h = micro_hub();
    h.data_center.clusters[0].rho_coeff_kw = {0.5, 2.0, 0, 0};
    h.data_center.clusters[0].cooled = {false, true};
    const auto sc = micro_scenarios(1, 2, 0.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    const auto& r = row(pm.model, "heat_rec(w000,t00)");
    CHECK(coef(r, pm.idx.u(0, 0, 0, 0)) == 0.0);
    CHECK(coef(r, pm.idx.u(0, 0, 0, 1)) == doctest::Approx(-0.5 * 2.0));
  }
  SUBCASE("heat conservation") {
    HubSpec h = micro_hub();
    h.orc = OrcCurve{{{0, 0}, {50, 5}, {100, 12}}};
    const auto sc = micro_scenarios(1, 1, 0.0);
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 1));
    const auto& r = row(pm.model, "heat_split(w000,t00)");
    std::vector<double> x(pm.model.variables().size(), 0.0);
    x[pm.idx.q_rec(0, 0).index] = 80;
    x[pm.idx.q_orc_in(0, 0).index] = 30;
    x[pm.idx.q_sold(0, 0).index] = 20;
    x[pm.idx.q_lost(0, 0).index] = 30;
    CHECK(row_holds(r, x));
    // 81 into the ORC leaves -1 for the non-negative remainder
    x[pm.idx.q_orc_in(0, 0).index] = 81;
    x[pm.idx.q_sold(0, 0).index] = 0;
    x[pm.idx.q_lost(0, 0).index] = 0;
    CHECK_FALSE(row_holds(r, x));
    x[pm.idx.q_lost(0, 0).index] = -1;
    CHECK(row_holds(r, x));
    CHECK(pm.model.variable(pm.idx.q_lost(0, 0)).lower == 0.0);
  }
}

TEST_CASE("ORC block") {
  SUBCASE("binary adjacency encoding") {
    CHECK(solve_ok(orc_only_model(Sos2Encoding::binary, 75.0).model).objective == doctest::Approx(-8.5));
    CHECK(solve_ok(orc_only_model(Sos2Encoding::binary, 50.0).model).objective == doctest::Approx(-5.0));
    CHECK(solve_ok(orc_only_model(Sos2Encoding::binary, 0.0).model).objective == doctest::Approx(0.0));
  }
  SUBCASE("set structure") {
    const auto pm = orc_only_model(Sos2Encoding::binary, 75.0);
    REQUIRE(pm.model.sos2_sets().size() == 1);
    CHECK(pm.model.sos2_sets()[0].members.size() == 3);
    CHECK(pm.model.sos2_sets()[0].binary_encoded);
    CHECK(pm.model.count_variables("orc_seg") == 2);
    const auto native = orc_only_model(Sos2Encoding::native, 75.0);
    CHECK_FALSE(native.model.sos2_sets()[0].binary_encoded);
    CHECK(native.model.count_variables("orc_seg") == 0);
  }
  SUBCASE("native SOS2 through CBC") {
    if (!find_cbc_executable()) {
      MESSAGE("CBC not found; native SOS2 check skipped");
      return;
    }
    SolveOptions o;
    o.native_sos2 = true;
    for (double q : {75.0, 50.0, 0.0}) {
      const auto pm = orc_only_model(Sos2Encoding::native, q);
      const auto s = solve(pm.model, o, "cbc");
      REQUIRE(s.has_values());
      CHECK(check_solution(pm.model, s.values).ok());
      CHECK(s.value(pm.idx.p_orc(0, 0)) == doctest::Approx(OrcCurve{{{0, 0}, {50, 5}, {100, 12}}}.power_at(q)));
    }
  }
  SUBCASE("HiGHS refuses non-encoded sets") {
    const auto pm = orc_only_model(Sos2Encoding::native, 75.0);
    CHECK_THROWS_AS(solve(pm.model, {}, "highs"), EnvironmentError);
  }
}

TEST_CASE("BESS block") {
  HubSpec h = micro_hub();
  h.bess = BessSpec{25, 250, 250, 250, 0.9, 125, 5000, 100000, 20000};
  const auto sc = micro_scenarios(1, 24, 10.0);
  const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 24));
  const auto& m = pm.model;
  std::vector<double> x(m.variables().size(), 0.0);

  SUBCASE("aging of a one-hour full-power charge") {
    const auto& r = row(m, "bess_aging(w000,t00)");
    x[pm.idx.p_bess_c(0, 0).index] = 250.0;
    x[pm.idx.a_bess(0, 0).index] = 250.0 * 1.0 / (2.0 * 5000.0 * 250.0);
    CHECK(x[pm.idx.a_bess(0, 0).index] == doctest::Approx(1e-4));
    CHECK(row_holds(r, x, 1e-12));
    CHECK(pm.costs[0].bess_aging.evaluate(x) == doctest::Approx(1e-4 * 100000.0));
  }
  SUBCASE("discharge is an AC export after losses") {
    const auto& r = row(m, "bess_ac(w000,t03)");
    x[pm.idx.p_bess_d(0, 3).index] = 10.0;
    x[pm.idx.p_bess_ac(0, 3).index] = -9.0;
    CHECK(row_holds(r, x));
    x[pm.idx.p_bess_ac(0, 3).index] = -10.0;
    CHECK_FALSE(row_holds(r, x));
  }
  SUBCASE("idle battery") {
    for (std::size_t t = 0; t <= 24; ++t) x[pm.idx.e_bess(0, t).index] = 125.0;
    for (std::size_t t = 0; t < 24; ++t) {
      CHECK(row_holds(row(m, indexed_name("bess_energy", {{Axis::scenario, 0}, {Axis::step, t}})), x));
      CHECK(row_holds(row(m, indexed_name("bess_aging", {{Axis::scenario, 0}, {Axis::step, t}})), x));
    }
    CHECK(row_holds(row(m, "bess_mean_zero"), x));
  }
  SUBCASE("exclusivity big-M uses the rated power") {
    const auto& r = row(m, "bess_charge_on(w000,t00)");
    CHECK(coef(r, pm.idx.z_bess(0, 0)) == -250.0);
  }
  SUBCASE("initial energy outside bounds") {
    HubSpec bad = h;
    bad.bess->e_init_kwh = 300;
    CHECK_THROWS_AS(build_planning_model(bad, sc, DeratingProfile::flat(300, 24)), BuildError);
  }
}

TEST_CASE("PV block") {
  HubSpec h = micro_hub();
  h.pv = PvSpec{200.0, 1000.0};
  auto sc = micro_scenarios(1, 3, 10.0);
  sc.scenarios[0].exogenous.ghi = {1000.0, 0.0, 500.0};
  const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 3));
  CHECK(pm.model.variable(pm.idx.p_pv(0, 0)).upper == doctest::Approx(200.0));
  CHECK(pm.model.variable(pm.idx.p_pv(0, 1)).upper == 0.0);
  CHECK(pm.model.variable(pm.idx.p_pv(0, 2)).upper == doctest::Approx(100.0));
  CHECK(pm.model.variable(pm.idx.p_pv(0, 2)).lower == 0.0);
}

TEST_CASE("market block") {
  HubSpec h = micro_hub();
  h.data_center.pue = 1.0;
  h.data_center.clusters[0].rho_intercept_kw = 0.0;
  h.data_center.clusters[0].rho_coeff_kw = {1.0, 0, 0, 0};
  SUBCASE("short imbalance against a lower bid") {
    const auto sc = micro_scenarios(1, 1, 100.0);
    ModelOptions mo;
    mo.fixed_day_ahead = std::vector<double>{90.0};
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 1), mo);
    const auto s = solve_ok(pm.model);
    CHECK(s.value(pm.idx.p_plus(0, 0)) == doctest::Approx(10.0));
    CHECK(s.value(pm.idx.p_minus(0, 0)) == doctest::Approx(0.0));
    // dT = 24 h on a one-step grid
    CHECK(pm.costs[0].imbalance.evaluate(s.values) == doctest::Approx(0.2 * 10.0 * 24.0));
  }
  SUBCASE("perfect bid") {
    const auto sc = micro_scenarios(1, 1, 100.0);
    ModelOptions mo;
    mo.fixed_day_ahead = std::vector<double>{100.0};
    auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 1), mo);
    const auto s = solve_ok(pm.model);
    CHECK(pm.costs[0].imbalance.evaluate(s.values) == doctest::Approx(0.0));
  }
  SUBCASE("de-rated step below demand is infeasible") {
    auto sc = micro_scenarios(1, 24, 0.0);
    sc.scenarios[0].workload.clusters[0].inelastic[0][17] = 80.0;
    auto caps = DeratingProfile::flat(300, 24);
    caps.cap_kw[17] = 75.0;
    const auto pm = build_planning_model(h, sc, caps);
    CHECK(solve(pm.model, {}).status == SolveStatus::infeasible);
    caps.cap_kw[17] = 80.0;
    CHECK(solve(build_planning_model(h, sc, caps).model, {}).status == SolveStatus::optimal);
  }
  SUBCASE("day-ahead variable is shared by all scenarios") {
    const auto sc = micro_scenarios(3, 4, 10.0);
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 4));
    CHECK(pm.idx.p_da.size() == 4);
    CHECK(pm.model.count_variables("p_da") == 4);
  }
  SUBCASE("signed carbon accounting") {
    const auto sc = micro_scenarios(1, 2, 10.0);
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    std::vector<double> x(pm.model.variables().size(), 0.0);
    x[pm.idx.p_gcp(0, 0).index] = -10.0;
    CHECK(pm.costs[0].emissions_grid.evaluate(x) == doctest::Approx(-0.1 * 10.0 * 12.0));
  }
}

TEST_CASE("heat market block") {
  HubSpec h = micro_hub();
  h.economics.heat_price = 0.03;
  auto sc = micro_scenarios(1, 24, 10.0);
  sc.scenarios[0].exogenous.heat_demand.assign(24, 150.0);
  sc.scenarios[0].exogenous.heat_demand[5] = 0.0;
  sc.scenarios[0].exogenous.heat_demand[6] = 50.0;
  const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 24));
  std::vector<double> x(pm.model.variables().size(), 0.0);
  x[pm.idx.q_sold(0, 0).index] = 100.0;
  CHECK(pm.costs[0].heat_revenue.evaluate(x) == doctest::Approx(3.0));
  CHECK(pm.model.variable(pm.idx.q_sold(0, 5)).upper == 0.0);
  CHECK(pm.model.variable(pm.idx.q_sold(0, 6)).upper == 50.0);
}

TEST_CASE("renewable block") {
  HubSpec h = micro_hub();
  SUBCASE("fully green grid keeps the tally at zero") {
    auto sc = micro_scenarios(1, 4, 20.0);
    sc.scenarios[0].exogenous.renewable_share.assign(4, 1.0);
    h.economics.renewable_target = 1.0;
    h.economics.renewable_alpha = 0.0;
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 4));
    const auto s = solve_ok(pm.model);
    for (std::size_t t = 0; t <= 4; ++t) CHECK(s.value(pm.idx.e_nonren(0, t)) == doctest::Approx(0.0));
  }
  SUBCASE("zero target holds without violations") {
    const auto sc = micro_scenarios(1, 2, 20.0);
    h.economics.renewable_target = 0.0;
    h.economics.renewable_alpha = 0.0;
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    const auto s = solve_ok(pm.model);
    CHECK(s.value(pm.idx.v_ren(0)) == doctest::Approx(0.0));
    CHECK(s.value(pm.idx.e_nonren(0, 2)) <= s.value(pm.idx.e_dc(0)) + 1e-6);
  }
  SUBCASE("alpha = 1 never binds") {
    const auto sc = micro_scenarios(2, 2, 20.0);
    h.economics.renewable_alpha = 1.0;
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    CHECK(row(pm.model, "quota_ren").rhs == 1.0);
  }
  SUBCASE("unattainable target is infeasible") {
    const auto sc = micro_scenarios(1, 2, 20.0);
    h.economics.renewable_target = 0.9;
    h.economics.renewable_alpha = 0.0;
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    CHECK(solve(pm.model, {}).status == SolveStatus::infeasible);
  }
  SUBCASE("big-M of the renewable CC") {
    const auto sc = micro_scenarios(1, 2, 20.0);
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 2));
    CHECK(coef(row(pm.model, "cc_ren(w000)"), pm.idx.v_ren(0)) == doctest::Approx(-300.0 * 24.0));
  }
}

TEST_CASE("CVaR objective") {
  SUBCASE("tail enumeration") {
    CHECK(discrete_cvar({10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.75) == doctest::Approx(40.0));
    CHECK(discrete_cvar({10, 20, 30, 40}, {0.25, 0.25, 0.25, 0.25}, 0.5) == doctest::Approx(35.0));
    CHECK(discrete_cvar({10, 20}, {0.5, 0.5}, 0.5) == doctest::Approx(20.0));
    // boundary atom split: worst 40% of {0.5: 10, 0.5: 20} -> 20
    CHECK(discrete_cvar({10, 20}, {0.5, 0.5}, 0.6) == doctest::Approx(20.0));
    CHECK(discrete_cvar({10, 20}, {0.5, 0.5}, 0.2) == doctest::Approx((0.5 * 20 + 0.3 * 10) / 0.8));
  }
  SUBCASE("beta = 0 objective is the expected cost") {
    const HubSpec h = toy_hub({.cvar_beta = 0.0});
    const auto sc = toy_scenarios(h, {.scenarios = 3, .steps = 6});
    const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 6));
    const auto s = solve_ok(pm.model, 1e-6);
    double expected = 0.0;
    for (std::size_t w = 0; w < 3; ++w) expected += pm.probabilities[w] * pm.costs[w].total(h.economics.carbon_price).evaluate(s.values);
    CHECK(s.objective == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("single scenario: objective equals the scenario cost for any beta") {
    for (double beta : {0.0, 0.4, 1.0}) {
      const HubSpec h = toy_hub({.cvar_beta = beta});
      const auto sc = toy_scenarios(h, {.scenarios = 1, .steps = 4});
      const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 4));
      const auto s = solve_ok(pm.model, 1e-7);
      CHECK(s.objective == doctest::Approx(s.value(pm.idx.pi_op(0))).epsilon(1e-7));
    }
  }
  SUBCASE("objective identity and beta monotonicity") {
    auto run = [](double beta) {
      const HubSpec h = toy_hub({.cvar_beta = beta});
      auto h2 = h;
      h2.economics.cvar_alpha = 0.5;
      const auto sc = toy_scenarios(h2, {.scenarios = 4, .steps = 6, .spot_volatility = 0.9});
      const auto pm = build_planning_model(h2, sc, DeratingProfile::flat(300, 6));
      const auto s = solve_ok(pm.model, 1e-8);
      std::vector<double> costs;
      for (std::size_t w = 0; w < 4; ++w) costs.push_back(s.value(pm.idx.pi_op(w)));
      const double e = std::inner_product(costs.begin(), costs.end(), pm.probabilities.begin(), 0.0);
      const double cvar = discrete_cvar(costs, pm.probabilities, 0.5);
      CHECK(s.objective == doctest::Approx((1 - beta) * e + beta * cvar).epsilon(1e-6));
      return std::pair{e, cvar};
    };
    const auto [e0, c0] = run(0.0);
    const auto [e1, c1] = run(1.0);
    (void)run(0.5);
    CHECK(e0 <= e1 + 1e-6 * std::abs(e1));
    CHECK(c1 <= c0 + 1e-6 * std::abs(c0));
  }
}

TEST_CASE("ToU energy cost") {
  HubSpec h = micro_hub();
  h.data_center.pue = 1.0;
  h.data_center.clusters[0].rho_intercept_kw = 0.0;
  h.data_center.clusters[0].rho_coeff_kw = {1.0, 0, 0, 0};
  h.economics.tou_tariff = std::vector<double>(24, 0.2);
  const auto sc = micro_scenarios(1, 24, 100.0);
  ModelOptions mo;
  mo.scheme = SupplyScheme::tou;
  const auto pm = build_planning_model(h, sc, DeratingProfile::flat(300, 24), mo);
  CHECK_FALSE(pm.idx.p_da.present());
  CHECK_FALSE(pm.idx.p_plus.present());
  const auto s = solve_ok(pm.model);
  CHECK(pm.costs[0].tou_energy.evaluate(s.values) == doctest::Approx(480.0));
  std::vector<double> x(pm.model.variables().size(), 0.0);
  CHECK(pm.costs[0].tou_energy.evaluate(x) == 0.0);
  x[pm.idx.p_gcp(0, 0).index] = -10.0;
  CHECK(pm.costs[0].tou_energy.evaluate(x) == doctest::Approx(-2.0));

  HubSpec no_tariff = h;
  no_tariff.economics.tou_tariff.reset();
  CHECK_THROWS_AS(build_planning_model(no_tariff, sc, DeratingProfile::flat(300, 24), mo), BuildError);
}

TEST_CASE("build errors") {
  const HubSpec h = micro_hub();
  auto sc = micro_scenarios(1, 4, 10.0);
  CHECK_THROWS_AS(build_planning_model(h, sc, DeratingProfile::flat(300, 3)), BuildError);
  sc.scenarios[0].workload.clusters.push_back(sc.scenarios[0].workload.clusters[0]);
  CHECK_THROWS_AS(build_planning_model(h, sc, DeratingProfile::flat(300, 4)), BuildError);
}
