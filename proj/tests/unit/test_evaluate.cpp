#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dchub/domain/errors.hpp"
#include "dchub/evaluate/evaluate.hpp"
#include "toy_hub.hpp"

using namespace dchub;
using testing::bare_hub;
using testing::flat_day;

namespace {

RealizedDay realized_from(const Scenario& s, std::string date = "2025-07-18") {
  return RealizedDay{std::move(date), s.exogenous, s.workload};
}

PlanOptions exact() {
  PlanOptions o;
  o.solve.mip_gap = 1e-9;
  return o;
}

ExpostOptions exact_expost() {
  ExpostOptions o;
  o.solve.mip_gap = 1e-9;
  return o;
}

DayOutcome day_with_cost(double cost) {
  DayOutcome d;
  d.cost = cost;
  d.scheme = "Custom";
  return d;
}

}  // namespace

TEST_CASE("summaries") {
  SUBCASE("single day") {
    const auto s = summarize_values({5.0});
    CHECK(s.q25 == 5.0);
    CHECK(s.mean == 5.0);
    CHECK(s.q75 == 5.0);
    CHECK(s.sigma == 0.0);
  }
  SUBCASE("four values") {
    const auto s = summarize_values({4, 1, 3, 2});
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.sigma == doctest::Approx(std::sqrt(1.25)));
    CHECK(s.q25 == doctest::Approx(1.75));
    CHECK(s.q75 == doctest::Approx(3.25));
  }
  SUBCASE("report keys") {
    const auto r = summarize({day_with_cost(1), day_with_cost(3)});
    CHECK(r.scheme == "Custom");
    for (const char* k : {"ex_post_cost", "ex_ante_cost", "ex_post_emissions", "ex_ante_emissions",
                          "renewable_share", "imbalance_energy"})
      CHECK(r.summary.count(k) == 1);
    CHECK(r.summary.at("ex_post_cost").mean == doctest::Approx(2.0));
  }
}

TEST_CASE("ex-post re-optimization") {
  const HubSpec hub = bare_hub();
  const auto caps = DeratingProfile::flat(300, 24);
  const double p_dc = 1.2 * (10.0 + 0.5 * 100.0);

  SUBCASE("perfect bid replays its plan with zero imbalance") {
    const auto sc = flat_day(1, 100.0);
    const auto bid = plan_day(hub, sc, caps, exact());
    const auto out = expost_reoptimize(hub, bid, realized_from(sc.scenarios[0]), caps, exact_expost());
    CHECK(out.status == SolveStatus::optimal);
    CHECK(out.cost == doctest::Approx(bid.expected_cost).epsilon(1e-9));
    CHECK(out.ex_ante_cost == bid.expected_cost);
    CHECK(out.imbalance_energy == doctest::Approx(0.0));
    CHECK(out.renewable_share == doctest::Approx(0.5));
  }
  SUBCASE("a bid 10 kW above the load is settled long") {
    const auto sc = flat_day(1, 100.0);
    auto bid = plan_day(hub, sc, caps, exact());
    for (double& d : bid.day_ahead) d += 10.0;
    const auto out = expost_reoptimize(hub, bid, realized_from(sc.scenarios[0]), caps, exact_expost());
    for (std::size_t t = 0; t < 24; ++t) {
      CHECK(out.dispatch.at("p_long")[t] == doctest::Approx(10.0));
      CHECK(out.dispatch.at("p_short")[t] == doctest::Approx(0.0));
    }
    CHECK(out.imbalance_energy == doctest::Approx(240.0));
    CHECK(out.cost == doctest::Approx(24 * (0.1 * (p_dc + 10.0) - 0.05 * 10.0)));
  }
  SUBCASE("a bid 10 kW below the load is settled short") {
    const auto sc = flat_day(1, 100.0);
    auto bid = plan_day(hub, sc, caps, exact());
    for (double& d : bid.day_ahead) d -= 10.0;
    const auto out = expost_reoptimize(hub, bid, realized_from(sc.scenarios[0]), caps, exact_expost());
    CHECK(out.dispatch.at("p_short")[5] == doctest::Approx(10.0));
    CHECK(out.cost == doctest::Approx(24 * (0.1 * (p_dc - 10.0) + 0.2 * 10.0)));
  }
  SUBCASE("no ex-post cost beats hindsight planning") {
    const HubSpec toy = testing::toy_hub();
    testing::ToyScenarioOptions so;
    so.scenarios = 4;
    const auto sc = testing::toy_scenarios(toy, so);
    const auto tcaps = testing::case_study_derating();
    PlanOptions po;
    po.solve.mip_gap = 1e-7;
    const auto bid = plan_day(toy, sc, tcaps, po);
    so.seed = 99;
    so.scenarios = 1;
    auto real = testing::toy_scenarios(toy, so);
    real.scenarios[0].probability = 1.0;
    const auto out = expost_reoptimize(toy, bid, realized_from(real.scenarios[0]), tcaps, exact_expost());
    const auto hindsight = plan_day(toy, real, tcaps, po);
    CHECK(out.cost >= hindsight.objective - 1e-6 * std::abs(hindsight.objective) - 1e-6);
  }
  SUBCASE("realization on a different grid") {
    const auto sc = flat_day(1, 100.0);
    const auto bid = plan_day(hub, sc, caps, exact());
    auto real = realized_from(sc.scenarios[0]);
    real.exogenous.spot.pop_back();
    CHECK_THROWS_AS(expost_reoptimize(hub, bid, real, caps), InputError);
  }
}

TEST_CASE("scheme comparison") {
  HubSpec hub = bare_hub();
  hub.economics.tou_tariff = std::vector<double>(24, 0.1);
  std::vector<StudyDay> days;
  for (int d = 0; d < 3; ++d) {
    auto sc = flat_day(1, 60.0 + 10.0 * d, 120.0);
    days.push_back({"2025-07-1" + std::to_string(d), sc, realized_from(sc.scenarios[0], "day"),
                    DeratingProfile::flat(300, 24)});
  }
  CompareOptions o;
  o.plan = exact();
  o.workers = 2;
  const auto cmp = compare_schemes(hub, days, o);
  REQUIRE(cmp.reports.size() == 3);
  CHECK(cmp.reports[0].scheme == "ToU");
  CHECK(cmp.reports[1].scheme == "Custom");
  CHECK(cmp.reports[2].scheme == "Custom no WL flex");
  for (const auto& r : cmp.reports) CHECK(r.days.size() == 3);
  CHECK(cmp.reports[1].days[2].date == "2025-07-12");
  // Tariff equal to a flat, perfectly forecast spot price: the schemes coincide.
  CHECK(std::abs(cmp.delta_cost_pct) < 1e-6);
  // Flat prices leave nothing for flexibility to gain.
  CHECK(cmp.flex_value_eur == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));

  std::ostringstream csv;
  write_outcomes_csv(csv, cmp.reports);
  const std::string text = csv.str();
  CHECK(text.rfind("date,scheme,cost_eur,emissions_kg,imbalance_kwh,renshare\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  const auto j = to_json(cmp);
  CHECK(j.is_object());

  SUBCASE("ToU requires a tariff") {
    HubSpec no_tariff = bare_hub();
    CHECK_THROWS_AS(compare_schemes(no_tariff, days, o), InputError);
  }
  SUBCASE("worker count does not change results") {
    CompareOptions one = o;
    one.workers = 1;
    const auto serial = compare_schemes(hub, days, one);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t d = 0; d < 3; ++d) CHECK(serial.reports[r].days[d].cost == cmp.reports[r].days[d].cost);
  }
}

TEST_CASE("parallel_for") {
  SUBCASE("visits every index once") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  SUBCASE("rethrows the lowest failing index") {
    try {
      parallel_for(50, 3, [](std::size_t i) {
        if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "7");
    }
  }
  SUBCASE("zero work") { parallel_for(0, 4, [](std::size_t) { FAIL("called"); }); }
}
