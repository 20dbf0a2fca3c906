#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dchub/bidding/bidding.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/scenario/redistribute.hpp"
#include "toy_hub.hpp"

using namespace dchub;
using testing::bare_hub;
using testing::flat_day;

namespace {

PlanOptions exact() {
  PlanOptions o;
  o.solve.mip_gap = 1e-9;
  return o;
}

// Discrete CVaR by sorting: mean of the worst (1 - alpha) probability mass.
double sorted_cvar(std::vector<double> cost, double alpha) {
  std::sort(cost.rbegin(), cost.rend());
  const double p = 1.0 / double(cost.size());
  double mass = 1.0 - alpha, acc = 0.0;
  for (double c : cost) {
    const double take = std::min(p, mass);
    acc += take * c;
    mass -= take;
    if (mass <= 0.0) break;
  }
  return acc / (1.0 - alpha);
}

}  // namespace

TEST_CASE("VCC extraction") {
  SUBCASE("max rule over three scenarios") {
    const auto v = extract_vcc({{3}, {7}, {5}}, {0.2, 0.3, 0.5});
    CHECK(v == std::vector<double>{7});
  }
  SUBCASE("single scenario returns its usage") {
    CHECK(extract_vcc({{1, 2, 3}}, {1.0}) == std::vector<double>{1, 2, 3});
  }
  SUBCASE("quantile rule") {
    VccRule q{VccRule::Kind::quantile, 0.5};
    CHECK(extract_vcc({{3}, {7}, {5}}, {0.2, 0.3, 0.5}, q) == std::vector<double>{5});
    q.quantile = 0.2;
    CHECK(extract_vcc({{3}, {7}, {5}}, {0.2, 0.3, 0.5}, q) == std::vector<double>{3});
    q.quantile = 1.0;
    CHECK(extract_vcc({{3}, {7}, {5}}, {0.2, 0.3, 0.5}, q) == std::vector<double>{7});
  }
}

TEST_CASE("plan_day on a hub without DERs") {
  SUBCASE("flat prices: bid equals load and cost is closed form") {
    const auto bid = plan_day(bare_hub(), flat_day(2, 100.0), DeratingProfile::flat(300, 24), exact());
    REQUIRE(bid.status == SolveStatus::optimal);
    const double p_dc = 1.2 * (10.0 + 0.5 * 100.0);
    for (double d : bid.day_ahead) CHECK(d == doctest::Approx(p_dc).epsilon(1e-7));
    CHECK(bid.expected_cost == doctest::Approx(0.1 * p_dc * 24).epsilon(1e-7));
    CHECK(bid.objective == doctest::Approx(bid.expected_cost).epsilon(1e-7));
    CHECK(bid.audit.ok());
    for (const auto& b : bid.breakdown) {
      CHECK(b.total == doctest::Approx(b.sum_of_parts()).epsilon(1e-9));
      CHECK(std::abs(b.imbalance) < 1e-6);
    }
    for (double v : bid.vcc[0][index_of(Resource::cpu)]) CHECK(v == doctest::Approx(100.0));
  }
  SUBCASE("flexible work moves to the cheapest hours") {
    auto sc = flat_day(1, 50.0, 300.0);
    auto& x = sc.scenarios[0].exogenous;
    for (std::size_t t = 0; t < 24; ++t) {
      x.spot[t] = 0.1 + 0.01 * double(t);
      x.price_short[t] = 1.3 * x.spot[t];
      x.price_long[t] = 0.7 * x.spot[t];
    }
    const auto bid = plan_day(bare_hub(), sc, DeratingProfile::flat(300, 24), exact());
    double base = 0.0;
    for (std::size_t t = 0; t < 24; ++t) base += sc.scenarios[0].exogenous.spot[t] * 1.2 * (10.0 + 0.5 * 50.0);
    // 150 extra CPU in hours 0 and 1 (capacity 200).
    CHECK(bid.expected_cost == doctest::Approx(base + 0.6 * (150 * 0.10 + 150 * 0.11)).epsilon(1e-7));

    // Folding the same work uniformly into the inelastic series cannot be cheaper.
    ScenarioSet folded = sc;
    folded.scenarios[0].workload = redistribute_flexible_uniform(sc.scenarios[0].workload, bare_hub().data_center, sc.grid);
    const auto rigid = plan_day(bare_hub(), folded, DeratingProfile::flat(300, 24), exact());
    CHECK(bid.expected_cost <= rigid.expected_cost + 1e-7);
  }
  SUBCASE("beta = 1 optimizes the discrete CVaR") {
    HubSpec h = bare_hub();
    h.economics.cvar_beta = 1.0;
    h.economics.cvar_alpha = 0.5;
    auto sc = flat_day(4, 60.0);
    for (std::size_t w = 0; w < 4; ++w)
      sc.scenarios[w].workload.clusters[0].inelastic[0].assign(24, 40.0 + 30.0 * double(w));
    const auto bid = plan_day(h, sc, DeratingProfile::flat(300, 24), exact());
    std::vector<double> totals;
    for (const auto& b : bid.breakdown) totals.push_back(b.total);
    CHECK(bid.cvar == doctest::Approx(sorted_cvar(totals, 0.5)).epsilon(1e-7));
    CHECK(bid.objective == doctest::Approx(bid.cvar).epsilon(1e-6));
  }
}

TEST_CASE("plan_day on the toy hub") {
  const HubSpec hub = testing::toy_hub();
  testing::ToyScenarioOptions so;
  so.scenarios = 3;
  const auto sc = testing::toy_scenarios(hub, so);
  const auto caps = testing::case_study_derating();
  PlanOptions o;
  o.solve.mip_gap = 1e-6;
  const auto bid = plan_day(hub, sc, caps, o);
  REQUIRE(bid.status == SolveStatus::optimal);
  CHECK(bid.audit.ok());
  CHECK(bid.audit.checker_max_violation <= 1e-6);
  CHECK(bid.day_ahead.size() == 24);
  for (std::size_t t = 0; t < 24; ++t) CHECK(bid.day_ahead[t] <= caps.cap_kw[t] + 1e-6);
  double mean = 0.0;
  for (std::size_t w = 0; w < bid.breakdown.size(); ++w) {
    CHECK(bid.breakdown[w].total == doctest::Approx(bid.breakdown[w].sum_of_parts()).epsilon(1e-9));
    mean += bid.probabilities[w] * bid.breakdown[w].total;
  }
  CHECK(mean == doctest::Approx(bid.expected_cost));
  CHECK(bid.dispatch.size() == 3);
  CHECK(bid.dispatch[0].has("p_gcp"));

  SUBCASE("json and csv outputs") {
    const auto j = to_json(bid);
    CHECK(j["schema_version"] == 1);
    CHECK(j["scheme"] == "custom_ppa");
    CHECK(j["day_ahead_kw"].size() == 24);
    CHECK(j["scenarios"].size() == 3);
    CHECK(j["audit"]["ok"] == true);
    std::ostringstream csv;
    write_bid_csv(csv, bid);
    CHECK(csv.str().rfind("step,day_ahead_kw\n0,", 0) == 0);
    std::ostringstream vcc;
    write_vcc_csv(vcc, bid, 0);
    CHECK(vcc.str().rfind("step,CPU,GPU,MEM-CPU,MEM-GPU\n", 0) == 0);
    const std::string text = vcc.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 25);
  }
  SUBCASE("ToU scheme has no imbalance and reports the expected GCP profile") {
    PlanOptions t = o;
    t.model.scheme = SupplyScheme::tou;
    const auto tb = plan_day(hub, sc, caps, t);
    CHECK(tb.scheme == SupplyScheme::tou);
    for (const auto& b : tb.breakdown) {
      CHECK(b.day_ahead == 0.0);
      CHECK(b.imbalance == 0.0);
    }
    for (std::size_t t2 = 0; t2 < 24; ++t2) {
      double e = 0.0;
      for (std::size_t w = 0; w < 3; ++w) e += tb.probabilities[w] * tb.dispatch[w].at("p_gcp")[t2];
      CHECK(tb.day_ahead[t2] == doctest::Approx(e));
    }
  }
}

TEST_CASE("plan_day errors") {
  SUBCASE("unattainable renewable target names the renewable relaxation") {
    HubSpec h = bare_hub();
    h.economics.renewable_target = 1.0;
    h.economics.renewable_alpha = 0.0;
    try {
      plan_day(h, flat_day(2, 100.0), DeratingProfile::flat(300, 24), exact());
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.hint().find("renewable") != std::string::npos);
    }
  }
  SUBCASE("de-rating profile of the wrong length") {
    CHECK_THROWS_AS(plan_day(bare_hub(), flat_day(1, 10.0), DeratingProfile::flat(300, 23)), InputError);
  }
  SUBCASE("probabilities not summing to one") {
    auto sc = flat_day(2, 10.0);
    sc.scenarios[0].probability = 0.7;
    CHECK_THROWS_AS(plan_day(bare_hub(), sc, DeratingProfile::flat(300, 24)), InputError);
  }
}
