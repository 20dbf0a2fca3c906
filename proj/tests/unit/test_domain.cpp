#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dchub/domain/config_io.hpp"
#include "dchub/domain/derating.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/domain/fitting.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/domain/validation.hpp"
#include "toy_hub.hpp"

using namespace dchub;
using dchub::testing::case_study_derating;
using dchub::testing::toy_hub;

namespace {

TimeGrid hourly() {
  TimeGrid g;
  g.step_hours = 1.0;
  g.steps_per_day = 24;
  return g;
}

const PpaContract kCaseStudyPpa{300.0, 25.0, 6.0, 30.0};

}  // namespace

TEST_CASE("hub spec validation") {
  SUBCASE("toy hub is valid") { CHECK(validate_hub_spec(toy_hub()).ok()); }
  SUBCASE("e_min above e_max") {
    HubSpec h = toy_hub();
    h.bess->e_min_kwh = 50;
    h.bess->e_max_kwh = 40;
    h.bess->e_init_kwh = 45;
    const auto r = validate_hub_spec(h);
    CHECK(r.mentions("e_min ≤ e_max"));
  }
  SUBCASE("ORC samples (0,0),(50,5),(100,12) are valid") {
    HubSpec h = toy_hub();
    h.orc = OrcCurve{{{0, 0}, {50, 5}, {100, 12}}};
    CHECK(validate_hub_spec(h).ok());
    // independent inspection: increasing heat, non-decreasing power, p <= q
    for (std::size_t i = 1; i < h.orc->samples.size(); ++i) {
      CHECK(h.orc->samples[i].heat_kw > h.orc->samples[i - 1].heat_kw);
      CHECK(h.orc->samples[i].power_kw <= h.orc->samples[i].heat_kw);
    }
  }
  SUBCASE("pue below one") {
    HubSpec h = toy_hub();
    h.data_center.pue = 0.9;
    CHECK(validate_hub_spec(h).mentions("pue ≥ 1"));
  }
  SUBCASE("validation does not mutate") {
    const HubSpec h = toy_hub();
    const HubSpec copy = h;
    (void)validate_hub_spec(h);
    CHECK(h == copy);
  }
}

TEST_CASE("ORC interpolation") {
  const OrcCurve orc{{{0, 0}, {50, 5}, {100, 12}}};
  CHECK(orc.power_at(75) == doctest::Approx(8.5));
  CHECK(orc.power_at(0) == 0.0);
  CHECK(orc.power_at(50) == doctest::Approx(5.0));
}

TEST_CASE("de-rating validator") {
  const TimeGrid g = hourly();
  SUBCASE("case-study profile passes with 1025 kWh") {
    const auto v = validate_derating(case_study_derating(24, 300.0), kCaseStudyPpa, g);
    REQUIRE(v.daily.size() == 1);
    CHECK(v.pass());
    // (300-75) + (300-25) + (300-25) + (300-50)
    CHECK(v.daily[0].derating_energy_kwh == doctest::Approx(225.0 + 275.0 + 275.0 + 250.0));
    CHECK(v.daily[0].limit_kwh == doctest::Approx((300.0 - 25.0) * 6.0));
  }
  SUBCASE("cap below the guaranteed minimum fails") {
    auto p = DeratingProfile::flat(300.0, 24);
    p.cap_kw[10] = 10.0;
    const auto v = validate_derating(p, kCaseStudyPpa, g);
    CHECK_FALSE(v.minimum_capacity_ok());
    CHECK(v.below_minimum_steps == std::vector<std::size_t>{10});
    CHECK_FALSE(v.pass());
  }
  SUBCASE("flat rated profile passes with zero energy") {
    const auto v = validate_derating(DeratingProfile::flat(300.0, 24), kCaseStudyPpa, g);
    CHECK(v.pass());
    CHECK(v.daily[0].derating_energy_kwh == 0.0);
  }
  SUBCASE("daily budget exceeded") {
    auto p = DeratingProfile::flat(300.0, 24);
    for (std::size_t t = 0; t < 7; ++t) p.cap_kw[t] = 25.0;  // 7 h * 275 kW > 6 h * 275 kW
    const auto v = validate_derating(p, kCaseStudyPpa, g);
    CHECK(v.minimum_capacity_ok());
    CHECK_FALSE(v.daily_ok());
    CHECK_FALSE(v.pass());
  }
  SUBCASE("weekly budget exceeded while every day passes") {
    auto p = DeratingProfile::flat(300.0, 24 * 7);
    for (std::size_t d = 0; d < 7; ++d)
      for (std::size_t t = 0; t < 5; ++t) p.cap_kw[d * 24 + t] = 25.0;  // 35 h > 30 h per week
    const auto v = validate_derating(p, kCaseStudyPpa, g);
    CHECK(v.daily_ok());
    CHECK_FALSE(v.weekly_ok());
    CHECK_FALSE(v.pass());
  }
  SUBCASE("length must be whole days") {
    CHECK_THROWS_AS(validate_derating(DeratingProfile::flat(300.0, 23), kCaseStudyPpa, g), InputError);
  }
  SUBCASE("raising caps never turns a pass into a fail") {
    auto p = case_study_derating(24, 300.0);
    REQUIRE(validate_derating(p, kCaseStudyPpa, g).pass());
    for (std::size_t t = 0; t < 24; ++t) {
      auto q = p;
      q.cap_kw[t] = std::min(300.0, q.cap_kw[t] + 40.0);
      CHECK(validate_derating(q, kCaseStudyPpa, g).pass());
    }
  }
}

TEST_CASE("cluster power model fit") {
  SUBCASE("exact affine data with idle columns") {
    UsageTable u;
    std::vector<double> p;
    for (int i = 0; i < 10; ++i) {
      u.push_back({double(i * 3 % 7), 0.0, 0.0, 0.0});
      p.push_back(10.0 + 2.0 * u.back()[0]);
    }
    const auto f = fit_cluster_power_model(u, p);
    CHECK(f.rho_intercept_kw == doctest::Approx(10.0));
    CHECK(f.rho_coeff_kw[0] == doctest::Approx(2.0));
    CHECK(f.rho_coeff_kw[1] == 0.0);
    CHECK(f.dropped[1]);
  }
  SUBCASE("constant target") {
    UsageTable u{{1, 2, 3, 4}, {2, 1, 5, 3}, {4, 4, 1, 1}, {3, 7, 2, 9}, {5, 2, 6, 2}, {8, 1, 1, 7}};
    std::vector<double> p(u.size(), 5.0);
    const auto f = fit_cluster_power_model(u, p);
    CHECK(f.rho_intercept_kw == doctest::Approx(5.0));
    for (double c : f.rho_coeff_kw) CHECK(c == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("single row") {
    CHECK_THROWS_AS(fit_cluster_power_model({{1, 2, 3, 4}}, {5.0}), FitError);
  }
  SUBCASE("collinear columns are named") {
    UsageTable u;
    std::vector<double> p;
    for (int i = 0; i < 6; ++i) {
      u.push_back({double(i), 2.0 * i, 0, 0});
      p.push_back(1.0 + i);
    }
    try {
      fit_cluster_power_model(u, p);
      FAIL("expected FitError");
    } catch (const FitError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("CPU") != std::string::npos);
      CHECK(msg.find("GPU") != std::string::npos);
    }
  }
  SUBCASE("recovers a known model to 1e-8") {
    UsageTable u;
    std::vector<double> p;
    for (int i = 0; i < 40; ++i) {
      const double a = (i * 37 % 101), b = (i * 53 % 29), c = (i * 11 % 17) * 100.0, d = (i * i % 13) * 50.0;
      u.push_back({a, b, c, d});
      p.push_back(7.5 + 0.02 * a + 0.25 * b + 0.0005 * c + 0.001 * d);
    }
    const auto f = fit_cluster_power_model(u, p);
    CHECK(f.rho_intercept_kw == doctest::Approx(7.5).epsilon(1e-8));
    CHECK(f.rho_coeff_kw[0] == doctest::Approx(0.02).epsilon(1e-8));
    CHECK(f.rho_coeff_kw[1] == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(f.rho_coeff_kw[2] == doctest::Approx(0.0005).epsilon(1e-8));
    CHECK(f.rho_coeff_kw[3] == doctest::Approx(0.001).epsilon(1e-8));
  }
}

TEST_CASE("memory ratios") {
  CHECK(fit_memory_ratio({{1, 0, 4, 0}, {3, 0, 12, 0}, {5, 0, 20, 0}}, Resource::cpu) == doctest::Approx(4.0));
  CHECK(fit_memory_ratio({{1, 0, 2, 0}, {2, 0, 8, 0}}, Resource::cpu) == doctest::Approx(3.0));
  CHECK(fit_memory_ratio({{0, 1, 9, 0}, {2, 0, 8, 0}}, Resource::cpu) == doctest::Approx(4.0));
  CHECK_THROWS_AS(fit_memory_ratio({{0, 1, 2, 0}, {0, 2, 8, 0}}, Resource::cpu), FitError);
}

TEST_CASE("configuration round trip") {
  const HubSpec h = toy_hub({.clusters = 3});
  const auto doc = to_json(h);
  const HubSpec back = hub_spec_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back == h);

  auto bad = doc;
  bad["data_center"]["pue"] = "high";
  try {
    hub_spec_from_json(bad);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("data_center.pue") != std::string::npos);
  }

  const auto set = dchub::testing::toy_scenarios(h, {.scenarios = 3});
  const auto sdoc = to_json(set, h.data_center);
  CHECK(scenario_set_from_json(nlohmann::json::parse(sdoc.dump()), h.data_center) == set);

  const auto caps = case_study_derating();
  CHECK(derating_from_json(to_json(caps)) == caps);
}

TEST_CASE("time series CSV") {
  std::istringstream in("timestamp,spot\n2025-07-18T00:00:00Z,0.1\n2025-07-18T01:00:00Z,0.25\n");
  const auto t = parse_csv(in, "mem");
  CHECK(t.column("spot") == 1);
  CHECK(t.number(1, 1) == 0.25);
  CHECK_THROWS_AS(t.column("nope"), InputError);

  TimeGrid g;
  g.steps_per_day = 2;
  g.start = parse_timestamp("2025-07-18T00:00:00Z");
  std::ostringstream out;
  write_series_csv(out, "spot", g, {0.1, 0.25});
  CHECK(out.str() == "timestamp,spot\n2025-07-18T00:00:00Z,0.1\n2025-07-18T01:00:00Z,0.25\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_timestamp(parse_timestamp("2025-07-18 05:00:00")) == "2025-07-18T05:00:00Z");
}
