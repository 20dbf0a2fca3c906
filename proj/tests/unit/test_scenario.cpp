#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dchub/domain/errors.hpp"
#include "dchub/scenario/bootstrap.hpp"
#include "dchub/scenario/combine.hpp"
#include "dchub/scenario/imbalance.hpp"
#include "dchub/scenario/kmeans.hpp"
#include "dchub/scenario/redistribute.hpp"
#include "toy_hub.hpp"

using namespace dchub;

TEST_CASE("bootstrap") {
  const std::vector<double> forecast{1.0, 2.0, 3.0};
  SUBCASE("zero residuals reproduce the forecast") {
    const auto out = bootstrap_scenarios(forecast, ResidualHistory{{{0, 0, 0}}}, 5, 7);
    REQUIRE(out.size() == 5);
    for (const auto& s : out) CHECK(s == forecast);
  }
  SUBCASE("draws are whole residual rows") {
    const std::vector<double> r1{1, -1, 2}, r2{-3, 0.5, 4};
    const auto out = bootstrap_scenarios({0, 0, 0}, ResidualHistory{{r1, r2}}, 2, 11);
    for (const auto& s : out) CHECK((s == r1 || s == r2));
  }
  SUBCASE("unit-interval series are clamped") {
    const auto out =
        bootstrap_scenarios({0.95, 0.5}, ResidualHistory{{{0.10, -0.6}}}, 1, 3, SeriesDomain::unit_interval);
    CHECK(out[0][0] == 1.0);
    CHECK(out[0][1] == 0.0);
  }
  SUBCASE("deterministic under a fixed seed") {
    ResidualHistory h{{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}};
    CHECK(bootstrap_scenarios(forecast, h, 20, 5) == bootstrap_scenarios(forecast, h, 20, 5));
    CHECK(bootstrap_scenarios(forecast, h, 20, 5) != bootstrap_scenarios(forecast, h, 20, 6));
  }
  SUBCASE("empty history") {
    CHECK_THROWS_AS(bootstrap_scenarios(forecast, ResidualHistory{}, 2, 1), InputError);
  }
  SUBCASE("row identities follow the uniform distribution") {
    ResidualHistory h;
    for (int r = 0; r < 4; ++r) h.residuals.push_back({double(r)});
    const std::size_t n = 8000;
    const auto out = bootstrap_scenarios({0.0}, h, n, 2024);
    std::array<double, 4> count{};
    for (const auto& s : out) count[std::size_t(s[0])] += 1;
    double chi2 = 0.0;
    for (double c : count) chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    CHECK(chi2 < 16.27);  // df = 3, p = 0.001
  }
}

TEST_CASE("imbalance factor calibration") {
  SUBCASE("hand quantile over five points") {
    const std::vector<double> spot(10, 1.0);
    std::vector<double> shrt{1, 2, 3, 4, 5, 1, 2, 3, 4, 5};
    const auto f = calibrate_imbalance_factors(spot, shrt, shrt, 0.4);
    CHECK(f.k_short == 3.0);
    CHECK(underestimation_fraction(spot, shrt, f.k_short) == doctest::Approx(0.4));
  }
  SUBCASE("constant ratio") {
    std::vector<double> spot, shrt, lng;
    for (int i = 0; i < 12; ++i) {
      spot.push_back(0.05 + 0.01 * i);
      shrt.push_back(2.0 * spot.back());
      lng.push_back(0.5 * spot.back());
    }
    const auto f = calibrate_imbalance_factors(spot, shrt, lng, 0.4);
    CHECK(f.k_short == doctest::Approx(2.0));
    CHECK(f.k_long == doctest::Approx(0.5));
  }
  SUBCASE("extreme target gives the minimum ratio") {
    const std::vector<double> spot(10, 2.0);
    const std::vector<double> shrt{2, 4, 6, 8, 10, 2, 4, 6, 8, 10};
    CHECK(calibrate_imbalance_factors(spot, shrt, shrt, 0.999).k_short == doctest::Approx(1.0));
  }
  SUBCASE("non-positive spot rows are excluded") {
    std::vector<double> spot(10, 1.0), shrt(10, 3.0);
    spot[0] = 0.0;
    shrt[0] = 1e6;
    CHECK(calibrate_imbalance_factors(spot, shrt, shrt, 0.4).k_short == doctest::Approx(3.0));
    std::vector<double> neg(10, -1.0);
    CHECK_THROWS_AS(calibrate_imbalance_factors(neg, shrt, shrt, 0.4), InputError);
  }
  SUBCASE("needs ten rows and a target in (0,1)") {
    std::vector<double> s(5, 1.0);
    CHECK_THROWS_AS(calibrate_imbalance_factors(s, s, s, 0.4), InputError);
    std::vector<double> t(10, 1.0);
    CHECK_THROWS_AS(calibrate_imbalance_factors(t, t, t, 1.0), InputError);
  }
}

TEST_CASE("scenario combination") {
  SUBCASE("singleton product") {
    std::vector<ParameterGroup> g{{"a", {{1, 2}}}, {"b", {{3}}}};
    const auto set = combine_scenarios(g, 10, 1);
    REQUIRE(set.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(set.vector(i) == std::vector<double>{1, 2, 3});
    CHECK(count_distinct(set) == 1);
  }
  SUBCASE("all index pairs of a 2x2 product appear") {
    std::vector<ParameterGroup> g{{"a", {{0}, {1}}}, {"b", {{0}, {1}}}};
    const auto set = combine_scenarios(g, 200, 9);
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < set.size(); ++i) seen.insert({int(set.pick(i, 0)), int(set.pick(i, 1))});
    CHECK(seen.size() == 4);
  }
  SUBCASE("concatenation follows group order") {
    std::vector<ParameterGroup> g{{"spot", {{1, 1}, {2, 2}}}, {"ren", {{7}, {8}}}};
    const auto set = combine_scenarios(g, 5, 3);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto v = set.vector(i);
      CHECK(v[0] == 1.0 + set.pick(i, 0));
      CHECK(v[2] == 7.0 + set.pick(i, 1));
    }
  }
}

TEST_CASE("k-means reduction") {
  SUBCASE("saturated clustering") {
    std::vector<std::vector<double>> pts{{0, 0}, {1, 5}, {3, 2}, {9, 9}};
    const auto r = reduce_kmeans(pts, 4, 1);
    std::vector<std::size_t> reps = r.representatives;
    std::sort(reps.begin(), reps.end());
    CHECK(reps == std::vector<std::size_t>{0, 1, 2, 3});
    for (double p : r.probabilities) CHECK(p == doctest::Approx(0.25));
  }
  SUBCASE("two separated clouds split 70/30") {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 70; ++i) pts.push_back({0.01 * (i % 7), 0.02 * (i % 5)});
    for (int i = 0; i < 30; ++i) pts.push_back({50 + 0.01 * (i % 3), 40 + 0.03 * (i % 4)});
    const auto r = reduce_kmeans(pts, 2, 42);
    REQUIRE(r.probabilities.size() == 2);
    std::vector<double> probs = r.probabilities;
    std::sort(probs.begin(), probs.end());
    CHECK(probs[0] == doctest::Approx(0.3));
    CHECK(probs[1] == doctest::Approx(0.7));
    for (std::size_t c = 0; c < 2; ++c) {
      const auto rep = r.representatives[c];
      const bool first_cloud = rep < 70;
      CHECK(r.probabilities[c] == doctest::Approx(first_cloud ? 0.7 : 0.3));
    }
  }
  SUBCASE("more clusters than distinct points") {
    std::vector<std::vector<double>> pts{{1}, {1}, {2}};
    CHECK_THROWS_AS(reduce_kmeans(pts, 3, 1), InputError);
  }
  SUBCASE("probabilities sum to one and representatives are members") {
    std::vector<ParameterGroup> g;
    for (int k = 0; k < 3; ++k) {
      ParameterGroup pg{"g" + std::to_string(k), {}};
      for (int s = 0; s < 6; ++s) pg.scenarios.push_back({double(s * (k + 1)), std::sin(s + k)});
      g.push_back(pg);
    }
    const auto set = combine_scenarios(g, 3000, 17);
    const auto r = reduce_kmeans(set, 12, 5);
    CHECK(std::accumulate(r.probabilities.begin(), r.probabilities.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t c = 0; c < r.representatives.size(); ++c) {
      CHECK(r.probabilities[c] >= 0.0);
      CHECK(r.assignment[r.representatives[c]] == c);
    }
    // Same seed, different thread counts: identical result.
    KMeansOptions one;
    one.threads = 1;
    KMeansOptions four;
    four.threads = 4;
    const auto a = reduce_kmeans(set, 12, 5, one), b = reduce_kmeans(set, 12, 5, four);
    CHECK(a.representatives == b.representatives);
    CHECK(a.probabilities == b.probabilities);
  }
}

TEST_CASE("uniform redistribution of flexible demand") {
  DataCenterSpec dc;
  ClusterSpec cl;
  cl.id = "c";
  cl.capacity = {10, 10, 100, 100};
  dc.clusters.push_back(cl);
  TimeGrid g;
  WorkloadScenario w;
  w.clusters.resize(1);
  w.clusters[0].inelastic = {std::vector<double>(24, 2.0), std::vector<double>(24, 0.0)};

  SUBCASE("24 resource-hours add one unit per step") {
    w.clusters[0].flexible = {24.0, 0.0};
    const auto r = redistribute_flexible_uniform(w, dc, g);
    for (double v : r.clusters[0].inelastic[0]) CHECK(v == doctest::Approx(3.0));
    CHECK(r.clusters[0].flexible[0] == 0.0);
  }
  SUBCASE("zero flexible demand is the identity") {
    const auto r = redistribute_flexible_uniform(w, dc, g);
    CHECK(r == w);
  }
  SUBCASE("capped steps spill to the others") {
    for (std::size_t t = 0; t < 12; ++t) w.clusters[0].inelastic[0][t] = 10.0;
    w.clusters[0].flexible = {12.0, 0.0};
    const auto r = redistribute_flexible_uniform(w, dc, g);
    for (std::size_t t = 0; t < 12; ++t) CHECK(r.clusters[0].inelastic[0][t] == 10.0);
    for (std::size_t t = 12; t < 24; ++t) CHECK(r.clusters[0].inelastic[0][t] == doctest::Approx(3.0));
  }
  SUBCASE("totals preserved exactly on a half-hour grid") {
    TimeGrid half;
    half.step_hours = 0.5;
    half.steps_per_day = 48;
    WorkloadScenario h;
    h.clusters.resize(1);
    h.clusters[0].inelastic = {std::vector<double>(48, 1.0), std::vector<double>(48, 4.0)};
    for (std::size_t t = 0; t < 48; t += 5) h.clusters[0].inelastic[0][t] = 9.5;
    h.clusters[0].flexible = {37.3, 11.1};
    const auto r = redistribute_flexible_uniform(h, dc, half);
    for (std::size_t k = 0; k < 2; ++k) {
      double before = h.clusters[0].flexible[k], after = 0.0;
      for (std::size_t t = 0; t < 48; ++t) {
        before += h.clusters[0].inelastic[k][t] * 0.5;
        after += r.clusters[0].inelastic[k][t] * 0.5;
        CHECK(r.clusters[0].inelastic[k][t] <= 10.0);
      }
      CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }
  }
  SUBCASE("demand above daily capacity") {
    w.clusters[0].flexible = {24.0 * 9.0, 0.0};
    CHECK_THROWS_AS(redistribute_flexible_uniform(w, dc, g), InfeasibleError);
  }
}
