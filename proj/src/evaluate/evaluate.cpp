#include "dchub/evaluate/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/domain/validation.hpp"
#include "dchub/scenario/redistribute.hpp"

namespace dchub {

namespace {

double clean(double x) { return x == 0.0 ? 0.0 : x; }

ScenarioSet single_scenario(const TimeGrid& grid, const RealizedDay& r) {
  ScenarioSet s;
  s.grid = grid;
  s.scenarios.push_back(Scenario{r.exogenous, r.workload, 1.0});
  return s;
}

std::string scheme_label(SupplyScheme s) { return s == SupplyScheme::tou ? "ToU" : "Custom"; }

}  // namespace

DayOutcome expost_reoptimize(const HubSpec& spec, const BidResult& bid, const RealizedDay& realized,
                             const DeratingProfile& caps, const ExpostOptions& options) {
  if (bid.day_ahead.size() != bid.grid.steps_per_day)
    throw InputError("bid has " + std::to_string(bid.day_ahead.size()) + " steps, grid " +
                     std::to_string(bid.grid.steps_per_day));
  const auto set = single_scenario(bid.grid, realized);
  if (auto r = validate_scenario_set(set, spec); !r.ok())
    throw InputError("realized day " + realized.date + " is invalid:\n" + r.to_string());
  if (caps.cap_kw.size() != bid.grid.steps_per_day)
    throw InputError("de-rating profile has " + std::to_string(caps.cap_kw.size()) + " steps, the day has " +
                     std::to_string(bid.grid.steps_per_day));

  ModelOptions mo = options.model;
  mo.scheme = bid.scheme;
  if (bid.scheme == SupplyScheme::custom_ppa) mo.fixed_day_ahead = bid.day_ahead;

  auto attempt = [&](const ModelOptions& m, const DeratingProfile& c) {
    auto pm = build_planning_model(spec, set, c, m);
    auto sol = solve(pm.model, options.solve, options.backend);
    return std::make_pair(std::move(pm), std::move(sol));
  };

  auto [pm, sol] = attempt(mo, caps);
  if (sol.status == SolveStatus::infeasible) {
    struct Probe {
      const char* family;
      ModelOptions m;
      DeratingProfile caps;
    };
    std::vector<Probe> probes;
    auto with = [&](auto edit) {
      ModelOptions m = mo;
      edit(m);
      return m;
    };
    probes.push_back({"renewable-share chance constraint", with([](auto& m) { m.relax.renewable = true; }), caps});
    probes.push_back({"flexible-workload chance constraint", with([](auto& m) { m.relax.flexible = true; }), caps});
    probes.push_back({"inelastic-workload chance constraint", with([](auto& m) { m.relax.inelastic = true; }), caps});
    probes.push_back(
        {"de-rating caps", mo, DeratingProfile::flat(spec.ppa.p_gcp_rated_kw, bid.grid.steps_per_day)});
    probes.push_back({"frozen day-ahead bid", with([](auto& m) { m.fixed_day_ahead.reset(); }), caps});
    std::string hint = "no single relaxation restores feasibility";
    for (auto& p : probes) {
      if (attempt(p.m, p.caps).second.has_values()) {
        hint = std::string("binding family: ") + p.family;
        break;
      }
    }
    throw InfeasibleError("ex-post problem for " + realized.date + " is infeasible under the frozen bid", hint);
  }
  if (!sol.has_values())
    throw SolverFailure("ex-post solve for " + realized.date + " returned no incumbent (status " +
                        std::string(to_string(sol.status)) + ")");

  const auto& x = sol.values;
  DayOutcome out;
  out.date = realized.date;
  out.scheme = scheme_label(bid.scheme);
  out.status = sol.status;
  out.breakdown = cost_breakdown(pm, x, spec.economics.carbon_price).front();
  out.cost = out.breakdown.total;
  out.emissions = out.breakdown.emissions_kg;
  const double edc = x.at(pm.idx.e_dc(0).index);
  double nonren = 0.0;
  const double dt = bid.grid.step_hours;
  for (std::size_t t = 0; t < pm.T; ++t) {
    double flow = x.at(pm.idx.p_gcp(0, t).index);
    if (mo.accounting == RenewableAccounting::imports_only) flow = std::max(flow, 0.0);
    nonren += (1.0 - realized.exogenous.renewable_share[t]) * flow * dt;
    if (pm.idx.p_plus.present())
      out.imbalance_energy += (x.at(pm.idx.p_plus(0, t).index) + x.at(pm.idx.p_minus(0, t).index)) * dt;
  }
  out.renewable_share = edc > 0.0 ? 1.0 - nonren / edc : 1.0;
  out.ex_ante_cost = bid.expected_cost;
  out.ex_ante_emissions = bid.expected_emissions;
  out.dispatch = split_dispatch(pm, x).front();
  return out;
}

Summary summarize_values(std::vector<double> v) {
  if (v.empty()) throw InputError("cannot summarize an empty sample");
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = (double(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
  };
  Summary s;
  s.q25 = q(0.25);
  s.q75 = q(0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sigma = std::sqrt(ss / double(v.size()));
  return s;
}

EvaluationReport summarize(const std::vector<DayOutcome>& outcomes, const std::string& scheme) {
  if (outcomes.empty()) throw InputError("cannot summarize zero outcomes");
  EvaluationReport r;
  r.scheme = scheme.empty() ? outcomes.front().scheme : scheme;
  r.days = outcomes;
  auto col = [&](auto field) {
    std::vector<double> v;
    for (const auto& o : outcomes) v.push_back(field(o));
    return summarize_values(std::move(v));
  };
  r.summary["ex_post_cost"] = col([](const DayOutcome& o) { return o.cost; });
  r.summary["ex_ante_cost"] = col([](const DayOutcome& o) { return o.ex_ante_cost; });
  r.summary["ex_post_emissions"] = col([](const DayOutcome& o) { return o.emissions; });
  r.summary["ex_ante_emissions"] = col([](const DayOutcome& o) { return o.ex_ante_emissions; });
  r.summary["renewable_share"] = col([](const DayOutcome& o) { return o.renewable_share; });
  r.summary["imbalance_energy"] = col([](const DayOutcome& o) { return o.imbalance_energy; });
  return r;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const unsigned k = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> errors(n);
  if (k == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < k; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SchemeComparison compare_schemes(const HubSpec& spec, const std::vector<StudyDay>& days,
                                 const CompareOptions& options) {
  if (days.empty()) throw InputError("no study days");
  if (options.include_tou && !spec.economics.tou_tariff)
    throw InputError("ToU comparison requires economics.tou_tariff");

  struct Variant {
    std::string label;
    SupplyScheme scheme;
    bool no_flex;
  };
  std::vector<Variant> variants;
  if (options.include_tou) variants.push_back({"ToU", SupplyScheme::tou, false});
  variants.push_back({"Custom", SupplyScheme::custom_ppa, false});
  if (options.include_no_flex) variants.push_back({"Custom no WL flex", SupplyScheme::custom_ppa, true});

  std::vector<std::vector<DayOutcome>> out(variants.size(), std::vector<DayOutcome>(days.size()));
  parallel_for(days.size(), options.workers, [&](std::size_t d) {
    const auto& day = days[d];
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto& var = variants[v];
      PlanOptions po = options.plan;
      po.model.scheme = var.scheme;
      ScenarioSet scen = day.scenarios;
      RealizedDay real = day.realized;
      if (var.no_flex) {
        scen = redistribute_flexible_uniform(scen, spec.data_center);
        real.workload = redistribute_flexible_uniform(real.workload, spec.data_center, scen.grid);
      }
      const auto bid = plan_day(spec, scen, day.caps, po);
      ExpostOptions eo{po.solve, po.backend, po.model};
      auto o = expost_reoptimize(spec, bid, real, day.caps, eo);
      o.date = day.date;
      o.scheme = var.label;
      out[v][d] = std::move(o);
    }
  });

  SchemeComparison cmp;
  for (std::size_t v = 0; v < variants.size(); ++v) cmp.reports.push_back(summarize(out[v], variants[v].label));
  auto mean = [&](const std::string& label, const char* metric) {
    for (const auto& r : cmp.reports)
      if (r.scheme == label) return r.summary.at(metric).mean;
    return std::nan("");
  };
  if (options.include_tou) {
    cmp.delta_cost_pct = 100.0 * (mean("Custom", "ex_post_cost") - mean("ToU", "ex_post_cost")) /
                         std::abs(mean("ToU", "ex_post_cost"));
    cmp.delta_emissions_pct = 100.0 *
                              (mean("Custom", "ex_post_emissions") - mean("ToU", "ex_post_emissions")) /
                              std::abs(mean("ToU", "ex_post_emissions"));
  }
  if (options.include_no_flex)
    cmp.flex_value_eur = mean("Custom no WL flex", "ex_post_cost") - mean("Custom", "ex_post_cost");
  return cmp;
}

void write_outcomes_csv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
  out << "date,scheme,cost_eur,emissions_kg,imbalance_kwh,renshare\n";
  for (const auto& r : reports)
    for (const auto& d : r.days)
      out << d.date << ',' << r.scheme << ',' << format_number(clean(d.cost)) << ','
          << format_number(clean(d.emissions)) << ',' << format_number(clean(d.imbalance_energy)) << ','
          << format_number(clean(d.renewable_share)) << '\n';
}

nlohmann::json to_json(const EvaluationReport& r) {
  using nlohmann::json;
  json days = json::array();
  for (const auto& d : r.days) {
    days.push_back({{"date", d.date},
                    {"status", std::string(to_string(d.status))},
                    {"cost_eur", clean(d.cost)},
                    {"emissions_kg", clean(d.emissions)},
                    {"renewable_share", clean(d.renewable_share)},
                    {"imbalance_kwh", clean(d.imbalance_energy)},
                    {"ex_ante_cost_eur", clean(d.ex_ante_cost)},
                    {"ex_ante_emissions_kg", clean(d.ex_ante_emissions)},
                    {"cost_breakdown_eur",
                     {{"day_ahead", clean(d.breakdown.day_ahead)},
                      {"imbalance", clean(d.breakdown.imbalance)},
                      {"tou_energy", clean(d.breakdown.tou_energy)},
                      {"bess", clean(d.breakdown.bess)},
                      {"heat_revenue", clean(d.breakdown.heat_revenue)},
                      {"carbon", clean(d.breakdown.carbon)}}}});
  }
  json summary = json::object();
  for (const auto& [k, s] : r.summary)
    summary[k] = {{"q25", clean(s.q25)}, {"mean", clean(s.mean)}, {"q75", clean(s.q75)}, {"sigma", clean(s.sigma)}};
  return {{"scheme", r.scheme}, {"days", days}, {"summary", summary}};
}

nlohmann::json to_json(const SchemeComparison& cmp) {
  using nlohmann::json;
  json reports = json::array();
  for (const auto& r : cmp.reports) reports.push_back(to_json(r));
  return {{"schema_version", 1},
          {"reports", reports},
          {"deltas",
           {{"custom_vs_tou_cost_pct", clean(cmp.delta_cost_pct)},
            {"custom_vs_tou_emissions_pct", clean(cmp.delta_emissions_pct)},
            {"flex_value_eur", clean(cmp.flex_value_eur)}}}};
}

}  // namespace dchub
