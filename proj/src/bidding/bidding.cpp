#include "dchub/bidding/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dchub/domain/derating.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/domain/validation.hpp"
#include "dchub/solver/checker.hpp"

namespace dchub {

namespace {

double clean(double x) { return x == 0.0 ? 0.0 : x; }

bool is_indexed(std::string_view label, char prefix) {
  if (label.size() < 2 || label[0] != prefix) return false;
  return std::all_of(label.begin() + 1, label.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::size_t label_index(std::string_view label) {
  std::size_t v = 0;
  for (char c : label.substr(1)) v = v * 10 + std::size_t(c - '0');
  return v;
}

double value_of(const std::vector<double>& x, VarId v) { return x.at(v.index); }

}  // namespace

const std::vector<double>& ScenarioDispatch::at(const std::string& key) const {
  auto it = series.find(key);
  if (it == series.end()) throw InputError("dispatch has no series '" + key + "'");
  return it->second;
}

std::vector<double> extract_vcc(const std::vector<std::vector<double>>& usage,
                                const std::vector<double>& probabilities, const VccRule& rule) {
  if (usage.empty() || usage.size() != probabilities.size())
    throw InputError("VCC extraction: usage and probabilities must be non-empty and of equal length");
  const std::size_t T = usage.front().size();
  for (const auto& u : usage)
    if (u.size() != T) throw InputError("VCC extraction: ragged usage table");
  if (rule.kind == VccRule::Kind::quantile && !(rule.quantile > 0.0 && rule.quantile <= 1.0))
    throw InputError("VCC quantile must lie in (0, 1]");
  std::vector<double> out(T, 0.0);
  std::vector<std::size_t> order(usage.size());
  for (std::size_t t = 0; t < T; ++t) {
    if (rule.kind == VccRule::Kind::max) {
      double m = usage[0][t];
      for (const auto& u : usage) m = std::max(m, u[t]);
      out[t] = m;
      continue;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return usage[a][t] < usage[b][t]; });
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    double acc = 0.0;
    out[t] = usage[order.back()][t];
    for (auto w : order) {
      acc += probabilities[w] / total;
      if (acc >= rule.quantile - 1e-12) {
        out[t] = usage[w][t];
        break;
      }
    }
  }
  return out;
}

std::vector<ScenarioDispatch> split_dispatch(const PlanningModel& pm, const std::vector<double>& values) {
  std::vector<ScenarioDispatch> out(pm.W);
  std::map<std::string, std::vector<double>> shared;
  const auto& vars = pm.model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const std::string& name = vars[j].name;
    const auto open = name.find('(');
    std::string key = name.substr(0, open);
    std::optional<std::size_t> w;
    std::size_t t = 0;
    if (open != std::string::npos) {
      std::string rest;
      std::string_view labels(name);
      labels = labels.substr(open + 1, labels.size() - open - 2);
      std::size_t pos = 0;
      while (pos <= labels.size()) {
        auto comma = labels.find(',', pos);
        if (comma == std::string_view::npos) comma = labels.size();
        auto lab = labels.substr(pos, comma - pos);
        if (is_indexed(lab, 'w'))
          w = label_index(lab);
        else if (is_indexed(lab, 't'))
          t = label_index(lab);
        else
          rest += (rest.empty() ? "" : ",") + std::string(lab);
        pos = comma + 1;
      }
      if (!rest.empty()) key += "(" + rest + ")";
    }
    auto& target = w ? out.at(*w).series[key] : shared[key];
    if (target.size() <= t) target.resize(t + 1, 0.0);
    target[t] = clean(values.at(j));
  }
  for (auto& d : out)
    for (const auto& [k, v] : shared) d.series[k] = v;
  return out;
}

std::vector<CostBreakdown> cost_breakdown(const PlanningModel& pm, const std::vector<double>& x,
                                          double carbon_price) {
  std::vector<CostBreakdown> out(pm.W);
  for (std::size_t w = 0; w < pm.W; ++w) {
    const auto& c = pm.costs[w];
    auto& b = out[w];
    b.day_ahead = c.day_ahead.evaluate(x);
    b.imbalance = c.imbalance.evaluate(x);
    b.tou_energy = c.tou_energy.evaluate(x);
    b.bess = c.bess_aging.evaluate(x);
    b.heat_revenue = c.heat_revenue.evaluate(x);
    b.emissions_kg = c.emissions_grid.evaluate(x) + c.emissions_bess.evaluate(x);
    b.carbon = carbon_price * b.emissions_kg;
    b.total = c.total(carbon_price).evaluate(x);
  }
  return out;
}

AuditReport audit_solution(const PlanningModel& pm, const HubSpec& spec, const ScenarioSet& sc,
                           const std::vector<double>& x, double tol) {
  AuditReport rep;
  const auto& idx = pm.idx;
  const std::size_t W = pm.W, T = pm.T, C = pm.C;
  const double dt = pm.grid.step_hours;

  const auto check = check_solution(pm.model, x, tol);
  rep.checker_max_violation = check.max_violation;
  if (!check.ok()) rep.failures.push_back("constraint checker: " + check.summary(5));

  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t t = 0; t < T; ++t) {
      double supply = value_of(x, idx.p_dc(w, t));
      if (idx.p_orc.present()) supply -= value_of(x, idx.p_orc(w, t));
      if (idx.p_bess_ac.present()) supply += value_of(x, idx.p_bess_ac(w, t));
      if (idx.p_pv.present()) supply -= value_of(x, idx.p_pv(w, t));
      rep.balance_residual = std::max(rep.balance_residual, std::abs(value_of(x, idx.p_gcp(w, t)) - supply));

      double heat = value_of(x, idx.q_rec(w, t)) - value_of(x, idx.q_sold(w, t)) - value_of(x, idx.q_lost(w, t));
      if (idx.q_orc_in.present()) heat -= value_of(x, idx.q_orc_in(w, t));
      rep.heat_residual = std::max(rep.heat_residual, std::abs(heat));

      if (idx.p_plus.present())
        rep.exclusivity_product =
            std::max(rep.exclusivity_product, value_of(x, idx.p_plus(w, t)) * value_of(x, idx.p_minus(w, t)));
      if (idx.p_bess_c.present())
        rep.exclusivity_product =
            std::max(rep.exclusivity_product, value_of(x, idx.p_bess_c(w, t)) * value_of(x, idx.p_bess_d(w, t)));
    }
  }
  if (rep.balance_residual > tol) rep.failures.push_back("GCP balance residual " + format_number(rep.balance_residual));
  if (rep.heat_residual > tol) rep.failures.push_back("heat conservation residual " + format_number(rep.heat_residual));
  // Products of two kW quantities; scale the tolerance by the largest power bound.
  double scale = spec.ppa.p_gcp_rated_kw;
  if (spec.bess) scale = std::max(scale, spec.bess->p_rated_kw);
  if (rep.exclusivity_product > tol * std::max(1.0, scale))
    rep.failures.push_back("exclusivity product " + format_number(rep.exclusivity_product));

  for (const auto& s : pm.model.sos2_sets()) {
    std::size_t first = s.members.size(), count = 0, last = 0;
    for (std::size_t k = 0; k < s.members.size(); ++k) {
      if (std::abs(x[s.members[k].index]) <= tol) continue;
      first = std::min(first, k);
      last = k;
      ++count;
    }
    if (count > 2 || (count == 2 && last != first + 1)) ++rep.sos2_breaches;
  }
  if (rep.sos2_breaches) rep.failures.push_back(std::to_string(rep.sos2_breaches) + " SOS2 adjacency breach(es)");

  if (spec.bess && idx.e_bess.present()) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t t = 0; t <= T; ++t) {
        const double e = value_of(x, idx.e_bess(w, t));
        rep.bess_bound_excess =
            std::max({rep.bess_bound_excess, spec.bess->e_min_kwh - e, e - spec.bess->e_max_kwh});
      }
      for (std::size_t t = 0; t < T; ++t) rep.bess_mean += pm.probabilities[w] * value_of(x, idx.p_bess(w, t));
    }
    if (rep.bess_bound_excess > tol) rep.failures.push_back("BESS energy out of bounds by " + format_number(rep.bess_bound_excess));
    if (std::abs(rep.bess_mean) > tol) rep.failures.push_back("BESS expectation row " + format_number(rep.bess_mean));
  }

  // Chance-constraint quotas, recomputed from usage rather than from the
  // violation binaries.
  const auto& dc = spec.data_center;
  const auto& opt = pm.options;
  const bool pooled = opt.quotas == QuotaGranularity::pooled;
  const double inel_rhs = opt.relax.inelastic ? 1.0 : 1.0 - dc.gamma_inelastic;
  const double flex_rhs = opt.relax.flexible ? 1.0 : 1.0 - dc.gamma_flexible;
  double pooled_inel = 0.0, pooled_flex = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      double flex_mass = 0.0;
      for (std::size_t w = 0; w < W; ++w) {
        const auto& wl = sc.scenarios[w].workload.clusters[c];
        double extra = 0.0;
        for (std::size_t t = 0; t < T; ++t) extra += value_of(x, idx.u(w, t, c, k)) - wl.inelastic[k][t];
        if (extra < wl.flexible[k] / dt - tol) flex_mass += pm.probabilities[w];
      }
      pooled_flex += flex_mass / double(C * kComputeCount);
      if (!pooled && flex_mass > flex_rhs + tol)
        rep.quota_breaches.push_back(indexed_name("quota_flex", {{Axis::cluster, c}, {Axis::compute, k}}));
      for (std::size_t t = 0; t < T; ++t) {
        double mass = 0.0;
        for (std::size_t w = 0; w < W; ++w)
          if (value_of(x, idx.u(w, t, c, k)) < sc.scenarios[w].workload.clusters[c].inelastic[k][t] - tol)
            mass += pm.probabilities[w];
        pooled_inel += mass / double(T * C * kComputeCount);
        if (!pooled && mass > inel_rhs + tol)
          rep.quota_breaches.push_back(
              indexed_name("quota_inel", {{Axis::step, t}, {Axis::cluster, c}, {Axis::compute, k}}));
      }
    }
  }
  if (pooled && pooled_inel > inel_rhs + tol) rep.quota_breaches.push_back("quota_inel");
  if (pooled && pooled_flex > flex_rhs + tol) rep.quota_breaches.push_back("quota_flex");

  const auto& econ = spec.economics;
  double ren_mass = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    double nonren = 0.0, edc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double flow = value_of(x, idx.p_gcp(w, t));
      if (opt.accounting == RenewableAccounting::imports_only) flow = std::max(flow, 0.0);
      nonren += (1.0 - sc.scenarios[w].exogenous.renewable_share[t]) * flow * dt;
      edc += value_of(x, idx.p_dc(w, t)) * dt;
    }
    if (nonren - (1.0 - econ.renewable_target) * edc > tol * std::max(1.0, edc)) ren_mass += pm.probabilities[w];
  }
  const double ren_rhs = opt.relax.renewable ? 1.0 : econ.renewable_alpha;
  if (ren_mass > ren_rhs + tol) rep.quota_breaches.push_back("quota_ren");
  for (const auto& q : rep.quota_breaches) rep.failures.push_back("chance-constraint quota exceeded: " + q);
  return rep;
}

BidResult extract_bid(const PlanningModel& pm, const HubSpec& spec, const ScenarioSet& sc, const Solution& sol,
                      const VccRule& vcc) {
  if (!sol.has_values()) throw SolverFailure("no incumbent to extract a bid from (status " +
                                             std::string(to_string(sol.status)) + ")");
  const auto& x = sol.values;
  BidResult bid;
  bid.grid = pm.grid;
  bid.scheme = pm.options.scheme;
  bid.status = sol.status;
  bid.objective = sol.objective;
  bid.gap = std::isnan(sol.gap) ? 0.0 : sol.gap;
  bid.solve_time = sol.solve_time;
  bid.probabilities = pm.probabilities;

  bid.day_ahead.assign(pm.T, 0.0);
  for (std::size_t t = 0; t < pm.T; ++t) {
    if (pm.idx.p_da.present()) {
      bid.day_ahead[t] = clean(value_of(x, pm.idx.p_da(t)));
    } else {
      double e = 0.0;
      for (std::size_t w = 0; w < pm.W; ++w) e += pm.probabilities[w] * value_of(x, pm.idx.p_gcp(w, t));
      bid.day_ahead[t] = clean(e);
    }
  }

  for (const auto& cl : spec.data_center.clusters) bid.cluster_ids.push_back(cl.id);
  bid.vcc.resize(pm.C);
  std::vector<std::vector<double>> usage(pm.W, std::vector<double>(pm.T));
  for (std::size_t c = 0; c < pm.C; ++c) {
    for (std::size_t r = 0; r < kResourceCount; ++r) {
      for (std::size_t w = 0; w < pm.W; ++w)
        for (std::size_t t = 0; t < pm.T; ++t) usage[w][t] = clean(value_of(x, pm.idx.u(w, t, c, r)));
      bid.vcc[c][r] = extract_vcc(usage, pm.probabilities, vcc);
      // Solver noise must not push the curve past the installed capacity.
      for (auto& v : bid.vcc[c][r]) v = std::min(v, spec.data_center.clusters[c].capacity[r]);
    }
  }

  bid.dispatch = split_dispatch(pm, x);
  bid.breakdown = cost_breakdown(pm, x, spec.economics.carbon_price);
  std::vector<double> totals;
  for (std::size_t w = 0; w < pm.W; ++w) {
    bid.expected_cost += pm.probabilities[w] * bid.breakdown[w].total;
    bid.expected_emissions += pm.probabilities[w] * bid.breakdown[w].emissions_kg;
    totals.push_back(bid.breakdown[w].total);
  }
  bid.cvar = discrete_cvar(totals, pm.probabilities, spec.economics.cvar_alpha);
  bid.audit = audit_solution(pm, spec, sc, x);
  return bid;
}

namespace {

bool feasible_with(const HubSpec& spec, const ScenarioSet& sc, const DeratingProfile& caps, PlanOptions o,
                   CcRelaxation relax) {
  o.model.relax = relax;
  o.solve.mip_gap = 1.0;  // any incumbent settles the question
  const auto pm = build_planning_model(spec, sc, caps, o.model);
  const auto sol = solve(pm.model, o.solve, o.backend);
  return sol.has_values() || sol.status == SolveStatus::unbounded;
}

}  // namespace

std::string infeasibility_hint(const HubSpec& spec, const ScenarioSet& sc, const DeratingProfile& caps,
                               const PlanOptions& options) {
  const CcRelaxation base = options.model.relax;
  struct Probe {
    const char* text;
    CcRelaxation relax;
  };
  const Probe probes[] = {
      {"relaxing the renewable-share chance constraint restores feasibility", {true, base.flexible, base.inelastic}},
      {"relaxing the flexible-workload chance constraint restores feasibility", {base.renewable, true, base.inelastic}},
      {"relaxing the inelastic-workload chance constraint restores feasibility", {base.renewable, base.flexible, true}},
      {"relaxing all chance constraints together restores feasibility", {true, true, true}},
  };
  for (const auto& p : probes) {
    if (p.relax.renewable == base.renewable && p.relax.flexible == base.flexible && p.relax.inelastic == base.inelastic)
      continue;
    if (feasible_with(spec, sc, caps, options, p.relax)) return p.text;
  }
  return "no chance-constraint relaxation restores feasibility; check the de-rating caps against the inelastic load";
}

BidResult plan_day(const HubSpec& spec, const ScenarioSet& sc, const DeratingProfile& caps,
                   const PlanOptions& options) {
  if (auto r = validate_hub_spec(spec); !r.ok()) throw InputError("invalid hub specification:\n" + r.to_string());
  if (auto r = validate_scenario_set(sc, spec); !r.ok()) throw InputError("invalid scenario set:\n" + r.to_string());
  if (caps.cap_kw.size() != sc.grid.steps_per_day)
    throw InputError("de-rating profile has " + std::to_string(caps.cap_kw.size()) + " steps, the day has " +
                     std::to_string(sc.grid.steps_per_day));
  if (!validate_derating(caps, spec.ppa, sc.grid).pass())
    throw InputError("de-rating profile violates the PPA limits");

  const auto pm = build_planning_model(spec, sc, caps, options.model);
  const auto sol = solve(pm.model, options.solve, options.backend);
  switch (sol.status) {
    case SolveStatus::infeasible:
      throw InfeasibleError("planning model is infeasible",
                            options.triage ? infeasibility_hint(spec, sc, caps, options) : std::string{});
    case SolveStatus::unbounded:
      throw SolverFailure("planning model is unbounded");
    default:
      break;
  }
  if (!sol.has_values())
    throw SolverFailure("solver returned no incumbent (status " + std::string(to_string(sol.status)) + ")");
  return extract_bid(pm, spec, sc, sol, options.vcc);
}

nlohmann::json to_json(const BidResult& bid, bool with_dispatch) {
  using nlohmann::json;
  json j;
  j["schema_version"] = 1;
  j["scheme"] = bid.scheme == SupplyScheme::tou ? "tou" : "custom_ppa";
  j["status"] = std::string(to_string(bid.status));
  j["objective_eur"] = clean(bid.objective);
  j["gap"] = clean(bid.gap);
  j["grid"] = {{"step_hours", bid.grid.step_hours},
               {"steps_per_day", bid.grid.steps_per_day},
               {"start", format_timestamp(bid.grid.start)}};
  j["day_ahead_kw"] = bid.day_ahead;
  json vcc = json::object();
  for (std::size_t c = 0; c < bid.vcc.size(); ++c) {
    json cl = json::object();
    for (std::size_t r = 0; r < kResourceCount; ++r) cl[std::string(to_string(kAllResources[r]))] = bid.vcc[c][r];
    vcc[bid.cluster_ids.at(c)] = cl;
  }
  j["vcc"] = vcc;
  j["expected_cost_eur"] = clean(bid.expected_cost);
  j["cvar_eur"] = clean(bid.cvar);
  j["expected_emissions_kg"] = clean(bid.expected_emissions);
  json scen = json::array();
  for (std::size_t w = 0; w < bid.breakdown.size(); ++w) {
    const auto& b = bid.breakdown[w];
    json s = {{"probability", bid.probabilities[w]},
              {"cost_eur",
               {{"day_ahead", clean(b.day_ahead)},
                {"imbalance", clean(b.imbalance)},
                {"tou_energy", clean(b.tou_energy)},
                {"bess", clean(b.bess)},
                {"heat_revenue", clean(b.heat_revenue)},
                {"carbon", clean(b.carbon)},
                {"total", clean(b.total)}}},
              {"emissions_kg", clean(b.emissions_kg)}};
    if (with_dispatch) s["dispatch"] = bid.dispatch[w].series;
    scen.push_back(std::move(s));
  }
  j["scenarios"] = scen;
  j["audit"] = {{"ok", bid.audit.ok()}, {"failures", bid.audit.failures}};
  return j;
}

void write_bid_csv(std::ostream& out, const BidResult& bid) {
  out << "step,day_ahead_kw\n";
  for (std::size_t t = 0; t < bid.day_ahead.size(); ++t) out << t << ',' << format_number(bid.day_ahead[t]) << '\n';
}

void write_vcc_csv(std::ostream& out, const BidResult& bid, std::size_t cluster) {
  const auto& v = bid.vcc.at(cluster);
  out << "step";
  for (auto r : kAllResources) out << ',' << to_string(r);
  out << '\n';
  for (std::size_t t = 0; t < v[0].size(); ++t) {
    out << t;
    for (std::size_t r = 0; r < kResourceCount; ++r) out << ',' << format_number(v[r][t]);
    out << '\n';
  }
}

}  // namespace dchub
