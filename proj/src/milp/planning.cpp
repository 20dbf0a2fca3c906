#include "dchub/milp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dchub/domain/errors.hpp"

namespace dchub {

namespace {

const char* resource_tag(std::size_t r) {
  static const char* tags[] = {"CPU", "GPU", "MEMCPU", "MEMGPU"};
  return tags[r];
}

void require(bool ok, const std::string& what) {
  if (!ok) throw BuildError(what);
}

void require_series(const std::vector<double>& s, std::size_t T, const std::string& what) {
  require(s.size() == T, what + " has " + std::to_string(s.size()) + " steps, expected " + std::to_string(T));
}

using A = Axis;

}  // namespace

std::string axis_label(Axis axis, std::size_t i) {
  char buf[32];
  switch (axis) {
    case Axis::scenario:
      std::snprintf(buf, sizeof buf, "w%03zu", i);
      break;
    case Axis::step:
    case Axis::edge:
      std::snprintf(buf, sizeof buf, "t%02zu", i);
      break;
    case Axis::cluster:
      std::snprintf(buf, sizeof buf, "c%02zu", i);
      break;
    case Axis::resource:
    case Axis::compute:
      return resource_tag(i);
    case Axis::sample:
      std::snprintf(buf, sizeof buf, "i%02zu", i);
      break;
    case Axis::segment:
      std::snprintf(buf, sizeof buf, "j%02zu", i);
      break;
  }
  return buf;
}

std::string indexed_name(const std::string& family, std::initializer_list<std::pair<Axis, std::size_t>> idx) {
  if (idx.size() == 0) return family;
  std::string out = family + "(";
  bool first = true;
  for (const auto& [axis, i] : idx) {
    if (!first) out += ',';
    out += axis_label(axis, i);
    first = false;
  }
  return out + ")";
}

LinearExpr ScenarioCostParts::total(double carbon_price) const {
  LinearExpr e;
  e.add(day_ahead).add(imbalance).add(tou_energy).add(bess_aging).add(heat_revenue, -1.0);
  e.add(emissions_grid, carbon_price).add(emissions_bess, carbon_price);
  return e;
}

Family PlanningModel::add_family(const std::string& name, std::vector<Axis> axes,
                                 std::vector<std::size_t> dims, VarKind kind, double lower, double upper) {
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  std::vector<VarId> ids;
  ids.reserve(total);
  std::vector<std::size_t> ix(dims.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::string label = name;
    if (!dims.empty()) {
      label += '(';
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (k) label += ',';
        label += axis_label(axes[k], ix[k]);
      }
      label += ')';
    }
    ids.push_back(model.add_variable(std::move(label), kind, lower, upper));
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++ix[k] < dims[k]) break;
      ix[k] = 0;
    }
  }
  return Family(std::move(axes), std::move(dims), std::move(ids));
}

PlanningModel begin_planning_model(const ScenarioSet& scenarios, std::size_t clusters,
                                   const ModelOptions& options) {
  PlanningModel pm;
  pm.grid = scenarios.grid;
  pm.W = scenarios.size();
  pm.T = scenarios.grid.steps_per_day;
  pm.C = clusters;
  pm.options = options;
  require(pm.W > 0, "scenario set is empty");
  require(pm.T > 0, "time grid has no steps");
  for (const auto& s : scenarios.scenarios) pm.probabilities.push_back(s.probability);
  pm.costs.resize(pm.W);
  return pm;
}

void add_workload_block(PlanningModel& pm, const DataCenterSpec& dc, const ScenarioSet& sc) {
  const std::size_t W = pm.W, T = pm.T, C = pm.C;
  require(dc.clusters.size() == C, "hub has " + std::to_string(dc.clusters.size()) + " clusters, model " +
                                       std::to_string(C));
  const double dt = pm.grid.step_hours;
  for (std::size_t w = 0; w < W; ++w) {
    require(sc.scenarios[w].workload.clusters.size() == C, "scenario " + std::to_string(w) + ": cluster count mismatch");
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        require_series(sc.scenarios[w].workload.clusters[c].inelastic[k], T,
                       "scenario " + std::to_string(w) + " inelastic workload");
      }
    }
  }
  auto& idx = pm.idx;
  idx.u = pm.add_family("u", {A::scenario, A::step, A::cluster, A::resource}, {W, T, C, kResourceCount},
                        VarKind::continuous, 0.0, kInf);
  idx.v_inelastic = pm.add_family("v_inel", {A::scenario, A::step, A::cluster, A::compute},
                                  {W, T, C, kComputeCount}, VarKind::binary, 0.0, 1.0);
  idx.v_flexible = pm.add_family("v_flex", {A::scenario, A::cluster, A::compute}, {W, C, kComputeCount},
                                 VarKind::binary, 0.0, 1.0);
  auto& m = pm.model;
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t c = 0; c < C; ++c) {
      const auto& cl = dc.clusters[c];
      const auto& wl = sc.scenarios[w].workload.clusters[c];
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        const double kappa = cl.capacity[k];
        double inel_sum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          const double I = wl.inelastic[k][t];
          inel_sum += I;
          // u >= I - kappa * v
          m.add_constraint(indexed_name("cc_inel", {{A::scenario, w}, {A::step, t}, {A::cluster, c}, {A::compute, k}}),
                           LinearExpr().add(idx.u(w, t, c, k), 1.0).add(idx.v_inelastic(w, t, c, k), kappa),
                           RowSense::ge, I);
        }
        const double F = wl.flexible[k] / dt;
        LinearExpr sum_u;
        for (std::size_t t = 0; t < T; ++t) sum_u.add(idx.u(w, t, c, k), 1.0);
        // sum_t (u - I) >= F/dT - M_F v, M_F = F/dT
        m.add_constraint(indexed_name("cc_flex", {{A::scenario, w}, {A::cluster, c}, {A::compute, k}}),
                         LinearExpr(sum_u).add(idx.v_flexible(w, c, k), F), RowSense::ge, F + inel_sum);
        m.add_constraint(indexed_name("overprov", {{A::scenario, w}, {A::cluster, c}, {A::compute, k}}), sum_u,
                         RowSense::le, F + inel_sum);
      }
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < kComputeCount; ++k) {
          const std::size_t mem = index_of(memory_of(kComputeResources[k]));
          m.add_constraint(indexed_name("mem", {{A::scenario, w}, {A::step, t}, {A::cluster, c}, {A::resource, mem}}),
                           LinearExpr().add(idx.u(w, t, c, mem), 1.0).add(idx.u(w, t, c, k), -cl.mem_ratio[k]),
                           RowSense::eq, 0.0);
        }
        for (std::size_t r = 0; r < kResourceCount; ++r) {
          m.add_constraint(indexed_name("cap_u", {{A::scenario, w}, {A::step, t}, {A::cluster, c}, {A::resource, r}}),
                           LinearExpr().add(idx.u(w, t, c, r), 1.0), RowSense::le, cl.capacity[r]);
        }
      }
    }
  }
  // Probability quotas.
  const double inel_rhs = pm.options.relax.inelastic ? 1.0 : 1.0 - dc.gamma_inelastic;
  const double flex_rhs = pm.options.relax.flexible ? 1.0 : 1.0 - dc.gamma_flexible;
  if (pm.options.quotas == QuotaGranularity::per_index) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < kComputeCount; ++k) {
          LinearExpr q;
          for (std::size_t w = 0; w < W; ++w) q.add(idx.v_inelastic(w, t, c, k), pm.probabilities[w]);
          m.add_constraint(indexed_name("quota_inel", {{A::step, t}, {A::cluster, c}, {A::compute, k}}), q,
                           RowSense::le, inel_rhs);
        }
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        LinearExpr q;
        for (std::size_t w = 0; w < W; ++w) q.add(idx.v_flexible(w, c, k), pm.probabilities[w]);
        m.add_constraint(indexed_name("quota_flex", {{A::cluster, c}, {A::compute, k}}), q, RowSense::le, flex_rhs);
      }
    }
  } else {
    // Pooled: the probability-weighted violation count averaged over indices.
    LinearExpr qi, qf;
    const double ni = double(T * C * kComputeCount), nf = double(C * kComputeCount);
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < kComputeCount; ++k) {
          for (std::size_t t = 0; t < T; ++t) qi.add(idx.v_inelastic(w, t, c, k), pm.probabilities[w] / ni);
          qf.add(idx.v_flexible(w, c, k), pm.probabilities[w] / nf);
        }
      }
    }
    m.add_constraint("quota_inel", qi, RowSense::le, inel_rhs);
    m.add_constraint("quota_flex", qf, RowSense::le, flex_rhs);
  }
}

void add_power_heat_block(PlanningModel& pm, const DataCenterSpec& dc, bool with_orc) {
  require(pm.idx.u.present(), "power block needs the workload block");
  const std::size_t W = pm.W, T = pm.T, C = pm.C;
  auto& idx = pm.idx;
  idx.p_dc = pm.add_family("p_dc", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  idx.q_rec = pm.add_family("q_rec", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  if (with_orc) {
    idx.q_orc_in = pm.add_family("q_orc_in", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  }
  idx.q_sold = pm.add_family("q_sold", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  idx.q_lost = pm.add_family("q_lost", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  double idle_power = 0.0, idle_heat = 0.0;
  for (const auto& cl : dc.clusters) {
    idle_power += dc.pue * cl.rho_intercept_kw;
    idle_heat += cl.rec_efficiency * cl.rec_idle_kw;
  }
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t t = 0; t < T; ++t) {
      LinearExpr p;
      p.add(idx.p_dc(w, t), 1.0);
      LinearExpr q;
      q.add(idx.q_rec(w, t), 1.0);
      for (std::size_t c = 0; c < C; ++c) {
        const auto& cl = dc.clusters[c];
        for (std::size_t r = 0; r < kResourceCount; ++r) p.add(idx.u(w, t, c, r), -dc.pue * cl.rho_coeff_kw[r]);
        for (std::size_t k = 0; k < kComputeCount; ++k) {
          if (cl.cooled[k]) q.add(idx.u(w, t, c, k), -cl.rec_efficiency * cl.rho_coeff_kw[k]);
        }
      }
      pm.model.add_constraint(indexed_name("power_dc", {{A::scenario, w}, {A::step, t}}), p, RowSense::eq, idle_power);
      pm.model.add_constraint(indexed_name("heat_rec", {{A::scenario, w}, {A::step, t}}), q, RowSense::eq, idle_heat);
      LinearExpr split;
      split.add(idx.q_rec(w, t), 1.0).add(idx.q_sold(w, t), -1.0).add(idx.q_lost(w, t), -1.0);
      if (with_orc) split.add(idx.q_orc_in(w, t), -1.0);
      pm.model.add_constraint(indexed_name("heat_split", {{A::scenario, w}, {A::step, t}}), split, RowSense::eq, 0.0);
    }
  }
}

void add_orc_block(PlanningModel& pm, const OrcCurve& orc) {
  require(pm.idx.q_orc_in.present(), "ORC block needs the power/heat block built with ORC");
  require(!orc.samples.empty(), "ORC curve has no samples");
  const std::size_t W = pm.W, T = pm.T, N = orc.samples.size();
  auto& idx = pm.idx;
  const bool binary = pm.options.sos2 == Sos2Encoding::binary;
  idx.p_orc = pm.add_family("p_orc", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  idx.lambda = pm.add_family("lambda", {A::scenario, A::step, A::sample}, {W, T, N}, VarKind::continuous, 0.0, kInf);
  if (binary && N > 1) {
    idx.orc_segment = pm.add_family("orc_seg", {A::scenario, A::step, A::segment}, {W, T, N - 1},
                                    VarKind::binary, 0.0, 1.0);
  }
  std::vector<double> weights;
  for (const auto& s : orc.samples) weights.push_back(s.heat_kw);
  auto& m = pm.model;
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t t = 0; t < T; ++t) {
      LinearExpr sum, heat, power;
      heat.add(idx.q_orc_in(w, t), 1.0);
      power.add(idx.p_orc(w, t), 1.0);
      std::vector<VarId> members;
      for (std::size_t i = 0; i < N; ++i) {
        const VarId l = idx.lambda(w, t, i);
        members.push_back(l);
        sum.add(l, 1.0);
        heat.add(l, -orc.samples[i].heat_kw);
        power.add(l, -orc.samples[i].power_kw);
      }
      const auto wt = std::initializer_list<std::pair<Axis, std::size_t>>{{A::scenario, w}, {A::step, t}};
      m.add_constraint(indexed_name("orc_convex", wt), sum, RowSense::eq, 1.0);
      m.add_constraint(indexed_name("orc_heat", wt), heat, RowSense::eq, 0.0);
      m.add_constraint(indexed_name("orc_power", wt), power, RowSense::le, 0.0);
      if (binary && N > 1) {
        LinearExpr one;
        for (std::size_t j = 0; j + 1 < N; ++j) one.add(idx.orc_segment(w, t, j), 1.0);
        m.add_constraint(indexed_name("orc_seg_one", wt), one, RowSense::eq, 1.0);
        for (std::size_t i = 0; i < N; ++i) {
          LinearExpr adj;
          adj.add(idx.lambda(w, t, i), 1.0);
          if (i > 0) adj.add(idx.orc_segment(w, t, i - 1), -1.0);
          if (i + 1 < N) adj.add(idx.orc_segment(w, t, i), -1.0);
          m.add_constraint(indexed_name("orc_adj", {{A::scenario, w}, {A::step, t}, {A::sample, i}}), adj,
                           RowSense::le, 0.0);
        }
      }
      m.add_sos2(indexed_name("orc_sos2", wt), std::move(members), weights, binary);
    }
  }
}

void add_bess_block(PlanningModel& pm, const BessSpec& b) {
  require(b.e_init_kwh >= b.e_min_kwh && b.e_init_kwh <= b.e_max_kwh,
          "BESS initial energy lies outside [e_min, e_max]");
  require(b.p_rated_kw > 0 && b.eta_oneway > 0 && b.eta_oneway <= 1 && b.rated_cycles > 0 && b.e_rated_kwh > 0,
          "BESS parameters out of range");
  const std::size_t W = pm.W, T = pm.T;
  const double dt = pm.grid.step_hours;
  auto& idx = pm.idx;
  const double P = b.p_rated_kw;
  idx.p_bess_c = pm.add_family("p_bess_c", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, P);
  idx.p_bess_d = pm.add_family("p_bess_d", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, P);
  idx.p_bess = pm.add_family("p_bess", {A::scenario, A::step}, {W, T}, VarKind::continuous, -P, P);
  idx.p_bess_ac = pm.add_family("p_bess_ac", {A::scenario, A::step}, {W, T}, VarKind::continuous, -kInf, kInf);
  idx.z_bess = pm.add_family("z_bess", {A::scenario, A::step}, {W, T}, VarKind::binary, 0.0, 1.0);
  idx.a_bess = pm.add_family("a_bess", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  idx.e_bess = pm.add_family("e_bess", {A::scenario, A::edge}, {W, T + 1}, VarKind::continuous, b.e_min_kwh,
                             b.e_max_kwh);
  auto& m = pm.model;
  const double aging = dt / (2.0 * b.rated_cycles * b.e_rated_kwh);
  LinearExpr average;
  for (std::size_t w = 0; w < W; ++w) {
    m.fix(idx.e_bess(w, 0), b.e_init_kwh);
    for (std::size_t t = 0; t < T; ++t) {
      const auto wt = std::initializer_list<std::pair<Axis, std::size_t>>{{A::scenario, w}, {A::step, t}};
      m.add_constraint(indexed_name("bess_energy", wt),
                       LinearExpr().add(idx.e_bess(w, t + 1), 1.0).add(idx.e_bess(w, t), -1.0).add(idx.p_bess(w, t), -dt),
                       RowSense::eq, 0.0);
      m.add_constraint(indexed_name("bess_ac", wt),
                       LinearExpr()
                           .add(idx.p_bess_ac(w, t), 1.0)
                           .add(idx.p_bess_c(w, t), -1.0 / b.eta_oneway)
                           .add(idx.p_bess_d(w, t), b.eta_oneway),
                       RowSense::eq, 0.0);
      m.add_constraint(indexed_name("bess_split", wt),
                       LinearExpr().add(idx.p_bess(w, t), 1.0).add(idx.p_bess_c(w, t), -1.0).add(idx.p_bess_d(w, t), 1.0),
                       RowSense::eq, 0.0);
      m.add_constraint(indexed_name("bess_charge_on", wt),
                       LinearExpr().add(idx.p_bess_c(w, t), 1.0).add(idx.z_bess(w, t), -P), RowSense::le, 0.0);
      m.add_constraint(indexed_name("bess_discharge_on", wt),
                       LinearExpr().add(idx.p_bess_d(w, t), 1.0).add(idx.z_bess(w, t), P), RowSense::le, P);
      m.add_constraint(indexed_name("bess_aging", wt),
                       LinearExpr()
                           .add(idx.a_bess(w, t), 1.0)
                           .add(idx.p_bess_c(w, t), -aging)
                           .add(idx.p_bess_d(w, t), -aging),
                       RowSense::eq, 0.0);
      average.add(idx.p_bess(w, t), pm.probabilities[w]);
      pm.costs[w].bess_aging.add(idx.a_bess(w, t), b.investment_cost_eur);
      pm.costs[w].emissions_bess.add(idx.a_bess(w, t), b.lca_emissions_kg);
    }
  }
  m.add_constraint("bess_mean_zero", average, RowSense::eq, 0.0);
}

void add_pv_block(PlanningModel& pm, const PvSpec& pv, const ScenarioSet& sc) {
  require(pv.ghi_ref > 0, "PV reference irradiance must be positive");
  const std::size_t W = pm.W, T = pm.T;
  pm.idx.p_pv = pm.add_family("p_pv", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  for (std::size_t w = 0; w < W; ++w) {
    const auto& ghi = sc.scenarios[w].exogenous.ghi;
    require_series(ghi, T, "scenario " + std::to_string(w) + " ghi");
    for (std::size_t t = 0; t < T; ++t) {
      pm.model.set_bounds(pm.idx.p_pv(w, t), 0.0, std::max(0.0, ghi[t] / pv.ghi_ref * pv.p_rated_kw));
    }
  }
}

void add_market_block(PlanningModel& pm, const PpaContract& ppa, const DeratingProfile& caps,
                      const ScenarioSet& sc) {
  require(pm.idx.p_dc.present(), "market block needs the power block");
  const std::size_t W = pm.W, T = pm.T;
  require_series(caps.cap_kw, T, "de-rating profile");
  const double dt = pm.grid.step_hours;
  const double R = ppa.p_gcp_rated_kw;
  require(R > 0, "GCP rated power must be positive");
  auto& idx = pm.idx;
  auto& m = pm.model;
  // Exports are allowed down to -rated; only imports are capped.
  idx.p_gcp = pm.add_family("p_gcp", {A::scenario, A::step}, {W, T}, VarKind::continuous, -R, R);
  const bool market = pm.options.scheme == SupplyScheme::custom_ppa;
  if (market) {
    idx.p_da = pm.add_family("p_da", {A::step}, {T}, VarKind::continuous, -R, R);
    idx.p_imb = pm.add_family("p_imb", {A::scenario, A::step}, {W, T}, VarKind::continuous, -R, R);
    idx.p_plus = pm.add_family("p_short", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, R);
    idx.p_minus = pm.add_family("p_long", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, R);
    idx.z_imb = pm.add_family("z_imb", {A::scenario, A::step}, {W, T}, VarKind::binary, 0.0, 1.0);
    if (pm.options.fixed_day_ahead) {
      require_series(*pm.options.fixed_day_ahead, T, "fixed day-ahead profile");
      for (std::size_t t = 0; t < T; ++t) m.fix(idx.p_da(t), (*pm.options.fixed_day_ahead)[t]);
    }
  }
  for (std::size_t w = 0; w < W; ++w) {
    const auto& x = sc.scenarios[w].exogenous;
    require_series(x.carbon_intensity, T, "scenario " + std::to_string(w) + " carbon intensity");
    if (market) {
      require_series(x.spot, T, "scenario " + std::to_string(w) + " spot price");
      require_series(x.price_short, T, "scenario " + std::to_string(w) + " short price");
      require_series(x.price_long, T, "scenario " + std::to_string(w) + " long price");
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto wt = std::initializer_list<std::pair<Axis, std::size_t>>{{A::scenario, w}, {A::step, t}};
      LinearExpr bal;
      bal.add(idx.p_gcp(w, t), 1.0).add(idx.p_dc(w, t), -1.0);
      if (idx.p_orc.present()) bal.add(idx.p_orc(w, t), 1.0);
      if (idx.p_bess_ac.present()) bal.add(idx.p_bess_ac(w, t), -1.0);
      if (idx.p_pv.present()) bal.add(idx.p_pv(w, t), 1.0);
      m.add_constraint(indexed_name("gcp_balance", wt), bal, RowSense::eq, 0.0);
      m.add_constraint(indexed_name("gcp_cap", wt), LinearExpr().add(idx.p_gcp(w, t), 1.0), RowSense::le,
                       caps.cap_kw[t]);
      if (market) {
        m.add_constraint(indexed_name("gcp_split", wt),
                         LinearExpr().add(idx.p_gcp(w, t), 1.0).add(idx.p_da(t), -1.0).add(idx.p_imb(w, t), -1.0),
                         RowSense::eq, 0.0);
        m.add_constraint(indexed_name("imb_split", wt),
                         LinearExpr().add(idx.p_imb(w, t), 1.0).add(idx.p_plus(w, t), -1.0).add(idx.p_minus(w, t), 1.0),
                         RowSense::eq, 0.0);
        m.add_constraint(indexed_name("imb_short_on", wt),
                         LinearExpr().add(idx.p_plus(w, t), 1.0).add(idx.z_imb(w, t), -R), RowSense::le, 0.0);
        m.add_constraint(indexed_name("imb_long_on", wt),
                         LinearExpr().add(idx.p_minus(w, t), 1.0).add(idx.z_imb(w, t), R), RowSense::le, R);
        pm.costs[w].day_ahead.add(idx.p_da(t), x.spot[t] * dt);
        pm.costs[w].imbalance.add(idx.p_plus(w, t), x.price_short[t] * dt).add(idx.p_minus(w, t), -x.price_long[t] * dt);
      }
      pm.costs[w].emissions_grid.add(idx.p_gcp(w, t), x.carbon_intensity[t] * dt);
    }
  }
}

void add_heat_market_block(PlanningModel& pm, const EconomicsSpec& econ, const ScenarioSet& sc) {
  require(pm.idx.q_sold.present(), "heat market block needs the power/heat block");
  const double dt = pm.grid.step_hours;
  for (std::size_t w = 0; w < pm.W; ++w) {
    const auto& demand = sc.scenarios[w].exogenous.heat_demand;
    require_series(demand, pm.T, "scenario " + std::to_string(w) + " heat demand");
    for (std::size_t t = 0; t < pm.T; ++t) {
      pm.model.set_bounds(pm.idx.q_sold(w, t), 0.0, std::max(0.0, demand[t]));
      pm.costs[w].heat_revenue.add(pm.idx.q_sold(w, t), econ.heat_price * dt);
    }
  }
}

void add_renewable_block(PlanningModel& pm, const EconomicsSpec& econ, const PpaContract& ppa,
                         const ScenarioSet& sc) {
  require(pm.idx.p_gcp.present(), "renewable block needs the market block");
  const std::size_t W = pm.W, T = pm.T;
  const double dt = pm.grid.step_hours;
  auto& idx = pm.idx;
  auto& m = pm.model;
  const bool imports_only = pm.options.accounting == RenewableAccounting::imports_only;
  idx.e_nonren = pm.add_family("e_nonren", {A::scenario, A::edge}, {W, T + 1}, VarKind::continuous, -kInf, kInf);
  if (imports_only) {
    idx.p_gcp_import = pm.add_family("p_import", {A::scenario, A::step}, {W, T}, VarKind::continuous, 0.0, kInf);
  }
  idx.e_dc = pm.add_family("e_dc", {A::scenario}, {W}, VarKind::continuous, 0.0, kInf);
  idx.v_ren = pm.add_family("v_ren", {A::scenario}, {W}, VarKind::binary, 0.0, 1.0);
  const double M = ppa.p_gcp_rated_kw * 24.0;
  LinearExpr quota;
  for (std::size_t w = 0; w < W; ++w) {
    const auto& s = sc.scenarios[w].exogenous.renewable_share;
    require_series(s, T, "scenario " + std::to_string(w) + " renewable share");
    m.fix(idx.e_nonren(w, 0), 0.0);
    LinearExpr edc;
    edc.add(idx.e_dc(w), 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      const auto wt = std::initializer_list<std::pair<Axis, std::size_t>>{{A::scenario, w}, {A::step, t}};
      VarId flow = idx.p_gcp(w, t);
      if (imports_only) {
        flow = idx.p_gcp_import(w, t);
        m.add_constraint(indexed_name("import_part", wt),
                         LinearExpr().add(flow, 1.0).add(idx.p_gcp(w, t), -1.0), RowSense::ge, 0.0);
      }
      m.add_constraint(indexed_name("nonren", wt),
                       LinearExpr()
                           .add(idx.e_nonren(w, t + 1), 1.0)
                           .add(idx.e_nonren(w, t), -1.0)
                           .add(flow, -(1.0 - s[t]) * dt),
                       RowSense::eq, 0.0);
      edc.add(idx.p_dc(w, t), -dt);
    }
    m.add_constraint(indexed_name("energy_dc", {{A::scenario, w}}), edc, RowSense::eq, 0.0);
    m.add_constraint(indexed_name("cc_ren", {{A::scenario, w}}),
                     LinearExpr()
                         .add(idx.e_nonren(w, T), 1.0)
                         .add(idx.e_dc(w), -(1.0 - econ.renewable_target))
                         .add(idx.v_ren(w), -M),
                     RowSense::le, 0.0);
    quota.add(idx.v_ren(w), pm.probabilities[w]);
  }
  m.add_constraint("quota_ren", quota, RowSense::le, pm.options.relax.renewable ? 1.0 : econ.renewable_alpha);
}

void add_tou_objective(PlanningModel& pm, const std::vector<double>& tariff) {
  require(pm.options.scheme == SupplyScheme::tou, "ToU energy cost needs the ToU market layout");
  require(pm.idx.p_gcp.present(), "ToU energy cost needs the market block");
  require_series(tariff, pm.T, "ToU tariff");
  const double dt = pm.grid.step_hours;
  for (std::size_t w = 0; w < pm.W; ++w) {
    for (std::size_t t = 0; t < pm.T; ++t) pm.costs[w].tou_energy.add(pm.idx.p_gcp(w, t), tariff[t] * dt);
  }
}

void add_objective_cvar(PlanningModel& pm, const EconomicsSpec& econ) {
  require(econ.cvar_alpha > 0 && econ.cvar_alpha < 1, "CVaR alpha must lie in (0, 1)");
  require(econ.cvar_beta >= 0 && econ.cvar_beta <= 1, "CVaR beta must lie in [0, 1]");
  const std::size_t W = pm.W;
  auto& idx = pm.idx;
  auto& m = pm.model;
  idx.pi_op = pm.add_family("pi_op", {A::scenario}, {W}, VarKind::continuous, -kInf, kInf);
  idx.eta = pm.add_family("cvar_excess", {A::scenario}, {W}, VarKind::continuous, 0.0, kInf);
  idx.zeta = pm.add_family("cvar_zeta", {}, {}, VarKind::continuous, -kInf, kInf);
  const double beta = econ.cvar_beta, alpha = econ.cvar_alpha;
  LinearExpr obj;
  for (std::size_t w = 0; w < W; ++w) {
    const LinearExpr cost = pm.costs[w].total(econ.carbon_price);
    m.add_constraint(indexed_name("cost", {{A::scenario, w}}), LinearExpr(cost).add(idx.pi_op(w), -1.0),
                     RowSense::eq, 0.0);
    m.add_constraint(indexed_name("cvar_tail", {{A::scenario, w}}),
                     LinearExpr().add(idx.eta(w), 1.0).add(idx.pi_op(w), -1.0).add(idx.zeta.scalar(), 1.0),
                     RowSense::ge, 0.0);
    obj.add(idx.pi_op(w), (1.0 - beta) * pm.probabilities[w]);
    obj.add(idx.eta(w), beta * pm.probabilities[w] / (1.0 - alpha));
  }
  obj.add(idx.zeta.scalar(), beta);
  m.set_objective(obj);
}

PlanningModel build_planning_model(const HubSpec& spec, const ScenarioSet& scenarios,
                                   const DeratingProfile& caps, const ModelOptions& options) {
  PlanningModel pm = begin_planning_model(scenarios, spec.data_center.clusters.size(), options);
  add_workload_block(pm, spec.data_center, scenarios);
  add_power_heat_block(pm, spec.data_center, spec.orc.has_value());
  if (spec.orc) add_orc_block(pm, *spec.orc);
  if (spec.bess) add_bess_block(pm, *spec.bess);
  if (spec.pv) add_pv_block(pm, *spec.pv, scenarios);
  add_market_block(pm, spec.ppa, caps, scenarios);
  add_heat_market_block(pm, spec.economics, scenarios);
  add_renewable_block(pm, spec.economics, spec.ppa, scenarios);
  if (options.scheme == SupplyScheme::tou) {
    if (!spec.economics.tou_tariff) throw BuildError("ToU scheme requires economics.tou_tariff");
    add_tou_objective(pm, *spec.economics.tou_tariff);
  }
  add_objective_cvar(pm, spec.economics);
  return pm;
}

double discrete_cvar(const std::vector<double>& costs, const std::vector<double>& probabilities,
                     double alpha) {
  if (costs.size() != probabilities.size() || costs.empty()) throw InputError("CVaR: size mismatch");
  std::vector<std::size_t> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] > costs[b]; });
  const double tail = 1.0 - alpha;
  double mass = 0.0, acc = 0.0;
  for (std::size_t i : order) {
    const double take = std::min(probabilities[i], tail - mass);
    if (take <= 0.0) break;
    acc += take * costs[i];
    mass += take;
  }
  return acc / tail;
}

}  // namespace dchub
