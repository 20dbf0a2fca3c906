#include "dchub/domain/validation.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace dchub {
namespace {

class Collector {
 public:
  explicit Collector(ValidationReport& report) : report_(report) {}

  void require(bool ok, std::string path, std::string invariant, std::string detail = {}) {
    if (!ok) report_.violations.push_back({std::move(path), std::move(invariant), std::move(detail)});
  }

 private:
  ValidationReport& report_;
};

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

bool ValidationReport::mentions(std::string_view invariant) const {
  for (const auto& v : violations) {
    if (v.invariant.find(invariant) != std::string::npos) return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.path << ": violates " << v.invariant;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
    os << "\n";
  }
  return os.str();
}

ValidationReport validate_time_grid(const TimeGrid& grid) {
  ValidationReport report;
  Collector c(report);
  c.require(grid.step_hours > 0.0, "time_grid.step_hours", "step_hours > 0", num(grid.step_hours));
  c.require(grid.steps_per_day > 0, "time_grid.steps_per_day", "steps_per_day > 0");
  c.require(std::abs(double(grid.steps_per_day) * grid.step_hours - 24.0) < 1e-9,
            "time_grid", "steps_per_day × step_hours = 24",
            num(double(grid.steps_per_day) * grid.step_hours));
  return report;
}

ValidationReport validate_hub_spec(const HubSpec& spec) {
  ValidationReport report;
  Collector c(report);

  const auto& dc = spec.data_center;
  c.require(dc.pue >= 1.0, "data_center.pue", "pue ≥ 1", num(dc.pue));
  c.require(dc.gamma_inelastic >= 0.0 && dc.gamma_inelastic <= 1.0, "data_center.gamma_inelastic",
            "0 ≤ gamma_inelastic ≤ 1", num(dc.gamma_inelastic));
  c.require(dc.gamma_flexible >= 0.0 && dc.gamma_flexible <= 1.0, "data_center.gamma_flexible",
            "0 ≤ gamma_flexible ≤ 1", num(dc.gamma_flexible));
  c.require(!dc.clusters.empty(), "data_center.clusters", "at least one cluster");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < dc.clusters.size(); ++i) {
    const auto& cl = dc.clusters[i];
    const std::string p = "data_center.clusters[" + std::to_string(i) + "]";
    c.require(ids.insert(cl.id).second, p + ".id", "cluster ids unique", cl.id);
    for (Resource r : kAllResources) {
      const std::string rn(to_string(r));
      c.require(cl.capacity[index_of(r)] >= 0.0, p + ".capacity." + rn, "capacity ≥ 0");
      c.require(cl.rho_coeff_kw[index_of(r)] >= 0.0, p + ".rho_coeff." + rn, "rho_coeff ≥ 0");
    }
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      c.require(cl.mem_ratio[k] >= 0.0 && std::isfinite(cl.mem_ratio[k]),
                p + ".mem_ratio." + std::string(to_string(memory_of(kComputeResources[k]))),
                "mem_ratio ≥ 0");
    }
    c.require(cl.rec_efficiency >= 0.0 && cl.rec_efficiency <= 1.0, p + ".rec_efficiency",
              "0 ≤ rec_efficiency ≤ 1", num(cl.rec_efficiency));
    c.require(cl.rec_idle_kw >= 0.0, p + ".rec_idle", "rec_idle ≥ 0");
  }

  if (spec.bess) {
    const auto& b = *spec.bess;
    c.require(b.e_min_kwh >= 0.0, "bess.e_min", "0 ≤ e_min", num(b.e_min_kwh));
    c.require(b.e_min_kwh <= b.e_init_kwh, "bess.e_init", "e_min ≤ e_init");
    c.require(b.e_init_kwh <= b.e_max_kwh, "bess.e_init", "e_init ≤ e_max");
    c.require(b.e_min_kwh <= b.e_max_kwh, "bess.e_min", "e_min ≤ e_max",
              num(b.e_min_kwh) + " > " + num(b.e_max_kwh));
    c.require(b.e_max_kwh <= b.e_rated_kwh, "bess.e_max", "e_max ≤ e_rated");
    c.require(b.eta_oneway > 0.0 && b.eta_oneway <= 1.0, "bess.eta_oneway", "0 < eta_oneway ≤ 1");
    c.require(b.p_rated_kw > 0.0, "bess.p_rated", "p_rated > 0");
    c.require(b.rated_cycles > 0.0, "bess.rated_cycles", "rated_cycles > 0");
    c.require(b.e_rated_kwh > 0.0, "bess.e_rated", "e_rated > 0");
  }

  if (spec.pv) {
    c.require(spec.pv->p_rated_kw >= 0.0, "pv.p_rated", "p_rated ≥ 0");
    c.require(spec.pv->ghi_ref > 0.0, "pv.ghi_ref", "ghi_ref > 0");
  }

  if (spec.orc) {
    const auto& s = spec.orc->samples;
    c.require(s.size() >= 2, "orc.samples", "at least two samples");
    if (!s.empty()) {
      c.require(s[0].heat_kw == 0.0 && s[0].power_kw == 0.0, "orc.samples[0]",
                "samples[0] = (0, 0)");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = "orc.samples[" + std::to_string(i) + "]";
      c.require(s[i].power_kw <= s[i].heat_kw, p, "power_kw ≤ heat_kw");
      if (i > 0) {
        c.require(s[i].heat_kw > s[i - 1].heat_kw, p, "heat_kw strictly increasing");
        c.require(s[i].power_kw >= s[i - 1].power_kw, p, "power_kw non-decreasing");
      }
    }
  }

  const auto& ppa = spec.ppa;
  c.require(ppa.p_gcp_min_kw >= 0.0, "ppa.p_gcp_min", "0 ≤ p_gcp_min");
  c.require(ppa.p_gcp_min_kw <= ppa.p_gcp_rated_kw, "ppa.p_gcp_min", "p_gcp_min ≤ p_gcp_rated");
  c.require(ppa.p_gcp_rated_kw > 0.0, "ppa.p_gcp_rated", "p_gcp_rated > 0");
  c.require(ppa.t_daily_lim_h >= 0.0 && ppa.t_daily_lim_h <= 24.0, "ppa.t_daily_lim",
            "0 ≤ t_daily_lim ≤ 24");
  c.require(ppa.t_daily_lim_h <= ppa.t_weekly_lim_h, "ppa.t_weekly_lim",
            "t_daily_lim ≤ t_weekly_lim");
  c.require(ppa.t_weekly_lim_h <= 168.0, "ppa.t_weekly_lim", "t_weekly_lim ≤ 168");

  const auto& e = spec.economics;
  c.require(e.cvar_beta >= 0.0 && e.cvar_beta <= 1.0, "economics.cvar_beta", "0 ≤ cvar_beta ≤ 1");
  c.require(e.cvar_alpha > 0.0 && e.cvar_alpha < 1.0, "economics.cvar_alpha",
            "0 < cvar_alpha < 1");
  c.require(e.renewable_target >= 0.0 && e.renewable_target <= 1.0,
            "economics.renewable_target", "0 ≤ renewable_target ≤ 1");
  c.require(e.renewable_alpha >= 0.0 && e.renewable_alpha <= 1.0, "economics.renewable_alpha",
            "0 ≤ renewable_alpha ≤ 1");
  c.require(std::isfinite(e.carbon_price) && std::isfinite(e.heat_price), "economics",
            "prices finite");
  if (e.tou_tariff) {
    c.require(finite_all(*e.tou_tariff), "economics.tou_tariff", "tariff finite");
  }
  return report;
}

ValidationReport validate_scenario_set(const ScenarioSet& set, const HubSpec& spec) {
  ValidationReport report = validate_time_grid(set.grid);
  Collector c(report);
  const std::size_t T = set.grid.steps_per_day;
  const auto& clusters = spec.data_center.clusters;

  c.require(!set.scenarios.empty(), "scenarios", "at least one scenario");
  double total = 0.0;
  for (std::size_t w = 0; w < set.scenarios.size(); ++w) {
    const auto& sc = set.scenarios[w];
    const std::string p = "scenarios[" + std::to_string(w) + "]";
    c.require(sc.probability >= 0.0, p + ".probability", "probability ≥ 0");
    total += sc.probability;

    const auto& x = sc.exogenous;
    const std::pair<const char*, const std::vector<double>*> series[] = {
        {"spot", &x.spot},
        {"price_short", &x.price_short},
        {"price_long", &x.price_long},
        {"carbon_intensity", &x.carbon_intensity},
        {"renewable_share", &x.renewable_share},
        {"ghi", &x.ghi},
        {"heat_demand", &x.heat_demand}};
    for (const auto& [name, v] : series) {
      c.require(v->size() == T, p + ".exogenous." + name, "length = steps_per_day",
                std::to_string(v->size()));
      c.require(finite_all(*v), p + ".exogenous." + name, "finite values");
    }
    for (std::size_t t = 0; t < x.renewable_share.size(); ++t) {
      c.require(x.renewable_share[t] >= 0.0 && x.renewable_share[t] <= 1.0,
                p + ".exogenous.renewable_share[" + std::to_string(t) + "]",
                "0 ≤ renewable_share ≤ 1");
    }
    for (std::size_t t = 0; t < x.carbon_intensity.size(); ++t) {
      c.require(x.carbon_intensity[t] >= 0.0,
                p + ".exogenous.carbon_intensity[" + std::to_string(t) + "]",
                "carbon_intensity ≥ 0");
    }
    for (std::size_t t = 0; t < x.heat_demand.size(); ++t) {
      c.require(x.heat_demand[t] >= 0.0, p + ".exogenous.heat_demand[" + std::to_string(t) + "]",
                "heat_demand ≥ 0");
    }
    for (std::size_t t = 0; t < x.ghi.size(); ++t) {
      c.require(x.ghi[t] >= 0.0, p + ".exogenous.ghi[" + std::to_string(t) + "]", "ghi ≥ 0");
    }

    const auto& wl = sc.workload;
    c.require(wl.clusters.size() == clusters.size(), p + ".workload",
              "one workload entry per cluster");
    for (std::size_t ci = 0; ci < std::min(wl.clusters.size(), clusters.size()); ++ci) {
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        const Resource r = kComputeResources[k];
        const std::string q = p + ".workload." + clusters[ci].id + "." + std::string(to_string(r));
        const auto& inel = wl.clusters[ci].inelastic[k];
        c.require(inel.size() == T, q + ".inelastic", "length = steps_per_day");
        for (std::size_t t = 0; t < inel.size(); ++t) {
          c.require(inel[t] >= 0.0 && inel[t] <= clusters[ci].capacity[index_of(r)] + 1e-9,
                    q + ".inelastic[" + std::to_string(t) + "]", "0 ≤ inelastic ≤ capacity",
                    num(inel[t]));
        }
        c.require(wl.clusters[ci].flexible[k] >= 0.0 && std::isfinite(wl.clusters[ci].flexible[k]),
                  q + ".flexible", "flexible ≥ 0");
      }
    }
  }
  c.require(std::abs(total - 1.0) <= 1e-9, "scenarios", "probabilities sum to 1", num(total));
  return report;
}

}  // namespace dchub
