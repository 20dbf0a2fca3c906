#include "dchub/domain/config_io.hpp"

#include <cmath>
#include <fstream>
#include <algorithm>

#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"

namespace dchub {

using nlohmann::json;

namespace {

// Thin cursor over a JSON node that remembers its path for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  bool has(const char* key) const {
    return value_.is_object() && value_.contains(key) && !value_[key].is_null();
  }

  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected an object");
    auto it = value_.find(key);
    if (it == value_.end()) throw InputError(path_ + "." + key + ": missing required field");
    return Node(*it, path_ + "." + key);
  }

  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double number(const char* key) const { return at(key).number(); }
  double number_or(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::size_t count(const char* key) const {
    const Node n = at(key);
    if (!n.value_.is_number_unsigned() && !n.value_.is_number_integer()) n.fail("expected a count");
    const auto v = n.value_.get<long long>();
    if (v < 0) n.fail("expected a non-negative count");
    return static_cast<std::size_t>(v);
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  std::string string(const char* key) const { return at(key).string(); }

  std::vector<double> series() const {
    if (!value_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    out.reserve(value_.size());
    for (std::size_t i = 0; i < value_.size(); ++i) out.push_back(at(i).number());
    return out;
  }
  std::vector<double> series(const char* key) const { return at(key).series(); }

  std::size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  [[noreturn]] void fail(const std::string& what) const { throw InputError(path_ + ": " + what); }

 private:
  const json& value_;
  std::string path_;
};

void check_schema(const Node& root) {
  if (!root.raw().is_object()) root.fail("expected a JSON object");
  if (root.has("schema_version")) {
    const double v = root.number("schema_version");
    if (v != kSchemaVersion) {
      root.at("schema_version").fail("unsupported schema_version " + std::to_string(int(v)));
    }
  }
}

Resource resource_key(const Node& where, const std::string& key) {
  auto r = parse_resource(key);
  if (!r) where.fail("unknown resource '" + key + "'");
  return *r;
}

PerResource<double> per_resource(const Node& n, bool require_all) {
  PerResource<double> out{};
  if (!n.raw().is_object()) n.fail("expected an object keyed by resource");
  PerResource<bool> seen{};
  for (const auto& [key, value] : n.raw().items()) {
    const Resource r = resource_key(n, key);
    out[index_of(r)] = Node(value, n.path() + "." + key).number();
    seen[index_of(r)] = true;
  }
  if (require_all) {
    for (Resource r : kAllResources) {
      if (!seen[index_of(r)]) n.fail("missing resource " + std::string(to_string(r)));
    }
  }
  return out;
}

ClusterSpec cluster_from_json(const Node& n) {
  ClusterSpec c;
  c.id = n.string("id");
  c.capacity = per_resource(n.at("capacity"), true);
  c.rho_intercept_kw = n.number("rho_intercept");
  c.rho_coeff_kw = per_resource(n.at("rho_coeff"), false);
  const Node ratios = n.at("mem_ratio");
  if (!ratios.raw().is_object()) ratios.fail("expected an object keyed by memory resource");
  if (ratios.raw().size() != 2 || !ratios.has("MEM-CPU") || !ratios.has("MEM-GPU")) {
    ratios.fail("keys must be exactly MEM-CPU and MEM-GPU");
  }
  c.mem_ratio = {ratios.number("MEM-CPU"), ratios.number("MEM-GPU")};
  c.rec_efficiency = n.number("rec_efficiency");
  c.rec_idle_kw = n.number_or("rec_idle", 0.0);
  if (n.has("cooled_resources")) {
    const Node cooled = n.at("cooled_resources");
    for (std::size_t i = 0; i < cooled.size(); ++i) {
      const std::string key = cooled.at(i).string();
      const Resource r = resource_key(cooled.at(i), key);
      if (is_memory(r)) cooled.at(i).fail("only CPU and GPU can be liquid cooled");
      c.cooled[index_of(r)] = true;
    }
  }
  return c;
}

json per_resource_json(const PerResource<double>& v) {
  json out = json::object();
  for (Resource r : kAllResources) out[std::string(to_string(r))] = v[index_of(r)];
  return out;
}

}  // namespace

TimeGrid time_grid_from_json(const json& doc, const std::string& path) {
  const Node n(doc, path);
  TimeGrid g;
  g.step_hours = n.number("step_hours");
  g.steps_per_day = n.count("steps_per_day");
  if (n.has("start")) g.start = parse_timestamp(n.string("start"));
  return g;
}

json to_json(const TimeGrid& grid) {
  return json{{"step_hours", grid.step_hours},
              {"steps_per_day", grid.steps_per_day},
              {"start", format_timestamp(grid.start)}};
}

HubSpec hub_spec_from_json(const json& doc) {
  const Node root(doc, "$");
  check_schema(root);
  HubSpec spec;

  const Node dc = root.at("data_center");
  spec.data_center.pue = dc.number("pue");
  spec.data_center.gamma_inelastic = dc.number("gamma_inelastic");
  spec.data_center.gamma_flexible = dc.number("gamma_flexible");
  const Node clusters = dc.at("clusters");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    spec.data_center.clusters.push_back(cluster_from_json(clusters.at(i)));
  }

  if (root.has("bess")) {
    const Node b = root.at("bess");
    BessSpec s;
    s.e_min_kwh = b.number("e_min");
    s.e_max_kwh = b.number("e_max");
    s.e_rated_kwh = b.number("e_rated");
    s.p_rated_kw = b.number("p_rated");
    s.eta_oneway = b.number("eta_oneway");
    s.e_init_kwh = b.number("e_init");
    s.rated_cycles = b.number("rated_cycles");
    s.investment_cost_eur = b.number("investment_cost");
    s.lca_emissions_kg = b.number("lca_emissions");
    spec.bess = s;
  }
  if (root.has("pv")) {
    const Node p = root.at("pv");
    spec.pv = PvSpec{p.number("p_rated"), p.number("ghi_ref")};
  }
  if (root.has("orc")) {
    const Node samples = root.at("orc").at("samples");
    OrcCurve curve;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Node s = samples.at(i);
      if (s.size() != 2) s.fail("expected [heat_kw, power_kw]");
      curve.samples.push_back({s.at(std::size_t{0}).number(), s.at(std::size_t{1}).number()});
    }
    spec.orc = curve;
  }

  const Node ppa = root.at("ppa");
  spec.ppa.p_gcp_rated_kw = ppa.number("p_gcp_rated");
  spec.ppa.p_gcp_min_kw = ppa.number("p_gcp_min");
  spec.ppa.t_daily_lim_h = ppa.number("t_daily_lim");
  spec.ppa.t_weekly_lim_h = ppa.number("t_weekly_lim");

  const Node e = root.at("economics");
  auto& econ = spec.economics;
  econ.carbon_price = e.number("carbon_price");
  econ.heat_price = e.number("heat_price");
  econ.renewable_target = e.number("renewable_target");
  econ.renewable_alpha = e.number("renewable_alpha");
  econ.cvar_alpha = e.number("cvar_alpha");
  econ.cvar_beta = e.number("cvar_beta");
  if (e.has("tou_tariff")) econ.tou_tariff = e.series("tou_tariff");
  return spec;
}

json to_json(const HubSpec& spec) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json clusters = json::array();
  for (const auto& c : spec.data_center.clusters) {
    json cooled = json::array();
    for (Resource r : kComputeResources) {
      if (c.cooled[index_of(r)]) cooled.push_back(std::string(to_string(r)));
    }
    clusters.push_back(json{{"id", c.id},
                            {"capacity", per_resource_json(c.capacity)},
                            {"rho_intercept", c.rho_intercept_kw},
                            {"rho_coeff", per_resource_json(c.rho_coeff_kw)},
                            {"mem_ratio", {{"MEM-CPU", c.mem_ratio[0]}, {"MEM-GPU", c.mem_ratio[1]}}},
                            {"rec_efficiency", c.rec_efficiency},
                            {"rec_idle", c.rec_idle_kw},
                            {"cooled_resources", cooled}});
  }
  doc["data_center"] = json{{"pue", spec.data_center.pue},
                            {"gamma_inelastic", spec.data_center.gamma_inelastic},
                            {"gamma_flexible", spec.data_center.gamma_flexible},
                            {"clusters", clusters}};
  if (spec.bess) {
    const auto& b = *spec.bess;
    doc["bess"] = json{{"e_min", b.e_min_kwh},
                       {"e_max", b.e_max_kwh},
                       {"e_rated", b.e_rated_kwh},
                       {"p_rated", b.p_rated_kw},
                       {"eta_oneway", b.eta_oneway},
                       {"e_init", b.e_init_kwh},
                       {"rated_cycles", b.rated_cycles},
                       {"investment_cost", b.investment_cost_eur},
                       {"lca_emissions", b.lca_emissions_kg}};
  }
  if (spec.pv) doc["pv"] = json{{"p_rated", spec.pv->p_rated_kw}, {"ghi_ref", spec.pv->ghi_ref}};
  if (spec.orc) {
    json samples = json::array();
    for (const auto& s : spec.orc->samples) samples.push_back(json::array({s.heat_kw, s.power_kw}));
    doc["orc"] = json{{"samples", samples}};
  }
  doc["ppa"] = json{{"p_gcp_rated", spec.ppa.p_gcp_rated_kw},
                    {"p_gcp_min", spec.ppa.p_gcp_min_kw},
                    {"t_daily_lim", spec.ppa.t_daily_lim_h},
                    {"t_weekly_lim", spec.ppa.t_weekly_lim_h}};
  const auto& e = spec.economics;
  doc["economics"] = json{{"carbon_price", e.carbon_price},
                          {"heat_price", e.heat_price},
                          {"renewable_target", e.renewable_target},
                          {"renewable_alpha", e.renewable_alpha},
                          {"cvar_alpha", e.cvar_alpha},
                          {"cvar_beta", e.cvar_beta}};
  if (e.tou_tariff) doc["economics"]["tou_tariff"] = *e.tou_tariff;
  return doc;
}

ScenarioSet scenario_set_from_json(const json& doc, const DataCenterSpec& dc) {
  const Node root(doc, "$");
  check_schema(root);
  ScenarioSet set;
  set.grid = time_grid_from_json(root.at("grid").raw(), "$.grid");
  const Node list = root.at("scenarios");
  for (std::size_t w = 0; w < list.size(); ++w) {
    const Node s = list.at(w);
    Scenario sc;
    sc.probability = s.number("probability");
    const Node x = s.at("exogenous");
    sc.exogenous.spot = x.series("spot");
    sc.exogenous.price_short = x.series("price_short");
    sc.exogenous.price_long = x.series("price_long");
    sc.exogenous.carbon_intensity = x.series("carbon_intensity");
    sc.exogenous.renewable_share = x.series("renewable_share");
    sc.exogenous.ghi = x.series("ghi");
    sc.exogenous.heat_demand = x.series("heat_demand");

    const Node wl = s.at("workload");
    const Node inel = wl.at("inelastic");
    const Node flex = wl.at("flexible");
    for (const char* part : {"inelastic", "flexible"}) {
      const Node p = wl.at(part);
      if (!p.raw().is_object()) p.fail("expected an object keyed by cluster id");
      for (const auto& [id, value] : p.raw().items()) {
        const bool known = std::any_of(dc.clusters.begin(), dc.clusters.end(),
                                       [&](const ClusterSpec& c) { return c.id == id; });
        if (!known) p.fail("unknown cluster '" + id + "'");
        const Node per(value, p.path() + "." + id);
        if (!per.raw().is_object()) per.fail("expected an object keyed by resource");
        for (const auto& [key, unused] : per.raw().items()) {
          const Resource r = resource_key(per, key);
          if (is_memory(r)) {
            per.fail(std::string(part) + " demand for memory resource " + key +
                     " is not accepted; memory usage is derived from CPU/GPU usage");
          }
        }
      }
    }
    sc.workload.clusters.resize(dc.clusters.size());
    for (std::size_t c = 0; c < dc.clusters.size(); ++c) {
      const char* id = dc.clusters[c].id.c_str();
      auto& cw = sc.workload.clusters[c];
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        const std::string rn(to_string(kComputeResources[k]));
        if (inel.has(id) && inel.at(id).has(rn.c_str())) {
          cw.inelastic[k] = inel.at(id).series(rn.c_str());
        } else {
          cw.inelastic[k].assign(set.grid.steps_per_day, 0.0);
        }
        if (flex.has(id) && flex.at(id).has(rn.c_str())) cw.flexible[k] = flex.at(id).number(rn.c_str());
      }
    }
    set.scenarios.push_back(std::move(sc));
  }
  return set;
}

json to_json(const ScenarioSet& set, const DataCenterSpec& dc) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["grid"] = to_json(set.grid);
  json list = json::array();
  for (const auto& sc : set.scenarios) {
    const auto& x = sc.exogenous;
    json inel = json::object();
    json flex = json::object();
    for (std::size_t c = 0; c < dc.clusters.size() && c < sc.workload.clusters.size(); ++c) {
      const auto& cw = sc.workload.clusters[c];
      for (std::size_t k = 0; k < kComputeCount; ++k) {
        const std::string rn(to_string(kComputeResources[k]));
        inel[dc.clusters[c].id][rn] = cw.inelastic[k];
        flex[dc.clusters[c].id][rn] = cw.flexible[k];
      }
    }
    list.push_back(json{{"probability", sc.probability},
                        {"exogenous",
                         {{"spot", x.spot},
                          {"price_short", x.price_short},
                          {"price_long", x.price_long},
                          {"carbon_intensity", x.carbon_intensity},
                          {"renewable_share", x.renewable_share},
                          {"ghi", x.ghi},
                          {"heat_demand", x.heat_demand}}},
                        {"workload", {{"inelastic", inel}, {"flexible", flex}}}});
  }
  doc["scenarios"] = list;
  return doc;
}

DeratingProfile derating_from_json(const json& doc) {
  const Node root(doc, "$");
  check_schema(root);
  return DeratingProfile{root.series("cap_kw")};
}

json to_json(const DeratingProfile& profile) {
  return json{{"schema_version", kSchemaVersion}, {"cap_kw", profile.cap_kw}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << doc.dump(2) << "\n";
}

HubSpec load_hub_spec(const std::filesystem::path& path) {
  try {
    return hub_spec_from_json(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

ScenarioSet load_scenario_set(const std::filesystem::path& path, const DataCenterSpec& dc) {
  try {
    return scenario_set_from_json(read_json_file(path), dc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

DeratingProfile load_derating_profile(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    return DeratingProfile{read_series_csv(path).values};
  }
  try {
    return derating_from_json(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace dchub
