#include "dchub/scenario/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "dchub/domain/config_io.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/scenario/rng.hpp"

namespace dchub {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref) {
  const std::filesystem::path p(ref);
  return p.is_absolute() ? p : base / p;
}

std::vector<double> read_forecast(const json& node, const std::filesystem::path& base,
                                  const std::string& path, std::size_t steps) {
  std::vector<double> values;
  if (node.is_string()) {
    values = read_series_csv(resolve(base, node.get<std::string>())).values;
  } else if (node.is_array()) {
    for (const auto& v : node) {
      if (!v.is_number()) throw InputError(path + ": expected numbers");
      values.push_back(v.get<double>());
    }
  } else if (node.is_number() && steps == 1) {
    values.push_back(node.get<double>());
  } else {
    throw InputError(path + ": expected a CSV file name or an array of numbers");
  }
  if (values.size() != steps) {
    throw InputError(path + ": expected " + std::to_string(steps) + " values, got " +
                     std::to_string(values.size()));
  }
  return values;
}

SeriesSource read_source(const json& doc, const std::filesystem::path& base, const std::string& path,
                         std::size_t steps) {
  if (!doc.is_object()) throw InputError(path + ": expected an object");
  if (!doc.contains("forecast")) throw InputError(path + ".forecast: missing required field");
  if (!doc.contains("residuals")) throw InputError(path + ".residuals: missing required field");
  SeriesSource src;
  src.forecast = read_forecast(doc["forecast"], base, path + ".forecast", steps);
  const json& res = doc["residuals"];
  if (res.is_string()) {
    src.history = read_residual_history(resolve(base, res.get<std::string>()), steps);
  } else if (res.is_array()) {
    for (std::size_t d = 0; d < res.size(); ++d) {
      const auto& row = res[d];
      std::vector<double> r;
      if (row.is_number() && steps == 1) {
        r.push_back(row.get<double>());
      } else if (row.is_array()) {
        for (const auto& v : row) r.push_back(v.get<double>());
      }
      if (r.size() != steps) {
        throw InputError(path + ".residuals[" + std::to_string(d) + "]: expected " +
                         std::to_string(steps) + " values");
      }
      src.history.residuals.push_back(std::move(r));
    }
  } else {
    throw InputError(path + ".residuals: expected a CSV file name or an array");
  }
  if (src.history.residuals.empty()) throw InputError(path + ".residuals: residual history is empty");
  return src;
}

std::size_t get_count(const json& doc, const char* key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_unsigned()) throw InputError(std::string("$.") + key + ": expected a count");
  return doc[key].get<std::size_t>();
}

std::uint64_t stream_id(std::size_t group, std::size_t cluster) { return (group << 16) | cluster; }

}  // namespace

ScenarioInputs load_scenario_inputs(const std::filesystem::path& file, const DataCenterSpec& dc) {
  const json doc = read_json_file(file);
  const auto base = file.parent_path();
  try {
    if (!doc.is_object()) throw InputError("$: expected an object");
    if (doc.contains("schema_version") && doc["schema_version"] != kSchemaVersion) {
      throw InputError("$.schema_version: unsupported version");
    }
    ScenarioInputs in;
    if (!doc.contains("grid")) throw InputError("$.grid: missing required field");
    in.grid = time_grid_from_json(doc["grid"], "$.grid");
    const std::size_t T = in.grid.steps_per_day;
    in.n_per_parameter = get_count(doc, "n_per_parameter", in.n_per_parameter);
    in.n_combinations = get_count(doc, "n_combinations", in.n_combinations);
    in.k = get_count(doc, "k", in.k);
    in.seed = get_count(doc, "seed", 0);

    if (!doc.contains("imbalance")) throw InputError("$.imbalance: missing required field");
    const json& imb = doc["imbalance"];
    if (imb.contains("calibration")) {
      const auto hist = read_imbalance_history(resolve(base, imb["calibration"].get<std::string>()));
      const double target = imb.value("target_underestimation", 0.4);
      in.imbalance = calibrate_imbalance_factors(hist.spot, hist.price_short, hist.price_long, target);
    } else if (imb.contains("k_short") && imb.contains("k_long")) {
      in.imbalance = {imb["k_short"].get<double>(), imb["k_long"].get<double>()};
    } else {
      throw InputError("$.imbalance: expected {calibration, target_underestimation} or {k_short, k_long}");
    }

    if (!doc.contains("heat_demand")) throw InputError("$.heat_demand: missing required field");
    in.heat_demand = read_forecast(doc["heat_demand"], base, "$.heat_demand", T);

    if (!doc.contains("parameters")) throw InputError("$.parameters: missing required field");
    const json& p = doc["parameters"];
    auto need = [&](const char* key) -> const json& {
      if (!p.contains(key)) throw InputError(std::string("$.parameters.") + key + ": missing required field");
      return p[key];
    };
    in.spot = read_source(need("spot"), base, "$.parameters.spot", T);
    in.renewable_share = read_source(need("renewable_share"), base, "$.parameters.renewable_share", T);
    in.carbon_intensity = read_source(need("carbon_intensity"), base, "$.parameters.carbon_intensity", T);
    in.ghi = read_source(need("ghi"), base, "$.parameters.ghi", T);

    for (const char* part : {"inelastic", "flexible"}) {
      const json& node = need(part);
      const std::string ppath = std::string("$.parameters.") + part;
      for (const auto& [id, unused] : node.items()) {
        if (std::none_of(dc.clusters.begin(), dc.clusters.end(),
                         [&](const ClusterSpec& c) { return c.id == id; })) {
          throw InputError(ppath + ": unknown cluster '" + id + "'");
        }
        for (const auto& [key, unused2] : node[id].items()) {
          const auto r = parse_resource(key);
          if (!r || is_memory(*r)) {
            throw InputError(ppath + "." + id + "." + key +
                             ": only CPU and GPU demand is accepted; memory usage is derived");
          }
        }
      }
      auto& target = std::string(part) == "inelastic" ? in.inelastic : in.flexible;
      const std::size_t steps = std::string(part) == "inelastic" ? T : 1;
      for (const auto& c : dc.clusters) {
        PerCompute<SeriesSource> per;
        for (std::size_t k = 0; k < kComputeCount; ++k) {
          const std::string rn(to_string(kComputeResources[k]));
          const std::string where = ppath + "." + c.id + "." + rn;
          if (node.contains(c.id) && node[c.id].contains(rn)) {
            per[k] = read_source(node[c.id][rn], base, where, steps);
          } else {
            per[k].forecast.assign(steps, 0.0);
            per[k].history.residuals.assign(1, std::vector<double>(steps, 0.0));
          }
        }
        target.push_back(std::move(per));
      }
    }
    return in;
  } catch (const InputError& e) {
    throw InputError(file.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

std::vector<ParameterGroup> generate_parameter_groups(const ScenarioInputs& in, const DataCenterSpec& dc) {
  const std::size_t N = in.n_per_parameter;
  const std::size_t C = dc.clusters.size();
  if (in.inelastic.size() != C || in.flexible.size() != C) {
    throw InputError("scenario inputs do not cover every cluster");
  }
  std::vector<ParameterGroup> groups(kGroupCount);
  auto simple = [&](ParameterGroupId g, const char* name, const SeriesSource& s, SeriesDomain dom) {
    groups[g].name = name;
    groups[g].scenarios = bootstrap_scenarios(s.forecast, s.history, N, in.seed, dom, stream_id(g, 0));
  };
  simple(kGroupSpot, "spot", in.spot, SeriesDomain::unbounded);
  simple(kGroupRenewableShare, "renewable_share", in.renewable_share, SeriesDomain::unit_interval);
  simple(kGroupCarbon, "carbon_intensity", in.carbon_intensity, SeriesDomain::nonnegative);
  simple(kGroupGhi, "ghi", in.ghi, SeriesDomain::nonnegative);

  const char* names[] = {"inelastic_cpu", "inelastic_gpu", "flexible_cpu", "flexible_gpu"};
  for (std::size_t part = 0; part < 2; ++part) {
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      const std::size_t g = kGroupInelasticCpu + part * 2 + k;
      groups[g].name = names[part * 2 + k];
      groups[g].scenarios.assign(N, {});
      for (std::size_t c = 0; c < C; ++c) {
        const auto& src = part == 0 ? in.inelastic[c][k] : in.flexible[c][k];
        auto draws = bootstrap_scenarios(src.forecast, src.history, N, in.seed, SeriesDomain::nonnegative,
                                         stream_id(g, c));
        const double cap = dc.clusters[c].capacity[k];
        for (std::size_t i = 0; i < N; ++i) {
          for (double v : draws[i]) {
            groups[g].scenarios[i].push_back(part == 0 ? std::min(v, cap) : v);
          }
        }
      }
    }
  }
  return groups;
}

Scenario decode_combination(const CombinationSet& set, std::size_t combo, const ScenarioInputs& in,
                            const DataCenterSpec& dc) {
  const std::size_t T = in.grid.steps_per_day;
  auto series = [&](ParameterGroupId g) -> const std::vector<double>& {
    return set.groups()[g].scenarios[set.pick(combo, g)];
  };
  Scenario sc;
  auto& x = sc.exogenous;
  x.spot = series(kGroupSpot);
  x.price_short.resize(T);
  x.price_long.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    x.price_short[t] = in.imbalance.k_short * x.spot[t];
    x.price_long[t] = in.imbalance.k_long * x.spot[t];
  }
  x.renewable_share = series(kGroupRenewableShare);
  x.carbon_intensity = series(kGroupCarbon);
  x.ghi = series(kGroupGhi);
  x.heat_demand = in.heat_demand;
  sc.workload.clusters.resize(dc.clusters.size());
  for (std::size_t c = 0; c < dc.clusters.size(); ++c) {
    for (std::size_t k = 0; k < kComputeCount; ++k) {
      const auto& inel = series(ParameterGroupId(kGroupInelasticCpu + k));
      sc.workload.clusters[c].inelastic[k].assign(inel.begin() + std::ptrdiff_t(c * T),
                                                  inel.begin() + std::ptrdiff_t((c + 1) * T));
      sc.workload.clusters[c].flexible[k] = series(ParameterGroupId(kGroupFlexibleCpu + k))[c];
    }
  }
  return sc;
}

ScenarioPipelineResult build_scenario_set(const ScenarioInputs& in, const DataCenterSpec& dc,
                                          const KMeansOptions& options) {
  auto groups = generate_parameter_groups(in, dc);
  const CombinationSet combos = combine_scenarios(std::move(groups), in.n_combinations,
                                                  splitmix64(in.seed ^ 0x636f6d62ULL));
  ScenarioPipelineResult out;
  out.clustering = reduce_kmeans(combos, in.k, splitmix64(in.seed ^ 0x6b6d6eULL), options);
  out.distinct_combinations = out.clustering.distinct;
  out.set.grid = in.grid;
  for (std::size_t k = 0; k < in.k; ++k) {
    Scenario sc = decode_combination(combos, out.clustering.representatives[k], in, dc);
    sc.probability = out.clustering.probabilities[k];
    out.set.scenarios.push_back(std::move(sc));
  }
  return out;
}

}  // namespace dchub
