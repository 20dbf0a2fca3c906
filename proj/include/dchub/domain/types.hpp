#pragma once

// Core data types of the energy hub. Canonical units throughout:
// power kW, heat kW_th, energy kWh, prices EUR/kWh, carbon intensity
// kgCO2eq/kWh, carbon price EUR/kgCO2eq.

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dchub {

enum class Resource : std::size_t { cpu = 0, gpu = 1, mem_cpu = 2, mem_gpu = 3 };

inline constexpr std::size_t kResourceCount = 4;
inline constexpr std::size_t kComputeCount = 2;
inline constexpr std::array<Resource, kResourceCount> kAllResources = {
    Resource::cpu, Resource::gpu, Resource::mem_cpu, Resource::mem_gpu};
inline constexpr std::array<Resource, kComputeCount> kComputeResources = {Resource::cpu,
                                                                         Resource::gpu};

constexpr std::size_t index_of(Resource r) { return static_cast<std::size_t>(r); }
constexpr bool is_memory(Resource r) { return r == Resource::mem_cpu || r == Resource::mem_gpu; }
/// MEM-CPU follows CPU, MEM-GPU follows GPU.
constexpr Resource memory_of(Resource compute) {
  return compute == Resource::cpu ? Resource::mem_cpu : Resource::mem_gpu;
}

std::string_view to_string(Resource r);
std::optional<Resource> parse_resource(std::string_view name);

template <class T>
using PerResource = std::array<T, kResourceCount>;
template <class T>
using PerCompute = std::array<T, kComputeCount>;

struct TimeGrid {
  double step_hours = 1.0;
  std::size_t steps_per_day = 24;
  std::chrono::sys_seconds start{};

  bool operator==(const TimeGrid&) const = default;
};

struct ClusterSpec {
  std::string id;
  PerResource<double> capacity{};       // resource units
  double rho_intercept_kw = 0.0;
  PerResource<double> rho_coeff_kw{};   // kW per resource unit
  PerCompute<double> mem_ratio{};       // MEM-CPU per CPU, MEM-GPU per GPU
  double rec_efficiency = 0.0;
  double rec_idle_kw = 0.0;
  PerCompute<bool> cooled{};            // direct liquid cooled CPU / GPU

  bool operator==(const ClusterSpec&) const = default;
};

struct DataCenterSpec {
  std::vector<ClusterSpec> clusters;
  double pue = 1.0;
  double gamma_inelastic = 1.0;
  double gamma_flexible = 1.0;

  bool operator==(const DataCenterSpec&) const = default;
};

struct BessSpec {
  double e_min_kwh = 0.0;
  double e_max_kwh = 0.0;
  double e_rated_kwh = 0.0;
  double p_rated_kw = 0.0;
  double eta_oneway = 1.0;
  double e_init_kwh = 0.0;
  double rated_cycles = 1.0;
  double investment_cost_eur = 0.0;
  double lca_emissions_kg = 0.0;

  bool operator==(const BessSpec&) const = default;
};

struct PvSpec {
  double p_rated_kw = 0.0;
  double ghi_ref = 1000.0;  // W/m2

  bool operator==(const PvSpec&) const = default;
};

struct OrcSample {
  double heat_kw = 0.0;
  double power_kw = 0.0;

  bool operator==(const OrcSample&) const = default;
};

/// Sampled heat-to-power curve of the ORC at maximum efficiency.
struct OrcCurve {
  std::vector<OrcSample> samples;

  /// Piecewise-linear interpolation; heat beyond the last sample is clamped.
  double power_at(double heat_kw) const;
  bool operator==(const OrcCurve&) const = default;
};

struct PpaContract {
  double p_gcp_rated_kw = 0.0;
  double p_gcp_min_kw = 0.0;
  double t_daily_lim_h = 0.0;
  double t_weekly_lim_h = 0.0;

  bool operator==(const PpaContract&) const = default;
};

/// Virtual transfer capacity issued by the DSO, one value per step.
struct DeratingProfile {
  std::vector<double> cap_kw;

  static DeratingProfile flat(double rated_kw, std::size_t steps) {
    return DeratingProfile{std::vector<double>(steps, rated_kw)};
  }
  bool operator==(const DeratingProfile&) const = default;
};

struct EconomicsSpec {
  double carbon_price = 0.0;      // EUR/kgCO2eq
  double heat_price = 0.0;        // EUR/kWh_th
  double renewable_target = 0.0;  // S_cap
  double renewable_alpha = 1.0;   // allowed violation probability
  double cvar_alpha = 0.95;
  double cvar_beta = 0.0;
  std::optional<std::vector<double>> tou_tariff;  // EUR/kWh per step

  bool operator==(const EconomicsSpec&) const = default;
};

struct HubSpec {
  DataCenterSpec data_center;
  std::optional<BessSpec> bess;
  std::optional<PvSpec> pv;
  std::optional<OrcCurve> orc;
  PpaContract ppa;
  EconomicsSpec economics;

  bool operator==(const HubSpec&) const = default;
};

struct ExogenousScenario {
  std::vector<double> spot;
  std::vector<double> price_short;
  std::vector<double> price_long;
  std::vector<double> carbon_intensity;
  std::vector<double> renewable_share;
  std::vector<double> ghi;
  std::vector<double> heat_demand;

  bool operator==(const ExogenousScenario&) const = default;
};

/// Per-cluster workload demand, clusters ordered as in DataCenterSpec.
struct ClusterWorkload {
  PerCompute<std::vector<double>> inelastic;  // resource units per step
  PerCompute<double> flexible{};              // resource-hours per day

  bool operator==(const ClusterWorkload&) const = default;
};

struct WorkloadScenario {
  std::vector<ClusterWorkload> clusters;

  bool operator==(const WorkloadScenario&) const = default;
};

struct Scenario {
  ExogenousScenario exogenous;
  WorkloadScenario workload;
  double probability = 0.0;

  bool operator==(const Scenario&) const = default;
};

struct ScenarioSet {
  TimeGrid grid;
  std::vector<Scenario> scenarios;

  std::size_t size() const { return scenarios.size(); }
  bool operator==(const ScenarioSet&) const = default;
};

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (also accepts a missing 'Z' or a space separator).
std::chrono::sys_seconds parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

}  // namespace dchub
