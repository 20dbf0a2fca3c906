#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dchub/domain/types.hpp"
#include "dchub/milp/model.hpp"

namespace dchub {

// Index axes; each maps to a fixed-width label in variable and row names.
enum class Axis { scenario, step, edge, cluster, resource, compute, sample, segment };

/// Dense block of variables indexed by a tuple, row-major.
class Family {
 public:
  Family() = default;
  Family(std::vector<Axis> axes, std::vector<std::size_t> dims, std::vector<VarId> ids)
      : axes_(std::move(axes)), dims_(std::move(dims)), ids_(std::move(ids)) {}

  bool present() const { return !ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<VarId>& ids() const { return ids_; }

  template <class... I>
  VarId operator()(I... idx) const {
    const std::size_t ix[] = {static_cast<std::size_t>(idx)...};
    std::size_t flat = 0;
    for (std::size_t k = 0; k < sizeof...(I); ++k) flat = flat * dims_.at(k) + ix[k];
    return ids_.at(flat);
  }
  VarId scalar() const { return ids_.at(0); }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> dims_;
  std::vector<VarId> ids_;
};

/// One handle family per decision variable of the planning problem.
/// Families of absent assets stay empty.
struct VariableIndex {
  Family u;             // (w, t, c, res)      resource usage, all four resources
  Family v_inelastic;   // (w, t, c, compute)  inelastic CC violation
  Family v_flexible;    // (w, c, compute)     flexible CC violation
  Family p_dc;          // (w, t)
  Family q_rec, q_orc_in, q_sold, q_lost;  // (w, t)
  Family p_orc;         // (w, t)
  Family lambda;        // (w, t, i)           ORC interpolation weights
  Family orc_segment;   // (w, t, j)           binary adjacency encoding only
  Family p_bess_c, p_bess_d, p_bess, p_bess_ac, z_bess, a_bess;  // (w, t)
  Family e_bess;        // (w, 0..T)
  Family p_pv;          // (w, t)
  Family p_gcp;         // (w, t)
  Family p_gcp_import;  // (w, t)              imports-only renewable accounting
  Family p_da;          // (t)
  Family p_imb, p_plus, p_minus, z_imb;    // (w, t)
  Family e_nonren;      // (w, 0..T)
  Family e_dc, v_ren;   // (w)
  Family pi_op, eta;    // (w)                 scenario cost, CVaR excess
  Family zeta;          // ()                  CVaR threshold
};

enum class SupplyScheme { custom_ppa, tou };
enum class Sos2Encoding { native, binary };
/// signed_net: exports reduce the non-renewable tally (as written).
/// imports_only: only positive GCP flow counts.
enum class RenewableAccounting { signed_net, imports_only };
enum class QuotaGranularity { per_index, pooled };

struct CcRelaxation {
  bool renewable = false;
  bool flexible = false;
  bool inelastic = false;

  bool any() const { return renewable || flexible || inelastic; }
};

struct ModelOptions {
  SupplyScheme scheme = SupplyScheme::custom_ppa;
  Sos2Encoding sos2 = Sos2Encoding::binary;
  RenewableAccounting accounting = RenewableAccounting::signed_net;
  QuotaGranularity quotas = QuotaGranularity::per_index;
  CcRelaxation relax;
  /// Freezes the day-ahead profile (ex-post evaluation).
  std::optional<std::vector<double>> fixed_day_ahead;
};

/// Per-scenario cost pieces as linear expressions (EUR, emissions in kg).
struct ScenarioCostParts {
  LinearExpr day_ahead;
  LinearExpr imbalance;
  LinearExpr tou_energy;
  LinearExpr bess_aging;
  LinearExpr heat_revenue;
  LinearExpr emissions_grid;  // kgCO2eq
  LinearExpr emissions_bess;  // kgCO2eq

  /// day_ahead + imbalance + tou_energy + bess_aging - heat_revenue + price * emissions
  LinearExpr total(double carbon_price) const;
};

struct PlanningModel {
  MilpModel model;
  VariableIndex idx;
  std::vector<ScenarioCostParts> costs;
  std::vector<double> probabilities;
  TimeGrid grid;
  std::size_t W = 0, T = 0, C = 0;
  ModelOptions options;

  /// Creates a family named `name(label,...)` with uniform bounds.
  Family add_family(const std::string& name, std::vector<Axis> axes, std::vector<std::size_t> dims,
                    VarKind kind, double lower, double upper);
};

/// Row/variable name label for one index value.
std::string axis_label(Axis axis, std::size_t i);
std::string indexed_name(const std::string& family, std::initializer_list<std::pair<Axis, std::size_t>> idx);

// Block builders. Each appends its variables and rows; dimension mismatches
// raise BuildError. They expect an initialized PlanningModel (see
// begin_planning_model) and must run in this order: workload, power_heat,
// orc, bess, pv, market, heat_market, renewable, [tou], objective.
PlanningModel begin_planning_model(const ScenarioSet& scenarios, std::size_t clusters,
                                   const ModelOptions& options);
void add_workload_block(PlanningModel& pm, const DataCenterSpec& dc, const ScenarioSet& scenarios);
void add_power_heat_block(PlanningModel& pm, const DataCenterSpec& dc, bool with_orc);
void add_orc_block(PlanningModel& pm, const OrcCurve& orc);
void add_bess_block(PlanningModel& pm, const BessSpec& bess);
void add_pv_block(PlanningModel& pm, const PvSpec& pv, const ScenarioSet& scenarios);
void add_market_block(PlanningModel& pm, const PpaContract& ppa, const DeratingProfile& caps,
                      const ScenarioSet& scenarios);
void add_heat_market_block(PlanningModel& pm, const EconomicsSpec& econ, const ScenarioSet& scenarios);
void add_renewable_block(PlanningModel& pm, const EconomicsSpec& econ, const PpaContract& ppa,
                         const ScenarioSet& scenarios);
void add_tou_objective(PlanningModel& pm, const std::vector<double>& tariff);
void add_objective_cvar(PlanningModel& pm, const EconomicsSpec& econ);

/// All blocks for the hub, in order.
PlanningModel build_planning_model(const HubSpec& spec, const ScenarioSet& scenarios,
                                   const DeratingProfile& caps, const ModelOptions& options = {});

/// Exact CVaR of a discrete distribution: mean of the worst (1 - alpha)
/// probability mass, splitting the boundary atom.
double discrete_cvar(const std::vector<double>& costs, const std::vector<double>& probabilities,
                     double alpha);

}  // namespace dchub
