#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dchub/domain/types.hpp"
#include "dchub/milp/planning.hpp"
#include "dchub/solver/solver.hpp"

namespace dchub {

/// How the per-step VCC is drawn from the scenario usages.
struct VccRule {
  enum class Kind { max, quantile } kind = Kind::max;
  double quantile = 1.0;  // probability level for Kind::quantile
};

/// Probability-weighted rule over `usage[w][t]`; returns one value per step.
/// The quantile rule takes the smallest usage whose cumulative probability
/// reaches the level.
std::vector<double> extract_vcc(const std::vector<std::vector<double>>& usage,
                                const std::vector<double>& probabilities, const VccRule& rule = {});

/// Scenario cost split, EUR unless noted.
struct CostBreakdown {
  double day_ahead = 0.0;
  double imbalance = 0.0;
  double tou_energy = 0.0;
  double bess = 0.0;
  double heat_revenue = 0.0;
  double carbon = 0.0;
  double emissions_kg = 0.0;
  double total = 0.0;  // day_ahead + imbalance + tou_energy + bess - heat_revenue + carbon

  double sum_of_parts() const { return day_ahead + imbalance + tou_energy + bess - heat_revenue + carbon; }
};

/// Values of one scenario keyed by family plus its non-scenario, non-time
/// labels, e.g. "u(c00,CPU)" or "p_gcp"; series follow the step (or edge) axis.
struct ScenarioDispatch {
  std::map<std::string, std::vector<double>> series;

  const std::vector<double>& at(const std::string& key) const;
  bool has(const std::string& key) const { return series.count(key) != 0; }
};

/// Splits a solution by scenario. Scenario-free variables (the day-ahead bid,
/// the CVaR threshold) are copied into every scenario.
std::vector<ScenarioDispatch> split_dispatch(const PlanningModel& pm, const std::vector<double>& values);

std::vector<CostBreakdown> cost_breakdown(const PlanningModel& pm, const std::vector<double>& values,
                                          double carbon_price);

/// Post-solve checks of the physical and contractual invariants, computed
/// from the values only.
struct AuditReport {
  double checker_max_violation = 0.0;
  double balance_residual = 0.0;     // kW
  double heat_residual = 0.0;        // kW
  double exclusivity_product = 0.0;  // max of P_c*P_d and P_+*P_- (kW^2)
  double bess_mean = 0.0;            // probability-weighted sum of P_bess
  double bess_bound_excess = 0.0;    // kWh
  std::size_t sos2_breaches = 0;
  std::vector<std::string> quota_breaches;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

AuditReport audit_solution(const PlanningModel& pm, const HubSpec& spec, const ScenarioSet& scenarios,
                           const std::vector<double>& values, double tol = 1e-6);

struct PlanOptions {
  SolveOptions solve;
  std::string backend = "highs";
  ModelOptions model;
  VccRule vcc;
  /// On infeasibility, probe which chance-constraint relaxation restores
  /// feasibility and put it in the error hint.
  bool triage = true;
};

struct BidResult {
  TimeGrid grid;
  SupplyScheme scheme = SupplyScheme::custom_ppa;
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;
  double gap = 0.0;
  double solve_time = 0.0;
  /// Cleared day-ahead profile. Under ToU there is no bid; this holds the
  /// expected GCP profile instead.
  std::vector<double> day_ahead;
  std::vector<std::string> cluster_ids;
  /// vcc[c][res][t]
  std::vector<PerResource<std::vector<double>>> vcc;
  std::vector<double> probabilities;
  std::vector<ScenarioDispatch> dispatch;
  std::vector<CostBreakdown> breakdown;
  double expected_cost = 0.0;
  double cvar = 0.0;
  double expected_emissions = 0.0;
  AuditReport audit;
};

/// Builds the full planning model, solves it and extracts the bid. Throws
/// InputError on invalid inputs, InfeasibleError (with a relaxation hint) when
/// the model is infeasible and SolverFailure when no incumbent is found.
BidResult plan_day(const HubSpec& spec, const ScenarioSet& scenarios, const DeratingProfile& caps,
                   const PlanOptions& options = {});

/// Extraction step of plan_day: turns an incumbent of `pm` into a BidResult.
BidResult extract_bid(const PlanningModel& pm, const HubSpec& spec, const ScenarioSet& scenarios,
                      const Solution& solution, const VccRule& vcc = {});

/// Probes relaxations in the order renewable, flexible, inelastic (each alone,
/// then all together) and describes the first that makes the model feasible.
std::string infeasibility_hint(const HubSpec& spec, const ScenarioSet& scenarios, const DeratingProfile& caps,
                               const PlanOptions& options);

nlohmann::json to_json(const BidResult& bid, bool with_dispatch = false);
void write_bid_csv(std::ostream& out, const BidResult& bid);
/// `step,CPU,GPU,MEM-CPU,MEM-GPU` for one cluster.
void write_vcc_csv(std::ostream& out, const BidResult& bid, std::size_t cluster);

}  // namespace dchub
