#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dchub/bidding/bidding.hpp"

namespace dchub {

/// Realized exogenous data and workload of one day.
struct RealizedDay {
  std::string date;  // label used in reports, e.g. "2025-07-18"
  ExogenousScenario exogenous;
  WorkloadScenario workload;
};

struct DayOutcome {
  std::string date;
  std::string scheme;
  SolveStatus status = SolveStatus::error;
  double cost = 0.0;              // realized operating cost, EUR
  double emissions = 0.0;         // kgCO2eq
  double renewable_share = 0.0;   // 1 - non-renewable / consumed energy
  double imbalance_energy = 0.0;  // kWh, short plus long
  double ex_ante_cost = 0.0;      // expected cost of the plan that produced the bid
  double ex_ante_emissions = 0.0;
  CostBreakdown breakdown;
  ScenarioDispatch dispatch;
};

struct ExpostOptions {
  SolveOptions solve;
  std::string backend = "highs";
  /// Structural choices shared with planning (accounting, SOS2 encoding).
  ModelOptions model;
};

/// Single-scenario model with probability 1. Under the custom PPA the
/// day-ahead profile is frozen to `bid.day_ahead`; under ToU there is no bid.
/// Chance-constraint quotas keep their planning right-hand sides, which with
/// one scenario makes a constraint hard unless its quota is at least 1.
/// Throws InfeasibleError naming the constraint family whose relaxation
/// restores feasibility.
DayOutcome expost_reoptimize(const HubSpec& spec, const BidResult& bid, const RealizedDay& realized,
                             const DeratingProfile& caps, const ExpostOptions& options = {});

/// Q25 and Q75 use linear interpolation between order statistics (type 7);
/// sigma is the population standard deviation.
struct Summary {
  double q25 = 0.0;
  double mean = 0.0;
  double q75 = 0.0;
  double sigma = 0.0;
};

Summary summarize_values(std::vector<double> values);

struct EvaluationReport {
  std::string scheme;
  std::vector<DayOutcome> days;
  /// Keys: ex_post_cost, ex_ante_cost, ex_post_emissions, ex_ante_emissions,
  /// renewable_share, imbalance_energy.
  std::map<std::string, Summary> summary;
};

EvaluationReport summarize(const std::vector<DayOutcome>& outcomes, const std::string& scheme = {});

/// One day of a batch study: planning scenarios and the realization.
struct StudyDay {
  std::string date;
  ScenarioSet scenarios;
  RealizedDay realized;
  DeratingProfile caps;
};

struct SchemeComparison {
  std::vector<EvaluationReport> reports;  // ToU, Custom, Custom no WL flex
  double delta_cost_pct = 0.0;            // Custom vs ToU, mean ex-post cost
  double delta_emissions_pct = 0.0;       // Custom vs ToU, mean ex-post emissions
  double flex_value_eur = 0.0;            // mean ex-post cost: no WL flex minus Custom
};

struct CompareOptions {
  PlanOptions plan;
  unsigned workers = 1;  // days evaluated concurrently
  bool include_tou = true;
  bool include_no_flex = true;
};

/// Plans and evaluates every day under each scheme with identical scenario
/// inputs. "Custom no WL flex" folds all flexible demand uniformly into the
/// inelastic series of both the scenarios and the realization.
SchemeComparison compare_schemes(const HubSpec& spec, const std::vector<StudyDay>& days,
                                 const CompareOptions& options = {});

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown for the lowest failing index.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

void write_outcomes_csv(std::ostream& out, const std::vector<EvaluationReport>& reports);
nlohmann::json to_json(const SchemeComparison& cmp);
nlohmann::json to_json(const EvaluationReport& report);

}  // namespace dchub
