#include <chrono>
#include <cmath>

#include "Highs.h"
#include "dchub/domain/errors.hpp"
#include "dchub/solver/solver.hpp"

namespace dchub {

namespace {

class HighsBackend final : public SolverBackend {
 public:
  std::string name() const override { return "highs"; }
  bool supports_native_sos2() const override { return false; }
  Solution solve(const MilpModel& model, const SolveOptions& options) override;
};

void set_option(Highs& h, const std::string& key, auto value) {
  if (h.setOptionValue(key, value) != HighsStatus::kOk)
    throw EnvironmentError("HiGHS rejected option " + key);
}

Solution HighsBackend::solve(const MilpModel& model, const SolveOptions& options) {
  for (const auto& s : model.sos2_sets())
    if (!s.binary_encoded)
      throw EnvironmentError("HiGHS has no SOS2 support; set " + s.name + " must be binary encoded");

  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  const auto nc = static_cast<HighsInt>(vars.size());
  const auto nr = static_cast<HighsInt>(rows.size());

  std::vector<double> cost(vars.size(), 0.0), lo(vars.size()), hi(vars.size());
  std::vector<HighsInt> integrality(vars.size(), 0);
  for (const auto& t : model.objective().terms) cost[t.var.index] += t.coef;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    lo[j] = vars[j].lower == -kInf ? -kHighsInf : vars[j].lower;
    hi[j] = vars[j].upper == kInf ? kHighsInf : vars[j].upper;
    integrality[j] = vars[j].kind == VarKind::binary ? 1 : 0;
  }
  std::vector<double> rlo(rows.size()), rhi(rows.size());
  std::vector<HighsInt> start{0}, index;
  std::vector<double> value;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    rlo[i] = r.sense == RowSense::le ? -kHighsInf : r.rhs;
    rhi[i] = r.sense == RowSense::ge ? kHighsInf : r.rhs;
    for (const auto& t : r.terms) {
      index.push_back(static_cast<HighsInt>(t.var.index));
      value.push_back(t.coef);
    }
    start.push_back(static_cast<HighsInt>(index.size()));
  }

  Highs h;
  set_option(h, "output_flag", options.verbose);
  set_option(h, "mip_rel_gap", options.mip_gap);
  set_option(h, "time_limit", options.time_limit);
  set_option(h, "random_seed", static_cast<HighsInt>(options.seed % 2147483647));
  set_option(h, "mip_feasibility_tolerance", 1e-7);
  set_option(h, "primal_feasibility_tolerance", 1e-8);
  if (options.threads > 0) set_option(h, "threads", static_cast<HighsInt>(options.threads));

  bool any_int = false;
  for (auto k : integrality) any_int = any_int || k != 0;
  const auto st = h.passModel(nc, nr, static_cast<HighsInt>(index.size()), 2 /* row-wise */, 1 /* minimize */,
                              model.objective().constant, cost.data(), lo.data(), hi.data(), rlo.data(),
                              rhi.data(), start.data(), index.data(), value.data(),
                              any_int ? integrality.data() : nullptr);
  if (st == HighsStatus::kError) throw BackendError("HiGHS rejected the model", {});

  const auto t0 = std::chrono::steady_clock::now();
  const auto run = h.run();
  Solution sol;
  sol.backend = name();
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (run == HighsStatus::kError && h.getModelStatus() == HighsModelStatus::kNotset)
    throw BackendError("HiGHS run failed", {});

  const auto& info = h.getInfo();
  const bool has_sol = info.primal_solution_status == kSolutionStatusFeasible;
  switch (h.getModelStatus()) {
    case HighsModelStatus::kOptimal: sol.status = SolveStatus::optimal; break;
    case HighsModelStatus::kInfeasible:
    case HighsModelStatus::kUnboundedOrInfeasible: sol.status = SolveStatus::infeasible; break;
    case HighsModelStatus::kUnbounded: sol.status = SolveStatus::unbounded; break;
    case HighsModelStatus::kTimeLimit: sol.status = SolveStatus::time_limit; break;
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kInterrupt: sol.status = has_sol ? SolveStatus::feasible : SolveStatus::error; break;
    default: sol.status = SolveStatus::error; break;
  }
  if (has_sol && sol.status != SolveStatus::infeasible && sol.status != SolveStatus::unbounded) {
    sol.values = h.getSolution().col_value;
    sol.objective = info.objective_function_value;
    sol.gap = any_int ? info.mip_gap : 0.0;
  }
  return sol;
}

}  // namespace

std::unique_ptr<SolverBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace dchub
