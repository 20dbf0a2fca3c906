#include "dchub/solver/solver.hpp"

#include "dchub/domain/errors.hpp"

namespace dchub {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::error: return "error";
  }
  return "error";
}

std::map<std::string, double> Solution::by_name(const MilpModel& model) const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < values.size() && j < model.variables().size(); ++j)
    out.emplace(model.variables()[j].name, values[j]);
  return out;
}

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
  if (name == "highs") return make_highs_backend();
  if (name == "cbc") return make_cbc_backend();
  throw InputError("unknown solver backend '" + std::string(name) + "' (expected highs or cbc)");
}

Solution solve(const MilpModel& model, const SolveOptions& options, std::string_view backend) {
  return make_backend(backend)->solve(model, options);
}

}  // namespace dchub
