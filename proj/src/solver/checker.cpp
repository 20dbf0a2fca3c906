#include "dchub/solver/checker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dchub/domain/errors.hpp"

namespace dchub {

std::string CheckReport::summary(std::size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << violations.size() << " violation(s), max " << max_violation;
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i)
    os << "\n  " << violations[i].what << " by " << violations[i].amount;
  return os.str();
}

CheckReport check_solution(const MilpModel& model, const std::vector<double>& x, double tol) {
  if (x.size() != model.variables().size())
    throw InputError("solution has " + std::to_string(x.size()) + " values, model has " +
                     std::to_string(model.variables().size()) + " variables");
  CheckReport rep;
  auto flag = [&](std::string what, double amount) {
    if (amount > tol || std::isnan(amount)) {
      rep.violations.push_back({std::move(what), amount});
      rep.max_violation = std::max(rep.max_violation, std::isnan(amount) ? kInf : amount);
    }
  };

  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = model.variables()[j];
    const double xj = x[j];
    if (!std::isfinite(xj)) {
      flag(v.name + " not finite", kInf);
      continue;
    }
    flag(v.name + " below lower bound", v.lower - xj);
    flag(v.name + " above upper bound", xj - v.upper);
    if (v.kind == VarKind::binary) flag(v.name + " not integral", std::abs(xj - std::round(xj)));
  }

  for (const auto& r : model.constraints()) {
    double lhs = 0.0;
    for (const auto& t : r.terms) lhs += t.coef * x[t.var.index];
    double excess = 0.0;
    switch (r.sense) {
      case RowSense::le: excess = lhs - r.rhs; break;
      case RowSense::ge: excess = r.rhs - lhs; break;
      case RowSense::eq: excess = std::abs(lhs - r.rhs); break;
    }
    flag("row " + r.name, excess);
  }

  // SOS2: at most two nonzero members, and they must be consecutive.
  for (const auto& s : model.sos2_sets()) {
    std::size_t first = s.members.size(), last = 0, count = 0;
    for (std::size_t k = 0; k < s.members.size(); ++k) {
      if (std::abs(x[s.members[k].index]) <= tol) continue;
      first = std::min(first, k);
      last = k;
      ++count;
    }
    if (count > 2 || (count == 2 && last != first + 1)) {
      double mass = 0.0;
      for (std::size_t k = 0; k < s.members.size(); ++k)
        if (k > first + 1) mass += std::abs(x[s.members[k].index]);
      flag("sos2 " + s.name + " adjacency", std::max(mass, 2 * tol));
    }
  }

  rep.objective = model.objective().constant;
  for (const auto& t : model.objective().terms) rep.objective += t.coef * x[t.var.index];
  return rep;
}

}  // namespace dchub
