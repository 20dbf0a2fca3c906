#include "dchub/milp/model.hpp"

#include <algorithm>
#include <cmath>

#include "dchub/domain/errors.hpp"

namespace dchub {

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
  for (const auto& t : other.terms_) add(t.var, t.coef * scale);
  constant_ += other.constant_ * scale;
  return *this;
}

std::vector<Term> LinearExpr::merged() const {
  std::vector<Term> out = terms_;
  std::stable_sort(out.begin(), out.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (w > 0 && out[w - 1].var == out[r].var) {
      out[w - 1].coef += out[r].coef;
    } else {
      out[w++] = out[r];
    }
  }
  out.resize(w);
  std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
  return out;
}

double LinearExpr::evaluate(const std::vector<double>& values) const {
  double acc = constant_;
  for (const auto& t : terms_) acc += t.coef * values.at(t.var.index);
  return acc;
}

VarId MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw BuildError("variable " + name + ": invalid bounds");
  }
  if (kind == VarKind::binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  const VarId id{static_cast<std::uint32_t>(variables_.size())};
  if (!var_names_.emplace(name, id.index).second) throw BuildError("duplicate variable name " + name);
  variables_.push_back({std::move(name), kind, lower, upper});
  return id;
}

void MilpModel::set_bounds(VarId v, double lower, double upper) {
  auto& var = variables_.at(v.index);
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw BuildError("variable " + var.name + ": invalid bounds");
  }
  var.lower = lower;
  var.upper = upper;
}

std::size_t MilpModel::add_constraint(std::string name, const LinearExpr& expr, RowSense sense,
                                      double rhs) {
  LinearConstraint row;
  row.terms = expr.merged();
  for (const auto& t : row.terms) {
    if (t.var.index >= variables_.size()) throw BuildError("constraint " + name + " references an undeclared variable");
    if (!std::isfinite(t.coef)) throw BuildError("constraint " + name + " has a non-finite coefficient");
  }
  row.sense = sense;
  row.rhs = rhs - expr.constant();
  if (!std::isfinite(row.rhs)) throw BuildError("constraint " + name + " has a non-finite right-hand side");
  const std::size_t index = constraints_.size();
  if (!row_names_.emplace(name, index).second) throw BuildError("duplicate constraint name " + name);
  row.name = std::move(name);
  constraints_.push_back(std::move(row));
  return index;
}

void MilpModel::add_sos2(std::string name, std::vector<VarId> members, std::vector<double> weights,
                         bool binary_encoded) {
  if (members.size() != weights.size()) throw BuildError("SOS2 set " + name + ": weight count mismatch");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (variable(members[i]).kind != VarKind::continuous) {
      throw BuildError("SOS2 set " + name + " references a non-continuous variable");
    }
    if (i > 0 && !(weights[i] > weights[i - 1])) {
      throw BuildError("SOS2 set " + name + ": weights must be strictly increasing");
    }
  }
  sos2_.push_back({std::move(name), std::move(members), std::move(weights), binary_encoded});
}

void MilpModel::set_objective(const LinearExpr& expr) {
  objective_.terms = expr.merged();
  objective_.constant = expr.constant();
}

std::optional<VarId> MilpModel::find_variable(std::string_view name) const {
  auto it = var_names_.find(std::string(name));
  if (it == var_names_.end()) return std::nullopt;
  return VarId{it->second};
}

std::optional<std::size_t> MilpModel::find_constraint(std::string_view name) const {
  auto it = row_names_.find(std::string(name));
  if (it == row_names_.end()) return std::nullopt;
  return it->second;
}

std::size_t MilpModel::count_binaries() const {
  return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                [](const Variable& v) { return v.kind == VarKind::binary; }));
}

std::string_view family_of(std::string_view name) { return name.substr(0, name.find('(')); }

std::size_t MilpModel::count_rows(std::string_view family) const {
  return static_cast<std::size_t>(std::count_if(constraints_.begin(), constraints_.end(),
                                                [&](const LinearConstraint& r) { return family_of(r.name) == family; }));
}

std::size_t MilpModel::count_variables(std::string_view family) const {
  return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                [&](const Variable& v) { return family_of(v.name) == family; }));
}

}  // namespace dchub
