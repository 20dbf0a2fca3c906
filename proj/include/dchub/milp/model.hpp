#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dchub {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct VarId {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();

  bool valid() const { return index != std::numeric_limits<std::uint32_t>::max(); }
  friend bool operator==(VarId a, VarId b) { return a.index == b.index; }
  friend bool operator<(VarId a, VarId b) { return a.index < b.index; }
};

enum class VarKind { continuous, binary };
enum class RowSense { le, eq, ge };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

/// Sum of terms plus a constant. Duplicate variables are allowed while
/// building; they are merged when the expression enters a model.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(double constant) : constant_(constant) {}

  LinearExpr& add(VarId v, double coef) {
    if (coef != 0.0) terms_.push_back({v, coef});
    return *this;
  }
  LinearExpr& add(const LinearExpr& other, double scale = 1.0);
  LinearExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  /// Terms sorted by variable with duplicates summed and zeros dropped.
  std::vector<Term> merged() const;
  double evaluate(const std::vector<double>& values) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

struct LinearConstraint {
  std::string name;
  std::vector<Term> terms;  // merged, sorted by variable
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

/// Ordered SOS2 set over continuous variables. `binary_encoded` marks sets
/// whose adjacency is also enforced by explicit segment binaries, so a
/// writer may omit the native section.
struct Sos2Set {
  std::string name;
  std::vector<VarId> members;
  std::vector<double> weights;  // strictly increasing reference row
  bool binary_encoded = false;
};

struct Objective {
  std::vector<Term> terms;
  double constant = 0.0;
};

/// Solver-agnostic MILP (minimization).
class MilpModel {
 public:
  VarId add_variable(std::string name, VarKind kind, double lower, double upper);
  void set_bounds(VarId v, double lower, double upper);
  void fix(VarId v, double value) { set_bounds(v, value, value); }

  /// The expression's constant moves to the right-hand side.
  std::size_t add_constraint(std::string name, const LinearExpr& expr, RowSense sense, double rhs);
  void set_rhs(std::size_t row, double rhs) { constraints_.at(row).rhs = rhs; }
  void add_sos2(std::string name, std::vector<VarId> members, std::vector<double> weights,
                bool binary_encoded);
  void set_objective(const LinearExpr& expr);

  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(VarId v) const { return variables_.at(v.index); }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const std::vector<Sos2Set>& sos2_sets() const { return sos2_; }
  const Objective& objective() const { return objective_; }

  std::optional<VarId> find_variable(std::string_view name) const;
  std::optional<std::size_t> find_constraint(std::string_view name) const;
  std::size_t count_binaries() const;
  /// Number of rows whose name starts with `prefix` followed by '(' or end.
  std::size_t count_rows(std::string_view family) const;
  std::size_t count_variables(std::string_view family) const;

 private:
  std::vector<Variable> variables_;
  std::vector<LinearConstraint> constraints_;
  std::vector<Sos2Set> sos2_;
  Objective objective_;
  std::unordered_map<std::string, std::uint32_t> var_names_;
  std::unordered_map<std::string, std::size_t> row_names_;
};

/// Family prefix of a name such as "u(w000,t00,c00,CPU)" -> "u".
std::string_view family_of(std::string_view name);

}  // namespace dchub
