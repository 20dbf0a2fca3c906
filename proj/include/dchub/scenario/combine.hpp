#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dchub {

/// Scenarios of one stochastic parameter group, each flattened to `dim` values.
struct ParameterGroup {
  std::string name;
  std::vector<std::vector<double>> scenarios;

  std::size_t dim() const { return scenarios.empty() ? 0 : scenarios.front().size(); }
};

/// Combinations stored by index: row i picks one scenario per group. The
/// flattened vector of a combination is the concatenation of the picked
/// group scenarios in group order; it is materialized only on request.
class CombinationSet {
 public:
  CombinationSet() = default;
  CombinationSet(std::vector<ParameterGroup> groups, std::vector<std::uint32_t> picks);

  std::size_t size() const { return groups_.empty() ? 0 : picks_.size() / groups_.size(); }
  std::size_t group_count() const { return groups_.size(); }
  std::size_t dim() const;
  const std::vector<ParameterGroup>& groups() const { return groups_; }
  std::uint32_t pick(std::size_t combo, std::size_t group) const {
    return picks_[combo * groups_.size() + group];
  }
  std::vector<double> vector(std::size_t combo) const;

 private:
  std::vector<ParameterGroup> groups_;
  std::vector<std::uint32_t> picks_;
};

/// Draws n_combos combinations, picking each group's scenario independently
/// and uniformly. Pick (i, g) depends only on (seed, g, i).
CombinationSet combine_scenarios(std::vector<ParameterGroup> groups, std::size_t n_combos,
                                 std::uint64_t seed);

/// Number of distinct flattened vectors in the set.
std::size_t count_distinct(const CombinationSet& set);

}  // namespace dchub
