#include "dchub/scenario/combine.hpp"

#include <algorithm>
#include <map>

#include "dchub/domain/errors.hpp"
#include "dchub/scenario/rng.hpp"

namespace dchub {

CombinationSet::CombinationSet(std::vector<ParameterGroup> groups, std::vector<std::uint32_t> picks)
    : groups_(std::move(groups)), picks_(std::move(picks)) {
  if (groups_.empty()) throw InputError("combination set needs at least one parameter group");
  if (picks_.size() % groups_.size() != 0) throw InputError("pick table does not match group count");
  for (const auto& g : groups_) {
    if (g.scenarios.empty()) throw InputError("parameter group '" + g.name + "' has no scenarios");
    for (const auto& s : g.scenarios) {
      if (s.size() != g.dim()) throw InputError("parameter group '" + g.name + "' has ragged scenarios");
    }
  }
  for (std::size_t i = 0; i < picks_.size(); ++i) {
    if (picks_[i] >= groups_[i % groups_.size()].scenarios.size()) {
      throw InputError("pick out of range for group '" + groups_[i % groups_.size()].name + "'");
    }
  }
}

std::size_t CombinationSet::dim() const {
  std::size_t d = 0;
  for (const auto& g : groups_) d += g.dim();
  return d;
}

std::vector<double> CombinationSet::vector(std::size_t combo) const {
  std::vector<double> out;
  out.reserve(dim());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& s = groups_[g].scenarios[pick(combo, g)];
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

CombinationSet combine_scenarios(std::vector<ParameterGroup> groups, std::size_t n_combos,
                                 std::uint64_t seed) {
  if (n_combos == 0) throw InputError("n_combos must be >= 1");
  const std::size_t G = groups.size();
  std::vector<std::uint32_t> picks(n_combos * G);
  for (std::size_t i = 0; i < n_combos; ++i) {
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t n = groups[g].scenarios.size();
      picks[i * G + g] = n == 0 ? 0 : static_cast<std::uint32_t>(uniform_index(counter_hash(seed, g, i), n));
    }
  }
  return CombinationSet(std::move(groups), std::move(picks));
}

std::size_t count_distinct(const CombinationSet& set) {
  // Identical scenarios inside a group collapse to one canonical id first.
  const std::size_t G = set.group_count();
  std::vector<std::vector<std::uint32_t>> canon(G);
  for (std::size_t g = 0; g < G; ++g) {
    const auto& sc = set.groups()[g].scenarios;
    std::map<std::vector<double>, std::uint32_t> first;
    for (std::uint32_t s = 0; s < sc.size(); ++s) {
      canon[g].push_back(first.emplace(sc[s], s).first->second);
    }
  }
  std::vector<std::vector<std::uint32_t>> keys(set.size(), std::vector<std::uint32_t>(G));
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t g = 0; g < G; ++g) keys[i][g] = canon[g][set.pick(i, g)];
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace dchub
