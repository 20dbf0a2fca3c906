#pragma once

#include <cstdint>
#include <vector>

#include "dchub/scenario/combine.hpp"

namespace dchub {

struct KMeansOptions {
  std::size_t max_iterations = 300;
  unsigned threads = 0;  // 0: hardware concurrency, capped at 8
};

struct KMeansResult {
  std::vector<std::size_t> representatives;  // combination index per cluster
  std::vector<std::size_t> populations;
  std::vector<double> probabilities;         // population / total
  std::vector<std::uint32_t> assignment;     // cluster per combination
  std::size_t distinct = 0;               // distinct input vectors
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding on per-dimension z-scores
/// (constant dimensions are left unscaled). Each cluster is represented by
/// the member closest to its centroid, ties to the lowest index.
///
/// Distances are evaluated per parameter group against the group's distinct
/// scenarios, so the cost does not grow with the flattened dimension times
/// the number of combinations. Results do not depend on the thread count.
KMeansResult reduce_kmeans(const CombinationSet& combos, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options = {});

/// Same on explicit vectors.
KMeansResult reduce_kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                           std::uint64_t seed, const KMeansOptions& options = {});

}  // namespace dchub
