#include "dchub/scenario/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "dchub/domain/errors.hpp"
#include "dchub/scenario/rng.hpp"

namespace dchub {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::uint64_t kInitStream = 0x6b6d65616e73ULL;

// Runs fn(chunk, begin, end) over fixed-size chunks. Chunk boundaries do not
// depend on the worker count, so per-chunk partial results merged in chunk
// order are reproducible.
template <class Fn>
void for_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  auto run = [&](unsigned w) {
    for (std::size_t c = w; c < chunks; c += std::max(workers, 1u)) {
      fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    }
  };
  if (workers <= 1) {
    run(0);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
}

struct Space {
  const CombinationSet& set;
  std::size_t n, G;
  std::vector<std::size_t> sizes, dims;          // per group: scenario count, dimension
  std::vector<std::vector<double>> z;            // per group: sizes[g] x dims[g], row-major
};

Space standardize(const CombinationSet& set) {
  Space sp{set, set.size(), set.group_count(), {}, {}, {}};
  for (std::size_t g = 0; g < sp.G; ++g) {
    const auto& grp = set.groups()[g];
    const std::size_t S = grp.scenarios.size(), D = grp.dim();
    std::vector<double> count(S, 0.0);
    for (std::size_t i = 0; i < sp.n; ++i) count[set.pick(i, g)] += 1.0;
    std::vector<double> z(S * D);
    for (std::size_t d = 0; d < D; ++d) {
      bool constant = true;
      double ref = 0.0;
      bool have_ref = false;
      for (std::size_t s = 0; s < S; ++s) {
        if (count[s] == 0.0) continue;
        if (!have_ref) {
          ref = grp.scenarios[s][d];
          have_ref = true;
        } else if (grp.scenarios[s][d] != ref) {
          constant = false;
        }
      }
      double mean = 0.0, var = 0.0;
      if (!constant) {
        for (std::size_t s = 0; s < S; ++s) mean += count[s] * grp.scenarios[s][d];
        mean /= double(sp.n);
        for (std::size_t s = 0; s < S; ++s) {
          const double e = grp.scenarios[s][d] - mean;
          var += count[s] * e * e;
        }
        var /= double(sp.n);
      }
      const double sd = std::sqrt(var);
      for (std::size_t s = 0; s < S; ++s) {
        const double x = grp.scenarios[s][d];
        z[s * D + d] = (constant || sd == 0.0) ? x : (x - mean) / sd;
      }
    }
    sp.sizes.push_back(S);
    sp.dims.push_back(D);
    sp.z.push_back(std::move(z));
  }
  return sp;
}

using Centroid = std::vector<std::vector<double>>;  // per group

Centroid centroid_of(const Space& sp, std::size_t i) {
  Centroid c(sp.G);
  for (std::size_t g = 0; g < sp.G; ++g) {
    const double* row = &sp.z[g][sp.set.pick(i, g) * sp.dims[g]];
    c[g].assign(row, row + sp.dims[g]);
  }
  return c;
}

// table[g][s * K + k]: squared distance of group scenario s to centroid k.
std::vector<std::vector<double>> distance_tables(const Space& sp, const std::vector<Centroid>& cs) {
  const std::size_t K = cs.size();
  std::vector<std::vector<double>> table(sp.G);
  for (std::size_t g = 0; g < sp.G; ++g) {
    const std::size_t D = sp.dims[g];
    table[g].resize(sp.sizes[g] * K);
    for (std::size_t s = 0; s < sp.sizes[g]; ++s) {
      const double* zs = &sp.z[g][s * D];
      for (std::size_t k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          const double e = zs[d] - cs[k][g][d];
          acc += e * e;
        }
        table[g][s * K + k] = acc;
      }
    }
  }
  return table;
}

double distance(const Space& sp, const std::vector<std::vector<double>>& table, std::size_t K,
                std::size_t i, std::size_t k) {
  double acc = 0.0;
  for (std::size_t g = 0; g < sp.G; ++g) acc += table[g][sp.set.pick(i, g) * K + k];
  return acc;
}

std::vector<Centroid> seed_plus_plus(const Space& sp, std::size_t K, std::uint64_t seed,
                                     unsigned threads) {
  std::vector<Centroid> centers;
  std::vector<double> mind(sp.n, std::numeric_limits<double>::infinity());
  std::size_t first = uniform_index(counter_hash(seed, kInitStream, 0), sp.n);
  centers.push_back(centroid_of(sp, first));
  const std::size_t chunks = (sp.n + kChunk - 1) / kChunk;
  std::vector<double> chunk_sum(chunks);
  for (std::size_t j = 1; j <= K; ++j) {
    const auto table = distance_tables(sp, {centers.back()});
    for_chunks(sp.n, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
      double sum = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        mind[i] = std::min(mind[i], distance(sp, table, 1, i, 0));
        sum += mind[i];
      }
      chunk_sum[c] = sum;
    });
    if (j == K) break;
    const double total = std::accumulate(chunk_sum.begin(), chunk_sum.end(), 0.0);
    if (!(total > 0.0)) throw InputError("k-means seeding ran out of distinct combinations");
    const double target = uniform_unit(counter_hash(seed, kInitStream, j)) * total;
    std::size_t c = 0;
    double cum = 0.0;
    while (c < chunks && cum + chunk_sum[c] <= target) cum += chunk_sum[c++];
    std::size_t chosen = sp.n;
    if (c < chunks) {
      for (std::size_t i = c * kChunk; i < std::min(sp.n, (c + 1) * kChunk); ++i) {
        if (mind[i] <= 0.0) continue;
        chosen = i;
        cum += mind[i];
        if (cum > target) break;
      }
    }
    // Rounding at the upper end: fall back to the last candidate.
    for (std::size_t i = sp.n; chosen == sp.n && i-- > 0;) {
      if (mind[i] > 0.0) chosen = i;
    }
    centers.push_back(centroid_of(sp, chosen));
  }
  return centers;
}

}  // namespace

KMeansResult reduce_kmeans(const CombinationSet& combos, std::size_t K, std::uint64_t seed,
                           const KMeansOptions& options) {
  const std::size_t n = combos.size();
  if (K == 0) throw InputError("k must be >= 1");
  if (n == 0) throw InputError("no combinations to cluster");
  const std::size_t distinct = count_distinct(combos);
  if (K > distinct) {
    throw InputError("k = " + std::to_string(K) + " exceeds the " + std::to_string(distinct) +
                     " distinct combinations");
  }
  unsigned threads = options.threads;
  if (threads == 0) threads = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);

  const Space sp = standardize(combos);
  std::vector<Centroid> centers = seed_plus_plus(sp, K, seed, threads);

  KMeansResult res;
  res.distinct = distinct;
  res.assignment.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  // counts[k][offset_g + s]: members of cluster k picking scenario s of group g.
  std::vector<std::size_t> offset(sp.G + 1, 0);
  for (std::size_t g = 0; g < sp.G; ++g) offset[g + 1] = offset[g] + sp.sizes[g];
  const std::size_t W = offset[sp.G];

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const auto table = distance_tables(sp, centers);
    std::vector<std::size_t> changed(chunks, 0);
    for_chunks(n, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        std::uint32_t best = 0;
        double bd = distance(sp, table, K, i, 0);
        for (std::size_t k = 1; k < K; ++k) {
          const double d = distance(sp, table, K, i, k);
          if (d < bd) {
            bd = d;
            best = static_cast<std::uint32_t>(k);
          }
        }
        if (res.assignment[i] != best) ++changed[c];
        res.assignment[i] = best;
        dist[i] = bd;
      }
    });
    res.iterations = iter + 1;
    const bool stable = std::accumulate(changed.begin(), changed.end(), std::size_t{0}) == 0;

    std::vector<std::size_t> counts(K * W, 0);
    std::vector<std::size_t> pop(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = res.assignment[i];
      ++pop[k];
      for (std::size_t g = 0; g < sp.G; ++g) ++counts[k * W + offset[g] + combos.pick(i, g)];
    }
    bool reseeded = false;
    for (std::size_t k = 0; k < K; ++k) {
      if (pop[k] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (pop[res.assignment[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      const std::size_t old = res.assignment[far];
      --pop[old];
      for (std::size_t g = 0; g < sp.G; ++g) --counts[old * W + offset[g] + combos.pick(far, g)];
      res.assignment[far] = static_cast<std::uint32_t>(k);
      dist[far] = 0.0;
      pop[k] = 1;
      for (std::size_t g = 0; g < sp.G; ++g) ++counts[k * W + offset[g] + combos.pick(far, g)];
      reseeded = true;
    }
    if (stable && !reseeded && iter > 0) {
      res.converged = true;
      break;
    }
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t g = 0; g < sp.G; ++g) {
        auto& cg = centers[k][g];
        std::fill(cg.begin(), cg.end(), 0.0);
        const std::size_t D = sp.dims[g];
        for (std::size_t s = 0; s < sp.sizes[g]; ++s) {
          const std::size_t m = counts[k * W + offset[g] + s];
          if (m == 0) continue;
          for (std::size_t d = 0; d < D; ++d) cg[d] += double(m) * sp.z[g][s * D + d];
        }
        for (double& v : cg) v /= double(pop[k]);
      }
    }
  }

  // Representatives against the final centroids.
  const auto table = distance_tables(sp, centers);
  res.representatives.assign(K, n);
  std::vector<double> best(K, std::numeric_limits<double>::infinity());
  res.populations.assign(K, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = res.assignment[i];
    ++res.populations[k];
    const double d = distance(sp, table, K, i, k);
    if (d < best[k]) {
      best[k] = d;
      res.representatives[k] = i;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    res.probabilities.push_back(double(res.populations[k]) / double(n));
  }
  return res;
}

KMeansResult reduce_kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                           std::uint64_t seed, const KMeansOptions& options) {
  std::vector<std::uint32_t> picks(points.size());
  std::iota(picks.begin(), picks.end(), 0u);
  CombinationSet set({ParameterGroup{"points", points}}, std::move(picks));
  return reduce_kmeans(set, k, seed, options);
}

}  // namespace dchub
