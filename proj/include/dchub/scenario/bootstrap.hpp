#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dchub {

/// Past forecast residuals, one row per day, in the units of the target series.
struct ResidualHistory {
  std::vector<std::vector<double>> residuals;

  std::size_t days() const { return residuals.size(); }
  std::size_t steps() const { return residuals.empty() ? 0 : residuals.front().size(); }
};

/// Physical domain a bootstrapped series is clamped to.
enum class SeriesDomain { unbounded, nonnegative, unit_interval };

/// Adds whole-day residual rows, drawn uniformly with replacement, to the
/// point forecast. Draw i of a call depends only on (seed, stream, i).
std::vector<std::vector<double>> bootstrap_scenarios(const std::vector<double>& point_forecast,
                                                     const ResidualHistory& history, std::size_t n,
                                                     std::uint64_t seed,
                                                     SeriesDomain domain = SeriesDomain::unbounded,
                                                     std::uint64_t stream = 0);

/// Reads a residual history CSV, either wide (`[date,]s0,s1,...`, one row per
/// day) or long (`date,hour,value`, hour in 0..steps-1). `steps` is the
/// required row length.
ResidualHistory read_residual_history(const std::filesystem::path& path, std::size_t steps);

}  // namespace dchub
