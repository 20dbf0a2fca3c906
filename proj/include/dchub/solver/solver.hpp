#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dchub/milp/model.hpp"

namespace dchub {

struct SolveOptions {
  double mip_gap = 1e-4;
  double time_limit = 600.0;  // seconds
  unsigned threads = 1;
  std::uint64_t seed = 0;
  bool native_sos2 = false;  // ask an external backend to use the SOS section
  bool verbose = false;
  /// External backends write their files here; a fresh temporary directory otherwise.
  std::optional<std::filesystem::path> work_dir;
};

enum class SolveStatus { optimal, feasible, infeasible, unbounded, time_limit, error };

std::string_view to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::error;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double solve_time = 0.0;    // seconds, wall clock
  std::vector<double> values;  // indexed by VarId; empty without incumbent
  std::string backend;

  bool has_values() const { return !values.empty(); }
  double value(VarId v) const { return values.at(v.index); }
  std::map<std::string, double> by_name(const MilpModel& model) const;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual bool supports_native_sos2() const = 0;
  /// Raises EnvironmentError when the backend is unavailable and
  /// BackendError when its output cannot be interpreted.
  virtual Solution solve(const MilpModel& model, const SolveOptions& options) = 0;
};

/// Embedded HiGHS. SOS2 sets must be binary encoded.
std::unique_ptr<SolverBackend> make_highs_backend();

/// CBC run as a subprocess on an LP file. The executable is taken from
/// `executable`, else $DCHUB_CBC_PATH, else the path found at build time,
/// else `cbc` on PATH.
std::unique_ptr<SolverBackend> make_cbc_backend(std::optional<std::filesystem::path> executable = std::nullopt);

/// "highs" or "cbc".
std::unique_ptr<SolverBackend> make_backend(std::string_view name);

/// Resolved CBC executable, or nullopt if none can be found.
std::optional<std::filesystem::path> find_cbc_executable();

/// Convenience: solve with a backend chosen by name.
Solution solve(const MilpModel& model, const SolveOptions& options, std::string_view backend = "highs");

}  // namespace dchub
