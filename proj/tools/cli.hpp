#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dchub/bidding/bidding.hpp"

namespace dchub::cli {

enum ExitCode : int {
  kOk = 0,
  kVerdictFail = 1,  // validate-derating: profile rejected
  kInputError = 2,
  kInfeasible = 3,
  kSolverFailure = 4,
};

struct ManifestDay {
  std::string date;
  std::filesystem::path scenarios;
  std::filesystem::path realized;
  std::optional<std::filesystem::path> derating;
};

/// Run configuration; relative paths are resolved against the manifest's
/// directory.
struct RunManifest {
  std::filesystem::path hub;
  std::optional<std::filesystem::path> scenario_inputs;
  std::optional<std::filesystem::path> scenarios;
  std::optional<std::filesystem::path> derating;
  std::filesystem::path output_dir = "out";
  std::optional<std::uint64_t> seed;
  PlanOptions plan;
  bool write_lp = false;
  unsigned workers = 1;
  std::vector<ManifestDay> days;
};

RunManifest load_manifest(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dchub::cli
