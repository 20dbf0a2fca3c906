#pragma once

#include <filesystem>
#include <string>

#include "dchub/milp/model.hpp"

namespace dchub {

enum class InterchangeFormat { lp, mps };

struct WriteOptions {
  /// Emit an SOS section for SOS2 sets (LP only). Sets that are not binary
  /// encoded always need it; writing them without it raises SerializationError.
  bool native_sos2 = false;
};

/// Both formats cap names at 255 characters. Truncation that makes two
/// names equal raises SerializationError naming the offenders.
inline constexpr std::size_t kMaxNameLength = 255;

std::string write_interchange(const MilpModel& model, InterchangeFormat format, const WriteOptions& options = {});
void write_interchange_file(const MilpModel& model, const std::filesystem::path& path, InterchangeFormat format,
                            const WriteOptions& options = {});

}  // namespace dchub
