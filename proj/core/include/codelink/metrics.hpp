#pragma once

#include <cstdint>

namespace codelink {

struct StageTiming {
  double wall_seconds = 0.0;
  std::uint64_t item_count = 0;
  std::uint64_t error_count = 0;

  friend bool operator==(const StageTiming&, const StageTiming&) = default;
};

/// Wall-clock timing and item/error counts per pipeline stage. `overall`
/// spans the whole run, including acquisition and build.
struct StageMetrics {
  StageTiming extraction;
  StageTiming decompilation;
  StageTiming mapping;
  StageTiming export_;
  StageTiming overall;

  friend bool operator==(const StageMetrics&, const StageMetrics&) = default;
};

}  // namespace codelink
