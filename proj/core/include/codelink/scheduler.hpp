#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "codelink/metrics.hpp"

namespace codelink {

/// One unit of work in the task graph. The body returns false for a
/// non-fatal failure (recorded; dependents still run) and throws for a
/// fatal one (dependents are skipped transitively).
struct Task {
  std::string id;
  std::string stage;  // "extraction", "decompilation", "mapping", "export", ...
  std::function<bool()> body;
  std::vector<std::size_t> deps;
};

struct TaskGraph {
  std::vector<Task> tasks;

  std::size_t add(std::string id, std::string stage, std::function<bool()> body,
                  std::vector<std::size_t> deps = {}) {
    tasks.push_back({std::move(id), std::move(stage), std::move(body), std::move(deps)});
    return tasks.size() - 1;
  }
};

enum class TaskStatus { ok, failed, skipped };

std::string_view to_string(TaskStatus status);

struct TraceEvent {
  std::string task_id;
  std::string stage;
  std::uint64_t start_ns = 0;  // relative to an arbitrary per-run origin
  std::uint64_t end_ns = 0;
  TaskStatus status = TaskStatus::ok;
  std::string error;  // message of a thrown fatal error
};

/// Runs every task exactly once after its dependencies, with at most
/// `workers` tasks in flight. The returned trace is ordered by task index
/// (deterministic regardless of completion order). Throws CycleDetected.
std::vector<TraceEvent> schedule(const TaskGraph& graph, unsigned workers);

/// Per-stage wall time as (max end - min start) over that stage's tasks;
/// item_count is the task count and error_count the non-ok count. The
/// `overall` entry spans every task in the trace.
StageMetrics collect_metrics(const std::vector<TraceEvent>& trace);

/// Dumps the trace as JSON lines {task_id, stage, start_ns, end_ns, status}.
void write_trace(const std::vector<TraceEvent>& trace,
                 const std::filesystem::path& out_path);

}  // namespace codelink
