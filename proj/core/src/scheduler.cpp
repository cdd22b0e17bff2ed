#include "codelink/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "codelink/error.hpp"
#include "codelink/util.hpp"

#include <nlohmann/json.hpp>

namespace codelink {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_since(Clock::time_point origin) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - origin)
          .count());
}

}  // namespace

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::ok: return "ok";
    case TaskStatus::failed: return "failed";
    case TaskStatus::skipped: return "skipped";
  }
  return "unknown";
}

std::vector<TraceEvent> schedule(const TaskGraph& graph, unsigned workers) {
  if (workers == 0) {
    throw std::invalid_argument("workers must be >= 1");
  }
  const std::size_t n = graph.tasks.size();

  // Validate dependencies and prove acyclicity up front (Kahn's algorithm).
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::size_t dep : graph.tasks[i].deps) {
      if (dep >= n) {
        throw std::invalid_argument("task '" + graph.tasks[i].id +
                                    "' depends on unknown task index");
      }
      ++pending[i];
      dependents[dep].push_back(i);
    }
  }
  {
    std::vector<std::size_t> counts = pending;
    std::deque<std::size_t> queue;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0) queue.push_back(i);
    }
    while (!queue.empty()) {
      const std::size_t t = queue.front();
      queue.pop_front();
      ++seen;
      for (const std::size_t d : dependents[t]) {
        if (--counts[d] == 0) queue.push_back(d);
      }
    }
    if (seen != n) {
      throw Error(errc::cycle_detected, "task graph contains a dependency cycle");
    }
  }

  std::vector<TraceEvent> trace(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace[i].task_id = graph.tasks[i].id;
    trace[i].stage = graph.tasks[i].stage;
  }

  const auto origin = Clock::now();
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::size_t> ready;
  std::vector<bool> poisoned(n, false);  // a dependency failed fatally
  std::size_t remaining = n;

  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(i);
  }

  // A body that returns false fails softly (dependents still run); a body
  // that throws poisons its dependents, which are then skipped.
  auto finish_task = [&](std::size_t index, TaskStatus status, bool fatal,
                         std::string error, std::uint64_t start, std::uint64_t end) {
    std::lock_guard lock(mu);
    trace[index].status = status;
    trace[index].error = std::move(error);
    trace[index].start_ns = start;
    trace[index].end_ns = end;
    const bool poison_children = fatal || poisoned[index];
    for (const std::size_t d : dependents[index]) {
      if (poison_children) poisoned[d] = true;
      if (--pending[d] == 0) ready.push_back(d);
    }
    --remaining;
    cv.notify_all();
  };

  auto worker_loop = [&] {
    for (;;) {
      std::size_t index;
      bool skip;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return remaining == 0 || !ready.empty(); });
        if (ready.empty()) return;  // remaining == 0
        index = ready.front();
        ready.pop_front();
        skip = poisoned[index];
      }

      if (skip) {
        const auto now = ns_since(origin);
        finish_task(index, TaskStatus::skipped, false, "", now, now);
        continue;
      }

      const auto start = ns_since(origin);
      TaskStatus status = TaskStatus::ok;
      bool fatal = false;
      std::string error;
      try {
        const bool ok = graph.tasks[index].body ? graph.tasks[index].body() : true;
        if (!ok) status = TaskStatus::failed;
      } catch (const std::exception& e) {
        status = TaskStatus::failed;
        fatal = true;
        error = e.what();
        if (error.empty()) error = "task failed";
      } catch (...) {
        status = TaskStatus::failed;
        fatal = true;
        error = "unknown error";
      }
      finish_task(index, status, fatal, std::move(error), start, ns_since(origin));
    }
  };

  const unsigned thread_count =
      static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (unsigned t = 0; t < thread_count; ++t) {
    pool.emplace_back(worker_loop);
  }
  for (auto& t : pool) t.join();

  return trace;
}

StageMetrics collect_metrics(const std::vector<TraceEvent>& trace) {
  StageMetrics metrics;

  auto fill = [&trace](StageTiming& timing, std::string_view stage) {
    std::uint64_t min_start = UINT64_MAX, max_end = 0;
    for (const auto& ev : trace) {
      if (!stage.empty() && ev.stage != stage) continue;
      min_start = std::min(min_start, ev.start_ns);
      max_end = std::max(max_end, ev.end_ns);
      ++timing.item_count;
      if (ev.status != TaskStatus::ok) ++timing.error_count;
    }
    if (timing.item_count > 0 && max_end > min_start) {
      timing.wall_seconds = static_cast<double>(max_end - min_start) / 1e9;
    }
  };

  fill(metrics.extraction, "extraction");
  fill(metrics.decompilation, "decompilation");
  fill(metrics.mapping, "mapping");
  fill(metrics.export_, "export");
  fill(metrics.overall, {});
  return metrics;
}

void write_trace(const std::vector<TraceEvent>& trace,
                 const std::filesystem::path& out_path) {
  std::string text;
  for (const auto& ev : trace) {
    nlohmann::ordered_json obj;
    obj["task_id"] = ev.task_id;
    obj["stage"] = ev.stage;
    obj["start_ns"] = ev.start_ns;
    obj["end_ns"] = ev.end_ns;
    obj["status"] = std::string(to_string(ev.status));
    text += obj.dump();
    text += '\n';
  }
  write_file(out_path, text);
}

}  // namespace codelink
