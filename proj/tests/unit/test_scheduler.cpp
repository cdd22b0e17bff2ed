#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>
#include <utility>

#include "codelink/scheduler.hpp"
#include "codelink/error.hpp"
#include "support/temp_dir.hpp"

#include <nlohmann/json.hpp>

using namespace codelink;
using testsupport::TempDir;

namespace {

const TraceEvent& event_for(const std::vector<TraceEvent>& trace, const std::string& id) {
  for (const auto& ev : trace) {
    if (ev.task_id == id) return ev;
  }
  REQUIRE_MESSAGE(false, "no trace event for ", id);
  static TraceEvent dummy;
  return dummy;
}

void sleep_ms(int ms) {
  std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

}  // namespace

TEST_CASE("dependency order: A runs before B") {
  std::vector<int> order;
  TaskGraph graph;
  const auto a = graph.add("A", "s", [&] { order.push_back(1); return true; });
  graph.add("B", "s", [&] { order.push_back(2); return true; }, {a});

  const auto trace = schedule(graph, 1);
  CHECK(order == std::vector<int>{1, 2});
  CHECK(event_for(trace, "A").end_ns <= event_for(trace, "B").start_ns);
  CHECK(trace[0].status == TaskStatus::ok);
}

TEST_CASE("worker bound: 16 independent tasks never exceed 4 in flight") {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  TaskGraph graph;
  for (int i = 0; i < 16; ++i) {
    graph.add("t" + std::to_string(i), "s", [&] {
      const int now = ++in_flight;
      int expected = peak.load();
      while (now > expected && !peak.compare_exchange_weak(expected, now)) {
      }
      sleep_ms(20);
      --in_flight;
      return true;
    });
  }
  const auto trace = schedule(graph, 4);
  CHECK(peak.load() <= 4);
  CHECK(peak.load() >= 2);  // some actual parallelism happened

  // The bound is also visible in the trace: sweep start/end events and
  // track instantaneous concurrency.
  std::vector<std::pair<std::uint64_t, int>> events;
  for (const auto& ev : trace) {
    events.emplace_back(ev.start_ns, +1);
    events.emplace_back(ev.end_ns, -1);
  }
  std::sort(events.begin(), events.end());
  int concurrent = 0, max_concurrent = 0;
  for (const auto& [ns, delta] : events) {
    concurrent += delta;
    max_concurrent = std::max(max_concurrent, concurrent);
  }
  CHECK(max_concurrent <= 4);
}

TEST_CASE("diamond: the join waits for both branches") {
  TaskGraph graph;
  const auto a = graph.add("A", "s", [] { return true; });
  const auto b = graph.add("B", "s", [] { sleep_ms(30); return true; }, {a});
  const auto c = graph.add("C", "s", [] { sleep_ms(5); return true; }, {a});
  graph.add("D", "s", [] { return true; }, {b, c});

  const auto trace = schedule(graph, 4);
  const auto& d = event_for(trace, "D");
  CHECK(d.start_ns >= event_for(trace, "B").end_ns);
  CHECK(d.start_ns >= event_for(trace, "C").end_ns);
}

TEST_CASE("cycles are detected up front") {
  TaskGraph graph;
  graph.tasks.push_back({"A", "s", [] { return true; }, {1}});
  graph.tasks.push_back({"B", "s", [] { return true; }, {0}});
  try {
    schedule(graph, 2);
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == errc::cycle_detected);
  }
}

TEST_CASE("soft failure (return false) lets dependents run") {
  bool dependent_ran = false;
  TaskGraph graph;
  const auto a = graph.add("A", "s", [] { return false; });
  graph.add("B", "s", [&] { dependent_ran = true; return true; }, {a});

  const auto trace = schedule(graph, 2);
  CHECK(dependent_ran);
  CHECK(event_for(trace, "A").status == TaskStatus::failed);
  CHECK(event_for(trace, "B").status == TaskStatus::ok);
}

TEST_CASE("fatal failure (throw) skips dependents transitively") {
  bool ran = false;
  TaskGraph graph;
  const auto a = graph.add("A", "s", []() -> bool { throw Error(errc::io_error, "boom"); });
  const auto b = graph.add("B", "s", [&] { ran = true; return true; }, {a});
  graph.add("C", "s", [&] { ran = true; return true; }, {b});
  const auto unrelated = graph.add("Z", "s", [] { return true; });
  (void)unrelated;

  const auto trace = schedule(graph, 2);
  CHECK_FALSE(ran);
  CHECK(event_for(trace, "A").status == TaskStatus::failed);
  CHECK(event_for(trace, "A").error.find("boom") != std::string::npos);
  CHECK(event_for(trace, "B").status == TaskStatus::skipped);
  CHECK(event_for(trace, "C").status == TaskStatus::skipped);
  CHECK(event_for(trace, "Z").status == TaskStatus::ok);
}

TEST_CASE("every task appears exactly once in the trace, in graph order") {
  TaskGraph graph;
  for (int i = 0; i < 10; ++i) {
    graph.add("t" + std::to_string(i), "s", [] { return true; });
  }
  const auto trace = schedule(graph, 3);
  REQUIRE(trace.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(trace[i].task_id == "t" + std::to_string(i));
  }
}

TEST_CASE("collect_metrics: zero-duration and empty stages") {
  std::vector<TraceEvent> trace;
  trace.push_back({"x", "extraction", 100, 100, TaskStatus::ok, ""});
  const auto metrics = collect_metrics(trace);
  CHECK(metrics.extraction.wall_seconds == 0.0);
  CHECK(metrics.extraction.item_count == 1);
  CHECK(metrics.extraction.error_count == 0);
  CHECK(metrics.decompilation.item_count == 0);
  CHECK(metrics.decompilation.wall_seconds == 0.0);
}

TEST_CASE("collect_metrics: parallel tasks use wall-clock, not CPU-sum") {
  std::vector<TraceEvent> trace;
  trace.push_back({"a", "decompilation", 0, 1'000'000'000, TaskStatus::ok, ""});
  trace.push_back({"b", "decompilation", 0, 1'000'000'000, TaskStatus::ok, ""});
  const auto metrics = collect_metrics(trace);
  CHECK(metrics.decompilation.wall_seconds == doctest::Approx(1.0));
  CHECK(metrics.decompilation.item_count == 2);
}

TEST_CASE("collect_metrics: overall spans all stages; errors counted per stage") {
  std::vector<TraceEvent> trace;
  trace.push_back({"e1", "extraction", 0, 1'000'000'000, TaskStatus::failed, "x"});
  trace.push_back({"d1", "decompilation", 500'000'000, 2'000'000'000, TaskStatus::ok, ""});
  const auto metrics = collect_metrics(trace);
  CHECK(metrics.extraction.error_count == 1);
  CHECK(metrics.overall.wall_seconds == doctest::Approx(2.0));
  CHECK(metrics.overall.item_count == 2);
  CHECK(metrics.overall.error_count == 1);

  // Fully overlapping stages: overall is the max span, below the sum.
  CHECK(metrics.overall.wall_seconds <
        metrics.extraction.wall_seconds + metrics.decompilation.wall_seconds + 0.75);
  CHECK(metrics.overall.wall_seconds >=
        std::max(metrics.extraction.wall_seconds, metrics.decompilation.wall_seconds));
}

TEST_CASE("write_trace emits one JSON object per task") {
  TempDir tmp;
  std::vector<TraceEvent> trace;
  trace.push_back({"a", "extraction", 1, 2, TaskStatus::ok, ""});
  trace.push_back({"b", "export", 3, 4, TaskStatus::skipped, ""});
  const auto path = tmp.path / "trace.jsonl";
  write_trace(trace, path);

  const auto text = testsupport::read_text(path);
  std::size_t lines = 0;
  std::size_t at = 0;
  while ((at = text.find('\n', at)) != std::string::npos) {
    ++lines;
    ++at;
  }
  CHECK(lines == 2);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(first["task_id"] == "a");
  CHECK(first["stage"] == "extraction");
  CHECK(first["status"] == "ok");
  CHECK(first["start_ns"] == 1);
  CHECK(first["end_ns"] == 2);
}

TEST_CASE("empty graph schedules cleanly") {
  TaskGraph graph;
  const auto trace = schedule(graph, 8);
  CHECK(trace.empty());
  const auto metrics = collect_metrics(trace);
  CHECK(metrics.overall.item_count == 0);
}
