#include "codelink/pipeline.hpp"

#include <chrono>
#include <mutex>
#include <thread>

#include "codelink/dataset.hpp"
#include "codelink/scheduler.hpp"
#include "codelink/subprocess.hpp"
#include "codelink/util.hpp"
#include "codelink/version.hpp"

#include "json_internal.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace codelink {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_between(Clock::time_point a, Clock::time_point b) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

ordered_json item_errors_to_json(const std::vector<ItemError>& items) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : items) {
    ordered_json obj;
    obj["item"] = e.item;
    obj["message"] = e.message;
    arr.push_back(std::move(obj));
  }
  return arr;
}

struct FatalError {
  std::string stage;
  errc code = errc::io_error;
  std::string message;
};

void write_run_report(const fs::path& path, const RunReport& report,
                      unsigned workers, const std::optional<FatalError>& fatal) {
  ordered_json obj;
  obj["tool_version"] = std::string(kVersion);
  obj["created_at"] = rfc3339_utc_now();
  obj["workers"] = workers;
  ordered_json dataset;
  dataset["csv"] = report.csv_path.empty() ? ordered_json(nullptr)
                                           : ordered_json(report.csv_path.string());
  dataset["jsonl"] = report.jsonl_path.empty()
                         ? ordered_json(nullptr)
                         : ordered_json(report.jsonl_path.string());
  obj["dataset"] = std::move(dataset);
  obj["manifest"] = report.manifest_path.empty()
                        ? ordered_json(nullptr)
                        : ordered_json(report.manifest_path.string());
  ordered_json counts;
  counts["source_functions"] = report.source_function_count;
  counts["decompiled_functions"] = report.decompiled_function_count;
  counts["records"] = report.record_count;
  obj["counts"] = std::move(counts);
  ordered_json stats;
  stats["matched"] = report.mapping_stats.matched;
  stats["unmatched_decompiled"] = report.mapping_stats.unmatched_decompiled;
  stats["ambiguous"] = report.mapping_stats.ambiguous;
  obj["mapping_stats"] = std::move(stats);
  obj["stage_metrics"] = stage_metrics_to_json(report.metrics);
  obj["scheduling_overhead_bound_seconds"] = report.scheduling_overhead_bound_seconds;
  ordered_json errors;
  errors["extraction"] = item_errors_to_json(report.extraction_errors);
  errors["extraction_notes"] = item_errors_to_json(report.extraction_notes);
  errors["decompilation"] = item_errors_to_json(report.decompilation_errors);
  errors["decompilation_notes"] = item_errors_to_json(report.decompilation_notes);
  if (fatal) {
    ordered_json f;
    f["stage"] = fatal->stage;
    f["error"] = std::string(to_string(fatal->code)) + ": " + fatal->message;
    errors["fatal"] = std::move(f);
  } else {
    errors["fatal"] = nullptr;
  }
  obj["errors"] = std::move(errors);

  write_file(path, obj.dump(2) + "\n");
}

}  // namespace

unsigned default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(hw, 1u, 32u);
}

ExtractorSpec PipelineConfig::default_c_extractor() {
  return ExtractorSpec{"C", {"*.c", "*.h"}, kBuiltinCScanner};
}

RunReport run_pipeline(const PipelineConfig& config) {
  if (config.workers < 1) {
    throw Error(errc::usage_error, "workers must be >= 1");
  }
  if (config.workspace.empty()) {
    throw Error(errc::usage_error, "workspace path is required");
  }
  if (config.build.command.empty()) {
    throw Error(errc::usage_error, "build command is required");
  }
  if (config.build.timeout_seconds <= 0) {
    throw Error(errc::usage_error, "build timeout must be positive");
  }
  if (config.binaries.paths.empty()) {
    throw Error(errc::usage_error, "at least one target binary is required");
  }

  const fs::path workspace = config.workspace;
  fs::create_directories(workspace / "logs");

  RunReport report;
  report.report_path = workspace / "run_report.json";
  report.trace_path = workspace / "trace.jsonl";
  std::optional<FatalError> fatal;
  std::vector<TraceEvent> trace;
  const auto t0 = Clock::now();

  auto record_stage = [&](const std::string& id, const std::string& stage,
                          Clock::time_point start, TaskStatus status) {
    trace.push_back({id, stage, ns_between(t0, start), ns_between(t0, Clock::now()),
                     status, ""});
  };

  auto fail = [&](const std::string& stage, errc code,
                  const std::string& message) -> Error {
    fatal = FatalError{stage, code, message};
    report.metrics = collect_metrics(trace);
    report.metrics.overall.wall_seconds =
        static_cast<double>(ns_between(t0, Clock::now())) / 1e9;
    try {
      write_run_report(report.report_path, report, config.workers, fatal);
      write_trace(trace, report.trace_path);
    } catch (...) {
      // Best-effort reporting only.
    }
    return Error(code, "stage " + stage + ": " + message);
  };

  // ---- Stage: extractor registry (frozen before any parallelism) ----
  ExtractorRegistry registry;
  if (config.extractors.empty()) {
    throw fail("extraction", errc::no_extractors_registered,
               "no extractors configured");
  }
  try {
    for (const auto& spec : config.extractors) {
      registry.register_extractor(spec);
    }
  } catch (const Error& e) {
    throw fail("extraction", e.code(), e.what());
  }

  // ---- Stage: acquire ----
  fs::path repo_root;
  {
    const auto start = Clock::now();
    try {
      repo_root = acquire(config.repo, workspace, config.acquire);
    } catch (const Error& e) {
      record_stage("acquire", "acquire", start, TaskStatus::failed);
      throw fail("acquire", e.code(), e.what());
    }
    record_stage("acquire", "acquire", start, TaskStatus::ok);
  }

  // ---- Stage: build (strict) ----
  {
    const auto start = Clock::now();
    BuildReport build;
    try {
      build = execute_build(repo_root, config.build, workspace);
    } catch (const std::exception& e) {
      record_stage("build", "build", start, TaskStatus::failed);
      throw fail("build", errc::build_failed, e.what());
    }
    if (build.status == BuildStatus::timed_out) {
      record_stage("build", "build", start, TaskStatus::failed);
      throw fail("build", errc::build_timeout,
                 "killed after " + std::to_string(config.build.timeout_seconds) +
                     "s; logs: " + build.stderr_path.string());
    }
    if (build.status == BuildStatus::failed) {
      record_stage("build", "build", start, TaskStatus::failed);
      throw fail("build", errc::build_failed,
                 "exit code " + std::to_string(build.exit_code) +
                     "; logs: " + build.stderr_path.string());
    }
    record_stage("build", "build", start, TaskStatus::ok);
  }

  // ---- Stage: resolve + optional strip ----
  std::vector<fs::path> binaries;
  try {
    binaries = resolve_binaries(repo_root, config.binaries);
  } catch (const Error& e) {
    throw fail("resolve", e.code(), e.what());
  } catch (const std::exception& e) {
    throw fail("resolve", errc::binary_missing, e.what());
  }

  if (config.strip_binaries) {
    const auto start = Clock::now();
    for (const auto& bin : binaries) {
      RunOptions run;
      run.timeout_seconds = 300;
      run.stderr_mode = StdioMode::to_string;
      const auto result =
          run_shell(config.strip_tool + " " + shell_quote(bin.string()), run);
      if (result.timed_out || result.exit_code != 0) {
        record_stage("strip", "strip", start, TaskStatus::failed);
        throw fail("strip", errc::build_failed,
                   config.strip_tool + " failed on " + bin.string() + ": " +
                       result.stderr_text);
      }
    }
    record_stage("strip", "strip", start, TaskStatus::ok);
  }

  // ---- Parallel stages: extraction ∥ decompilation → mapping → export ----
  const auto discovered = discover_source_files(repo_root, registry, {workspace});

  std::vector<std::pair<std::string, FileScan>> file_slots(discovered.size());
  std::vector<std::vector<DecompiledFunction>> bin_slots(binaries.size());
  std::vector<std::optional<ItemError>> bin_errors(binaries.size());
  std::vector<std::optional<ItemError>> bin_notes(binaries.size());

  MappingResult mapping;
  std::vector<MappedRecord>* records = &mapping.records;
  std::uint64_t csv_rows = 0, jsonl_rows = 0;
  std::mutex fatal_mu;
  std::optional<FatalError> task_fatal;

  auto note_fatal = [&](const std::string& stage, errc code, const std::string& msg) {
    std::lock_guard lock(fatal_mu);
    if (!task_fatal) task_fatal = FatalError{stage, code, msg};
  };

  TaskGraph graph;
  std::vector<std::size_t> fan_out;

  for (std::size_t i = 0; i < discovered.size(); ++i) {
    const auto& [abs, spec] = discovered[i];
    const std::string rel = relative_to(abs, repo_root);
    fan_out.push_back(graph.add(
        "extract:" + rel, "extraction",
        [&file_slots, i, abs = abs, rel, spec] {
          file_slots[i] = {rel, extract_file(abs, rel, *spec)};
          return !file_slots[i].second.scan_error.has_value();
        }));
  }

  for (std::size_t j = 0; j < binaries.size(); ++j) {
    const fs::path bin = binaries[j];
    const std::string rel = relative_to(bin, repo_root);
    fan_out.push_back(graph.add(
        "decompile:" + rel, "decompilation",
        [&, j, bin, rel] {
          const unsigned attempts = config.decompiler.kind == "external" ? 2 : 1;
          for (unsigned attempt = 1; attempt <= attempts; ++attempt) {
            try {
              bin_slots[j] = decompile_binary(config.decompiler, bin, rel, workspace);
              return true;
            } catch (const Error& e) {
              if (e.code() == errc::no_symbols) {
                bin_notes[j] = ItemError{rel, e.what()};
                return true;  // stripped binary: expected, not an error
              }
              if (attempt < attempts) continue;
              bin_errors[j] = ItemError{rel, e.what()};
            } catch (const std::exception& e) {
              if (attempt < attempts) continue;
              bin_errors[j] = ItemError{rel, e.what()};
            }
          }
          return false;
        }));
  }

  const std::size_t map_task = graph.add(
      "map", "mapping",
      [&] {
        auto extraction = finalize_extraction(std::move(file_slots));
        report.extraction_errors = std::move(extraction.errors);
        report.extraction_notes = std::move(extraction.notes);
        report.source_function_count = extraction.functions.size();

        std::size_t hard_failures = 0;
        std::vector<DecompiledFunction> decompiled;
        for (std::size_t j = 0; j < binaries.size(); ++j) {
          if (bin_errors[j]) {
            report.decompilation_errors.push_back(*bin_errors[j]);
            ++hard_failures;
          }
          if (bin_notes[j]) {
            report.decompilation_notes.push_back(*bin_notes[j]);
          }
          decompiled.insert(decompiled.end(),
                            std::make_move_iterator(bin_slots[j].begin()),
                            std::make_move_iterator(bin_slots[j].end()));
        }
        if (!binaries.empty() && hard_failures == binaries.size()) {
          const auto msg = "all " + std::to_string(binaries.size()) + " binaries failed";
          note_fatal("decompilation", errc::all_binaries_failed, msg);
          throw Error(errc::all_binaries_failed, msg);
        }
        finalize_decompiled(decompiled);
        report.decompiled_function_count = decompiled.size();

        try {
          mapping = map_functions(extraction.functions, decompiled, config.rules,
                                  config.policy);
        } catch (const Error& e) {
          note_fatal("mapping", e.code(), e.what());
          throw;
        }
        report.mapping_stats = mapping.stats;
        return true;
      },
      fan_out);

  if (config.export_format == ExportFormat::csv ||
      config.export_format == ExportFormat::both) {
    report.csv_path = workspace / "dataset.csv";
    graph.add(
        "export:csv", "export",
        [&] {
          try {
            csv_rows = export_csv(*records, report.csv_path);
          } catch (const Error& e) {
            note_fatal("export", e.code(), e.what());
            throw;
          }
          return true;
        },
        {map_task});
  }
  if (config.export_format == ExportFormat::jsonl ||
      config.export_format == ExportFormat::both) {
    report.jsonl_path = workspace / "dataset.jsonl";
    graph.add(
        "export:jsonl", "export",
        [&] {
          try {
            jsonl_rows = export_jsonl(*records, report.jsonl_path);
          } catch (const Error& e) {
            note_fatal("export", e.code(), e.what());
            throw;
          }
          return true;
        },
        {map_task});
  }

  const auto schedule_start = Clock::now();
  auto graph_trace = schedule(graph, config.workers);
  const std::uint64_t shift = ns_between(t0, schedule_start);
  for (auto& ev : graph_trace) {
    ev.start_ns += shift;
    ev.end_ns += shift;
    trace.push_back(ev);
  }

  report.scheduling_overhead_bound_seconds =
      0.5 + 0.01 * static_cast<double>(graph.tasks.size());

  if (task_fatal) {
    throw fail(task_fatal->stage, task_fatal->code, task_fatal->message);
  }
  // A mapping/export failure without a recorded code still aborts.
  for (const auto& ev : graph_trace) {
    if ((ev.stage == "mapping" || ev.stage == "export") &&
        ev.status != TaskStatus::ok) {
      throw fail(ev.stage, errc::io_error,
                 ev.error.empty() ? "task " + ev.task_id + " did not complete"
                                  : ev.error);
    }
  }

  report.record_count = std::max(csv_rows, jsonl_rows);
  report.metrics = collect_metrics(trace);
  report.metrics.overall.wall_seconds =
      static_cast<double>(ns_between(t0, Clock::now())) / 1e9;

  DatasetManifest manifest;
  manifest.tool_version = std::string(kVersion);
  manifest.created_at = rfc3339_utc_now();
  manifest.repo = config.repo.location;
  manifest.build_command = config.build.command;
  for (const auto& bin : binaries) {
    manifest.binaries.push_back(relative_to(bin, repo_root));
  }
  manifest.record_count = report.record_count;
  manifest.stage_metrics = report.metrics;
  manifest.config_json = config_to_json(config);
  report.manifest_path = write_manifest(manifest, workspace);

  write_trace(trace, report.trace_path);
  write_run_report(report.report_path, report, config.workers, std::nullopt);
  return report;
}

}  // namespace codelink
