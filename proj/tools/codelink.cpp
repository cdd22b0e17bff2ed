#include <cstdio>
#include <iostream>

#include "codelink/config.hpp"
#include "codelink/pipeline.hpp"
#include "codelink/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipelineError = 1;
constexpr int kExitUsageError = 2;

int run_create(const codelink::PipelineConfig& config) {
  const auto report = codelink::run_pipeline(config);

  std::cout << "dataset:";
  if (!report.csv_path.empty()) std::cout << " " << report.csv_path.string();
  if (!report.jsonl_path.empty()) std::cout << " " << report.jsonl_path.string();
  std::cout << "\n";
  std::cout << "source functions: " << report.source_function_count
            << ", decompiled functions: " << report.decompiled_function_count
            << ", records: " << report.record_count << "\n";
  std::cout << "mapping: matched " << report.mapping_stats.matched << ", unmatched "
            << report.mapping_stats.unmatched_decompiled << ", ambiguous "
            << report.mapping_stats.ambiguous << "\n";
  std::printf(
      "stage seconds: extraction %.3f, decompilation %.3f, mapping %.3f, "
      "export %.3f, overall %.3f\n",
      report.metrics.extraction.wall_seconds,
      report.metrics.decompilation.wall_seconds, report.metrics.mapping.wall_seconds,
      report.metrics.export_.wall_seconds, report.metrics.overall.wall_seconds);
  if (!report.extraction_errors.empty() || !report.decompilation_errors.empty()) {
    std::cout << report.extraction_errors.size() << " extraction error(s), "
              << report.decompilation_errors.size()
              << " decompilation error(s); see " << report.report_path.string()
              << "\n";
  }
  return kExitOk;
}

int run_stats(const std::filesystem::path& dataset) {
  const auto stats = codelink::compute_stats(dataset);
  codelink::print_stats(stats, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  codelink::CliCommand command;
  try {
    command = codelink::parse_cli(args);
  } catch (const codelink::Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << codelink::usage_text();
    return kExitUsageError;
  }

  try {
    if (std::holds_alternative<codelink::CliHelp>(command)) {
      std::cout << codelink::usage_text();
      return kExitOk;
    }
    if (const auto* stats = std::get_if<codelink::CliStats>(&command)) {
      return run_stats(stats->dataset);
    }
    return run_create(std::get<codelink::CliCreate>(command).config);
  } catch (const codelink::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == codelink::errc::usage_error ||
                   e.code() == codelink::errc::config_file_error
               ? kExitUsageError
               : kExitPipelineError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipelineError;
  }
}
