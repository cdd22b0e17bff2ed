#include "codelink/dataset.hpp"
#include "codelink/error.hpp"
#include "codelink/util.hpp"

#include "json_internal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace codelink {
namespace {

ordered_json timing_to_json(const StageTiming& t) {
  ordered_json obj;
  obj["wall_seconds"] = t.wall_seconds;
  obj["item_count"] = t.item_count;
  obj["error_count"] = t.error_count;
  return obj;
}

}  // namespace

ordered_json stage_metrics_to_json(const StageMetrics& m) {
  ordered_json obj;
  obj["extraction"] = timing_to_json(m.extraction);
  obj["decompilation"] = timing_to_json(m.decompilation);
  obj["mapping"] = timing_to_json(m.mapping);
  obj["export"] = timing_to_json(m.export_);
  obj["overall"] = timing_to_json(m.overall);
  return obj;
}

fs::path write_manifest(const DatasetManifest& manifest, const fs::path& out_dir) {
  ordered_json obj;
  obj["tool_version"] = manifest.tool_version;
  obj["created_at"] = manifest.created_at;
  obj["repo"] = manifest.repo;
  obj["build_command"] = manifest.build_command;
  obj["binaries"] = manifest.binaries;
  obj["record_count"] = manifest.record_count;
  obj["stage_metrics"] = stage_metrics_to_json(manifest.stage_metrics);

  if (!manifest.config_json.empty()) {
    ordered_json config = ordered_json::parse(manifest.config_json, nullptr, false);
    obj["config"] = config.is_discarded() ? ordered_json(manifest.config_json)
                                          : std::move(config);
  } else {
    obj["config"] = nullptr;
  }

  const fs::path path = out_dir / "manifest.json";
  write_file(path, obj.dump(2) + "\n");
  return path;
}

bool manifest_matches_rowcount(const fs::path& manifest_path,
                               std::uint64_t actual_rows) {
  json obj = json::parse(read_file(manifest_path), nullptr, false);
  if (obj.is_discarded() || !obj.is_object() || !obj.contains("record_count") ||
      !obj["record_count"].is_number()) {
    return false;
  }
  return obj["record_count"].get<std::uint64_t>() == actual_rows;
}

}  // namespace codelink
