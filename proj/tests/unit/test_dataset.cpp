#include <doctest.h>

#include <nlohmann/json.hpp>

#include "codelink/dataset.hpp"
#include "codelink/util.hpp"
#include "support/csv_oracle.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace codelink;
using testsupport::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

MappedRecord sample_record() {
  MappedRecord record;
  record.decompiled.decompiled_uid = "app::0x1000::tricky";
  record.decompiled.name = "tricky";
  record.decompiled.address = 0x1000;
  record.decompiled.architecture = "x86_64";
  record.decompiled.bin = "app";
  record.decompiled.assembly = "55 48 89 E5";
  record.decompiled.decompiled_definition = "int tricky(void) {\n  return \",\";\n}";
  record.language = "C";
  const std::string uid = "src/a.c::tricky::12";
  record.source_files[uid] = "src/a.c";
  record.source_definitions[uid] = "int tricky(void) { /* \"quoted\", with, commas */\n return 0; }";
  record.source_file_start_bytes[uid] = 12;
  record.source_file_end_bytes[uid] = 73;
  record.class_names[uid] = std::nullopt;
  return record;
}

}  // namespace

TEST_CASE("csv header is exactly the twelve schema columns") {
  TempDir tmp;
  const fs::path out = tmp.path / "d.csv";
  CHECK(export_csv({}, out) == 0);
  const auto text = testsupport::read_text(out);
  CHECK(text ==
        "decompiled_uid,assembly,architecture,name,bin,decompiled_definition,"
        "language,source_files,source_definitions,source_file_start_bytes,"
        "source_file_end_bytes,class_names\n");
}

TEST_CASE("csv cells round-trip through an independent reader") {
  TempDir tmp;
  const fs::path out = tmp.path / "d.csv";
  const auto record = sample_record();
  CHECK(export_csv({record}, out) == 1);

  const auto rows = testsupport::parse_csv_oracle(testsupport::read_text(out));
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[1].size() == 12);
  CHECK(rows[1][0] == record.decompiled.decompiled_uid);
  CHECK(rows[1][5] == record.decompiled.decompiled_definition);

  const json files = json::parse(rows[1][7]);
  REQUIRE(files.is_object());
  REQUIRE(files.size() == 1);
  CHECK(files.cbegin().key() == "src/a.c::tricky::12");

  const json defs = json::parse(rows[1][8]);
  CHECK(defs.cbegin().value().get<std::string>() ==
        record.source_definitions.cbegin()->second);

  const json classes = json::parse(rows[1][11]);
  CHECK(classes.cbegin().value().is_null());
}

TEST_CASE("csv quoting: embedded quotes, commas, and newlines survive") {
  TempDir tmp;
  MappedRecord record = sample_record();
  record.decompiled.decompiled_definition = "line1\nline2 \"x,y\"\r\nlast";
  const fs::path out = tmp.path / "d.csv";
  export_csv({record}, out);

  const auto rows = testsupport::parse_csv_oracle(testsupport::read_text(out));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][5] == record.decompiled.decompiled_definition);
}

TEST_CASE("jsonl: empty list produces an empty file") {
  TempDir tmp;
  const fs::path out = tmp.path / "d.jsonl";
  CHECK(export_jsonl({}, out) == 0);
  CHECK(testsupport::read_text(out).empty());
  CHECK(import_jsonl(out).empty());
}

TEST_CASE("jsonl keys appear in schema order with native dictionaries") {
  TempDir tmp;
  const fs::path out = tmp.path / "d.jsonl";
  export_jsonl({sample_record()}, out);
  const auto text = testsupport::read_text(out);
  const auto& columns = dataset_columns();
  std::size_t previous = 0;
  for (const auto& column : columns) {
    const auto at = text.find("\"" + column + "\":");
    REQUIRE(at != std::string::npos);
    CHECK(at >= previous);
    previous = at;
  }
  CHECK(text.find("\"source_files\":{") != std::string::npos);
}

TEST_CASE("jsonl round-trip is exact") {
  TempDir tmp;
  const fs::path out = tmp.path / "d.jsonl";
  const auto record = sample_record();
  export_jsonl({record}, out);
  const auto back = import_jsonl(out);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == record);
}

TEST_CASE("property: jsonl round-trip over generated records") {
  testsupport::Rng rng(555);
  TempDir tmp;
  const fs::path out = tmp.path / "gen.jsonl";
  const auto records = testsupport::random_records(rng, 120);
  CHECK(export_jsonl(records, out) == records.size());
  const auto back = import_jsonl(out);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(back[i] == records[i]);
  }
}

TEST_CASE("property: csv and jsonl carry identical logical content") {
  testsupport::Rng rng(556);
  TempDir tmp;
  const auto records = testsupport::random_records(rng, 60);
  export_csv(records, tmp.path / "d.csv");
  export_jsonl(records, tmp.path / "d.jsonl");

  const auto rows = testsupport::parse_csv_oracle(testsupport::read_text(tmp.path / "d.csv"));
  const auto back = import_jsonl(tmp.path / "d.jsonl");
  REQUIRE(rows.size() == records.size() + 1);
  REQUIRE(back.size() == records.size());

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& row = rows[i + 1];
    CHECK(row[0] == back[i].decompiled.decompiled_uid);
    CHECK(row[5] == back[i].decompiled.decompiled_definition);
    CHECK(row[6] == back[i].language);
    const json files = json::parse(row[7]);
    json expect = json::object();
    for (const auto& [k, v] : back[i].source_files) expect[k] = v;
    CHECK(files == expect);
    const json starts = json::parse(row[9]);
    json expect_starts = json::object();
    for (const auto& [k, v] : back[i].source_file_start_bytes) expect_starts[k] = v;
    CHECK(starts == expect_starts);
  }
}

TEST_CASE("export determinism: identical records give identical bytes") {
  testsupport::Rng rng(557);
  TempDir tmp;
  const auto records = testsupport::random_records(rng, 30);
  export_csv(records, tmp.path / "a.csv");
  export_csv(records, tmp.path / "b.csv");
  export_jsonl(records, tmp.path / "a.jsonl");
  export_jsonl(records, tmp.path / "b.jsonl");
  CHECK(testsupport::read_text(tmp.path / "a.csv") ==
        testsupport::read_text(tmp.path / "b.csv"));
  CHECK(testsupport::read_text(tmp.path / "a.jsonl") ==
        testsupport::read_text(tmp.path / "b.jsonl"));
}

TEST_CASE("import_jsonl: missing key names the line and key") {
  TempDir tmp;
  const fs::path out = tmp.path / "bad.jsonl";
  export_jsonl({sample_record(), sample_record()}, out);
  // Damage line 2: drop the language key.
  auto text = testsupport::read_text(out);
  const auto second = text.find('\n') + 1;
  auto line2 = text.substr(second);
  const auto lang_at = line2.find(",\"language\":\"C\"");
  REQUIRE(lang_at != std::string::npos);
  line2.erase(lang_at, std::string(",\"language\":\"C\"").size());
  testsupport::write_text(out, text.substr(0, second) + line2);

  try {
    import_jsonl(out);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_error);
    const std::string what = e.what();
    CHECK(what.find("line 2") != std::string::npos);
    CHECK(what.find("language") != std::string::npos);
  }
}

TEST_CASE("import_jsonl: mismatched dictionary key sets name the uid") {
  TempDir tmp;
  const fs::path out = tmp.path / "bad.jsonl";
  auto record = sample_record();
  export_jsonl({record}, out);
  auto text = testsupport::read_text(out);
  // Inject an orphan uid into class_names only.
  const auto at = text.find("\"class_names\":{");
  REQUIRE(at != std::string::npos);
  text.insert(at + std::string("\"class_names\":{").size(),
              "\"orphan::uid::1\":null,");
  testsupport::write_text(out, text);

  try {
    import_jsonl(out);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_error);
    CHECK(std::string(e.what()).find("orphan::uid::1") != std::string::npos);
  }
}

TEST_CASE("import_jsonl: non-object line reports its number") {
  TempDir tmp;
  const fs::path out = tmp.path / "bad.jsonl";
  testsupport::write_text(out, "[1,2,3]\n");
  try {
    import_jsonl(out);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("manifest: write, re-read, row-count validation") {
  TempDir tmp;
  DatasetManifest manifest;
  manifest.tool_version = "0.1.0";
  manifest.created_at = "2025-01-01T00:00:00Z";
  manifest.repo = "./demo-c-repo";
  manifest.build_command = "make";
  manifest.binaries = {"main_app", "tool"};
  manifest.record_count = 6;
  manifest.stage_metrics.extraction.item_count = 2;
  manifest.config_json = "{\"workers\":4}";

  const auto path = write_manifest(manifest, tmp.path);
  CHECK(path.filename() == "manifest.json");
  const json parsed = json::parse(testsupport::read_text(path));
  CHECK(parsed["record_count"] == 6);
  CHECK(parsed["binaries"][1] == "tool");
  CHECK(parsed["config"]["workers"] == 4);
  CHECK(parsed["stage_metrics"]["extraction"]["item_count"] == 2);

  CHECK(manifest_matches_rowcount(path, 6));
  CHECK_FALSE(manifest_matches_rowcount(path, 7));
}

TEST_CASE("manifest determinism: only the timestamp differs between runs") {
  TempDir tmp;
  DatasetManifest manifest;
  manifest.tool_version = "0.1.0";
  manifest.created_at = "2025-01-01T00:00:00Z";
  manifest.repo = "repo";
  manifest.build_command = "make";
  manifest.record_count = 1;

  fs::create_directories(tmp.path / "a");
  fs::create_directories(tmp.path / "b");
  write_manifest(manifest, tmp.path / "a");
  manifest.created_at = "2026-02-02T00:00:00Z";
  write_manifest(manifest, tmp.path / "b");

  json first = json::parse(testsupport::read_text(tmp.path / "a" / "manifest.json"));
  json second = json::parse(testsupport::read_text(tmp.path / "b" / "manifest.json"));
  CHECK(first["created_at"] != second["created_at"]);
  first.erase("created_at");
  second.erase("created_at");
  CHECK(first == second);
}
