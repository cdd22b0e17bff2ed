#include <doctest.h>

#include <sstream>

#include "codelink/dataset.hpp"
#include "codelink/stats.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace codelink;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

std::vector<MappedRecord> mixed_records() {
  testsupport::Rng rng(808);
  auto records = testsupport::random_records(rng, 8);
  // Force at least one of each bucket.
  records[0].source_files.clear();
  records[0].source_definitions.clear();
  records[0].source_file_start_bytes.clear();
  records[0].source_file_end_bytes.clear();
  records[0].class_names.clear();
  records[0].language = "";
  return records;
}

}  // namespace

TEST_CASE("stats over a csv dataset") {
  TempDir tmp;
  const auto records = mixed_records();
  const fs::path csv = tmp.path / "d.csv";
  export_csv(records, csv);

  const auto stats = compute_stats(csv);
  CHECK(stats.records == records.size());
  std::uint64_t mapped = 0, unmapped = 0, ambiguous = 0;
  for (const auto& r : records) {
    if (r.source_files.empty()) {
      ++unmapped;
    } else {
      ++mapped;
      if (r.source_files.size() > 1) ++ambiguous;
    }
  }
  CHECK(stats.mapped == mapped);
  CHECK(stats.unmapped == unmapped);
  CHECK(stats.ambiguous == ambiguous);

  std::ostringstream out;
  print_stats(stats, out);
  const std::string text = out.str();
  CHECK(text.find("records: " + std::to_string(records.size())) == 0);
  CHECK(text.find("mapped: ") != std::string::npos);
  CHECK(text.find("unmapped: ") != std::string::npos);
}

TEST_CASE("stats: csv and jsonl agree") {
  TempDir tmp;
  const auto records = mixed_records();
  export_csv(records, tmp.path / "d.csv");
  export_jsonl(records, tmp.path / "d.jsonl");
  const auto csv_stats = compute_stats(tmp.path / "d.csv");
  const auto jsonl_stats = compute_stats(tmp.path / "d.jsonl");
  CHECK(csv_stats.records == jsonl_stats.records);
  CHECK(csv_stats.mapped == jsonl_stats.mapped);
  CHECK(csv_stats.unmapped == jsonl_stats.unmapped);
  CHECK(csv_stats.ambiguous == jsonl_stats.ambiguous);
  CHECK(csv_stats.per_binary == jsonl_stats.per_binary);
  CHECK(csv_stats.per_language == jsonl_stats.per_language);
}

TEST_CASE("stats: empty dataset") {
  TempDir tmp;
  export_csv({}, tmp.path / "d.csv");
  const auto stats = compute_stats(tmp.path / "d.csv");
  CHECK(stats.records == 0);
  CHECK(stats.mapped == 0);
  std::ostringstream out;
  print_stats(stats, out);
  CHECK(out.str().find("records: 0") == 0);
}

TEST_CASE("stats: wrong header is a schema error") {
  TempDir tmp;
  testsupport::write_text(tmp.path / "d.csv", "a,b,c\n1,2,3\n");
  try {
    compute_stats(tmp.path / "d.csv");
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_error);
  }
}

TEST_CASE("stats: malformed row reports its line number") {
  TempDir tmp;
  const auto records = mixed_records();
  const fs::path csv = tmp.path / "d.csv";
  export_csv({records[1]}, csv);
  auto text = testsupport::read_text(csv);
  text += "only,three,cells\n";
  testsupport::write_text(csv, text);
  try {
    compute_stats(csv);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_error);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("stats: dictionary key-set mismatch is caught per row") {
  TempDir tmp;
  MappedRecord record;
  record.decompiled.decompiled_uid = "b::0x1::f";
  record.decompiled.name = "f";
  record.decompiled.address = 1;
  record.decompiled.bin = "b";
  record.language = "C";
  record.source_files["u1"] = "a.c";
  record.source_definitions["u1"] = "x";
  record.source_file_start_bytes["u1"] = 0;
  record.source_file_end_bytes["u1"] = 1;
  record.class_names["u1"] = std::nullopt;
  const fs::path csv = tmp.path / "d.csv";
  export_csv({record}, csv);

  auto text = testsupport::read_text(csv);
  const auto at = text.rfind("{\"\"u1\"\":null}");
  REQUIRE(at != std::string::npos);
  text.replace(at, std::string("{\"\"u1\"\":null}").size(), "{\"\"u2\"\":null}");
  testsupport::write_text(csv, text);
  try {
    compute_stats(csv);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_error);
    CHECK(std::string(e.what()).find("class_names") != std::string::npos);
  }
}
