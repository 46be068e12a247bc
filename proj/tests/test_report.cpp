#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tailcert/kernels.hpp"
#include "tailcert/report.hpp"
#include "tailcert/scenarios.hpp"

using namespace tailcert;

namespace {

json small_report(int workers) {
  set_worker_count(workers);
  auto c = default_config("finite-max");
  c.trials = 5000;
  auto doc = report_to_json(run_scenario(c));
  set_worker_count(0);
  return doc;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("report exports") {
  const auto doc = small_report(1);
  CHECK(doc.contains("content_digest"));
  CHECK(doc.at("content_digest") == content_digest(doc));
  std::size_t probes = 0;
  for (const auto& t : doc.at("tails")) probes += t.at("tail").at("probes").size();
  CHECK(lines(report_csv(doc)) == probes + 1);
  CHECK(lines(report_plotdata(doc)) == doc.at("plot").size() + 2);
}

TEST_CASE("content digest ignores run metadata and worker count") {
  const auto a = small_report(1), b = small_report(2);
  CHECK(content_digest(a) == content_digest(b));
  auto c = a;
  c["run"]["wall_seconds"] = 1e9;
  CHECK(content_digest(c) == content_digest(a));
  c["stats"]["extra"] = 1;
  CHECK(content_digest(c) != content_digest(a));
}

TEST_CASE("emit writes each format and tails read back") {
  const auto doc = small_report(1);
  const auto dir = std::filesystem::temp_directory_path() / "tailcert_report_test";
  std::filesystem::create_directories(dir);
  emit(doc, EmitFormat::Json, dir / "r.json");
  emit(doc, emit_format_from_string("csv"), dir / "r.csv");
  emit(doc, emit_format_from_string("plotdata"), dir / "r.dat");
  CHECK(read_json_file(dir / "r.json") == doc);
  CHECK(std::filesystem::file_size(dir / "r.csv") > 0);
  CHECK(std::filesystem::file_size(dir / "r.dat") > 0);
  const auto& t = doc.at("tails").at(0).at("tail");
  const auto back = to_json(tail_from_json(t));
  REQUIRE(back.at("probes").size() == t.at("probes").size());
  for (std::size_t i = 0; i < t.at("probes").size(); ++i)
    for (const char* k : {"n", "t", "m", "k", "ucb"}) CHECK(back["probes"][i][k] == t["probes"][i][k]);
  CHECK_THROWS(emit_format_from_string("xml"));
  std::filesystem::remove_all(dir);
}
