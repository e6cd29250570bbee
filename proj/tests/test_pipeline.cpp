#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "tfda/pipeline.hpp"
#include "test_helpers.hpp"

using namespace tfda;
using namespace tfda_test;

TEST_SUITE_BEGIN("pipeline");

namespace {

const std::string kCosTree = "β·₊ · α₋·₊(σ₋) · α₊·₋(σ₊) · β·₋";

std::string test_root() {
  static std::string dir = [] {
    std::string d = (std::filesystem::temp_directory_path() / "tfda_pipeline_tests").string();
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(TFDA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

ScalarField scaled(const ScalarField& f, double c) {
  ScalarField out = f;
  for (double& v : out.values) v *= c;
  return out;
}

}  // namespace

TEST_CASE("analysis of the two-cosine field hits the reference chain") {
  RunConfig cfg;
  AnalysisArtifacts a = analyze_field(cos_field(128), cfg);
  REQUIRE(a.stable);
  CHECK(emit_cot(a.filtered) == kCosTree);
  CHECK(emit_cot(a.labeled.tree) == kCosTree);
  REQUIRE(a.vortices.size() == 2);
  int plus = 0;
  for (const TerminalVortex& v : a.vortices) plus += v.orientation == VortexOrientation::plus;
  CHECK(plus == 1);

  nlohmann::json r = report_json(a, cfg, "cos");
  CHECK(r["verdict"] == "stable");
  CHECK(r["counts"]["minima"] == 1);
  CHECK(r["counts"]["maxima"] == 1);
  CHECK(r["counts"]["saddles"] == 2);
  CHECK(r["counts"]["essential_edges"] == 2);
  CHECK(r["counts"]["cot_nodes"] == 6);
  CHECK(r["counts"]["vortices"] == 2);
  CHECK(r["cot"] == kCosTree);
  CHECK(r["cot_parses"] == true);
  CHECK(r["cut"]["winding"][0] == 1);
  CHECK(r["cut"]["winding"][1] == 0);
  CHECK(r["cut"]["shift_axis"] == "y");
}

TEST_CASE("normalization decides what the filter threshold refers to") {
  ScalarField tiny = scaled(cos_field(128), 0.05);  // extent 0.13, every weight < 0.1
  RunConfig cfg;

  AnalysisArtifacts norm = analyze_field(tiny, cfg);
  REQUIRE(norm.stable);
  CHECK(emit_cot(norm.filtered) == kCosTree);

  cfg.normalize = false;
  AnalysisArtifacts raw = analyze_field(tiny, cfg);
  REQUIRE(raw.stable);
  CHECK(emit_cot(raw.filtered) == "β·₊ · β·₋");
}

TEST_CASE("vortex quantities use the physical field even when normalizing") {
  RunConfig cfg;
  AnalysisArtifacts a = analyze_field(cos_field(128), cfg);
  AnalysisArtifacts b = analyze_field(scaled(cos_field(128), 10.0), cfg);
  REQUIRE(a.stable);
  REQUIRE(b.stable);
  REQUIRE(a.vortices.size() == b.vortices.size());
  for (std::size_t k = 0; k < a.vortices.size(); ++k) {
    CHECK(std::fabs(b.vortices[k].area - a.vortices[k].area) < 1e-12);
    // enstrophy and energy are quadratic in the field, so x10 means x100
    CHECK(std::fabs(b.vortices[k].enstrophy - 100.0 * a.vortices[k].enstrophy) < 1e-6);
    CHECK(std::fabs(b.vortices[k].energy - 100.0 * a.vortices[k].energy) < 1e-6);
  }
}

TEST_CASE("coarse graining by 2 preserves the two-cosine chain") {
  RunConfig cfg;
  cfg.coarse_factor = 2;
  AnalysisArtifacts a = analyze_field(cos_field(256), cfg);
  REQUIRE(a.stable);
  CHECK(a.work.nx == 128);
  CHECK(emit_cot(a.filtered) == kCosTree);
}

TEST_CASE("constant fields come back degenerate with a readable report") {
  ScalarField flat(16, 16);
  std::fill(flat.values.begin(), flat.values.end(), 3.0);
  RunConfig cfg;
  AnalysisArtifacts a = analyze_field(flat, cfg);
  CHECK_FALSE(a.stable);
  REQUIRE_FALSE(a.stability.reasons.empty());
  nlohmann::json r = report_json(a, cfg, "flat");
  CHECK(r["verdict"] == "degenerate");
  CHECK(r.count("cot") == 0);
}

TEST_CASE("configs are validated up front") {
  RunConfig cfg;
  cfg.eps0 = -0.1;
  CHECK_THROWS_AS(analyze_field(cos_field(64), cfg), argument_error);
  cfg.eps0 = 0.1;
  cfg.coarse_factor = 0;
  CHECK_THROWS_AS(analyze_field(cos_field(64), cfg), argument_error);
  cfg.coarse_factor = 1;
  CHECK_THROWS_AS(run_batch({}, cfg), argument_error);
  cfg.output_dir = test_root() + "/nojobs";
  CHECK_THROWS_AS(run_batch({"x.tfd"}, cfg, 0), argument_error);
}

TEST_CASE("single-snapshot batch writes flat artifacts, reruns are byte-identical") {
  std::string root = test_root() + "/single";
  std::filesystem::create_directories(root);
  std::string field_path = root + "/cos.tfd";
  save_field(cos_field(128), field_path);

  RunConfig cfg;
  cfg.output_dir = root + "/out1";
  auto outcomes = run_batch({field_path}, cfg);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].exit_code == 0);
  CHECK(outcomes[0].n_vortices == 2);
  CHECK(batch_exit_code(outcomes) == 0);

  CHECK(slurp(cfg.output_dir + "/cot.txt") == kCosTree + "\n");
  nlohmann::json rep = nlohmann::json::parse(slurp(cfg.output_dir + "/report.json"));
  CHECK(rep["verdict"] == "stable");
  nlohmann::json reeb = nlohmann::json::parse(slurp(cfg.output_dir + "/reeb.json"));
  CHECK(reeb["nodes"].size() == 4);
  std::string csv = slurp(cfg.output_dir + "/vortices.csv");
  CHECK(csv.rfind("id,orientation,area,enstrophy,energy,leaf_value,saddle_value\n", 0) == 0);
  CHECK(std::filesystem::exists(cfg.output_dir + "/manifest.json"));
  CHECK_FALSE(std::filesystem::exists(cfg.output_dir + "/summary.json"));

  RunConfig cfg2 = cfg;
  cfg2.output_dir = root + "/out2";
  run_batch({field_path}, cfg2);
  for (const char* name : {"cot.txt", "report.json", "reeb.json", "vortices.csv"})
    CHECK(slurp(cfg.output_dir + "/" + name) == slurp(cfg2.output_dir + "/" + name));
}

TEST_CASE("multi-snapshot batches are deterministic for any worker count") {
  std::string root = test_root() + "/batch";
  std::filesystem::create_directories(root);
  std::vector<std::string> inputs;
  for (int k = 0; k < 4; ++k) {
    ScalarField f = synth_field(64, 64, -3.0, 2, 8, 500 + std::uint64_t(k));
    std::string p = root + "/snap_" + std::to_string(k) + ".tfd";
    save_field(f, p);
    inputs.push_back(p);
  }

  RunConfig cfg;
  cfg.output_dir = root + "/serial";
  auto serial = run_batch(inputs, cfg, 1);
  cfg.output_dir = root + "/pooled";
  auto pooled = run_batch(inputs, cfg, 4);
  REQUIRE(serial.size() == 4);
  REQUIRE(pooled.size() == 4);
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].name == pooled[k].name);
    CHECK(serial[k].exit_code == pooled[k].exit_code);
    for (const char* name : {"cot.txt", "report.json", "reeb.json", "vortices.csv"})
      CHECK(slurp(root + "/serial/" + serial[k].name + "/" + name) ==
            slurp(root + "/pooled/" + pooled[k].name + "/" + name));
  }
  CHECK(std::is_sorted(serial.begin(), serial.end(),
                       [](const SnapshotOutcome& a, const SnapshotOutcome& b) {
                         return a.name < b.name;
                       }));

  nlohmann::json summary = nlohmann::json::parse(slurp(root + "/serial/summary.json"));
  REQUIRE(summary["snapshots"].size() == 4);
  for (const auto& row : summary["snapshots"]) CHECK(row["verdict"] == "stable");

  // same filename in two directories would collide in the output tree
  std::string clone_dir = root + "/clone";
  std::filesystem::create_directories(clone_dir);
  std::filesystem::copy_file(inputs[0], clone_dir + "/snap_0.tfd");
  auto dup = inputs;
  dup.push_back(clone_dir + "/snap_0.tfd");
  cfg.output_dir = root + "/dup";
  CHECK_THROWS_AS(run_batch(dup, cfg), argument_error);
}

TEST_CASE("a missing input surfaces as an io outcome, not an exception") {
  RunConfig cfg;
  cfg.output_dir = test_root() + "/missing";
  auto outcomes = run_batch({test_root() + "/does_not_exist.tfd"}, cfg);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].exit_code == 1);
  CHECK_FALSE(outcomes[0].error.empty());
  CHECK(batch_exit_code(outcomes) == 1);
}

TEST_CASE("cli: parse validates both alphabets and exits per contract") {
  CHECK(run_cli("parse \"B.+ * o-.+(s-) * o+.-(s+) * B.-\" --ascii") == 0);
  CHECK(run_cli("parse \"β·₊ · α₋·₊(σ₋) · α₊·₋(σ₊) · β·₋\"") == 0);
  CHECK(run_cli("parse \"B.+ * B.+\"") == 2);
  CHECK(run_cli("parse \"B.+ * B.-\"") == 2);              // strict rejects the bare chain
  CHECK(run_cli("parse \"B.+ * B.-\" --permissive") == 0);
}

TEST_CASE("cli: analyze writes the reference chain and identical reruns") {
  std::string root = test_root() + "/cli";
  std::filesystem::create_directories(root);
  save_field(cos_field(128), root + "/cos.tfd");

  CHECK(run_cli("analyze " + root + "/cos.tfd --out " + root + "/r1") == 0);
  CHECK(slurp(root + "/r1/cot.txt") == kCosTree + "\n");
  CHECK(run_cli("analyze " + root + "/cos.tfd --out " + root + "/r2") == 0);
  for (const char* name : {"cot.txt", "report.json", "reeb.json", "vortices.csv"})
    CHECK(slurp(root + "/r1/" + std::string(name)) == slurp(root + "/r2/" + std::string(name)));

  CHECK(run_cli("analyze " + root + "/nope.tfd --out " + root + "/r3") == 1);
}

TEST_CASE("cli: constant fields exit 3 and still report") {
  std::string root = test_root() + "/cli_flat";
  std::filesystem::create_directories(root);
  std::ofstream csv(root + "/flat.csv");
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) csv << (i ? "," : "") << "2.0";
    csv << "\n";
  }
  csv.close();
  CHECK(run_cli("analyze " + root + "/flat.csv --out " + root + "/out") == 3);
  nlohmann::json rep = nlohmann::json::parse(slurp(root + "/out/report.json"));
  CHECK(rep["verdict"] == "degenerate");
}

TEST_CASE("cli: synth is a pure function of its arguments") {
  std::string root = test_root() + "/cli_synth";
  std::string flags = "synth --exponent -3 --size 64 --kmin 2 --kmax 8 --count 2 --seed 9 --out ";
  CHECK(run_cli(flags + root + "/a") == 0);
  CHECK(run_cli(flags + root + "/b") == 0);
  CHECK(slurp(root + "/a/snap_0000.tfd") == slurp(root + "/b/snap_0000.tfd"));
  CHECK(slurp(root + "/a/snap_0001.tfd") == slurp(root + "/b/snap_0001.tfd"));
  CHECK(slurp(root + "/a/snap_0000.tfd") != slurp(root + "/a/snap_0001.tfd"));
}

TEST_CASE("cli: spectrum emits the k,E table") {
  std::string root = test_root() + "/cli_spec";
  std::filesystem::create_directories(root);
  save_field(cos_field(64), root + "/cos.tfd");
  CHECK(run_cli("spectrum " + root + "/cos.tfd --out " + root + "/spec.csv") == 0);
  std::string csv = slurp(root + "/spec.csv");
  CHECK(csv.rfind("k,E\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') > 2);
}

TEST_CASE("cli: stats fits a vortex table column") {
  std::string root = test_root() + "/cli_stats";
  std::filesystem::create_directories(root);
  {
    std::ofstream csv(root + "/vortices.csv");
    csv << "id,orientation,area,enstrophy,energy,leaf_value,saddle_value\n";
    for (int k = 0; k < 40; ++k)
      csv << k << "," << (k % 2 ? "plus" : "minus") << "," << 0.01 * (k + 1)
          << ",1.0,1.0,0.5,0.2\n";
  }
  CHECK(run_cli("stats " + root + "/vortices.csv --fit area --out " + root + "/fits") == 0);
  std::string fits = slurp(root + "/fits/fits_area.csv");
  CHECK(fits.rfind("family,param1,param2,loglik,aic,rank\n", 0) == 0);
  CHECK(std::filesystem::exists(root + "/fits/hist_area.csv"));
  // filtering to one orientation halves the sample below the n >= 30 floor
  CHECK(run_cli("stats " + root + "/vortices.csv --fit area --orientation plus") == 1);
  CHECK(run_cli("stats " + root + "/vortices.csv --fit nope") == 1);
}

TEST_SUITE_END();
