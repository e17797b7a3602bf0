// Drives the installed binary end to end through std::system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "doctest.h"
#include "soundshap/serialize.hpp"

namespace fs = std::filesystem;
using soundshap::read_csv;

namespace {

const std::string kCli = SOUNDSHAP_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("soundshap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_demo_dataset(const fs::path& path) {
  std::ofstream out(path);
  out << "a,b\n0,0\n0,1\n1,0\n1,1\n1,1\n";
}

}  // namespace

TEST_CASE("input errors exit with code 2") {
  const fs::path dir = fresh_dir("errors");
  CHECK(run("shap --data " + (dir / "missing.csv").string() + " --out-dir " +
            dir.string()) == 2);
  CHECK(run("bogus-subcommand") == 2);
  // Malformed CSV.
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK(run("shap --data " + (dir / "bad.csv").string() + " --out-dir " +
            dir.string()) == 2);
}

TEST_CASE("shap subcommand writes a table and summary") {
  const fs::path dir = fresh_dir("shap");
  write_demo_dataset(dir / "data.csv");
  CHECK(run("shap --data " + (dir / "data.csv").string() +
            " --function product --out-dir " + dir.string()) == 0);

  const auto table = read_csv((dir / "shap_cells.csv").string());
  CHECK(table.header.front() == "idx0");
  CHECK(table.rows.size() == 4);  // 2x2 grid

  const auto summary = soundshap::load_json_file((dir / "shap_summary.json").string());
  CHECK(summary.at("d") == 2);
  CHECK(summary.at("aggregate_mu").size() == 2);
  CHECK(summary.at("aggregate_mu_star").size() == 2);
}

TEST_CASE("counterexample pipeline feeds back into shap") {
  const fs::path dir = fresh_dir("pipeline");
  CHECK(run("counterexample --grid 3x3 --mask ring:0.2:0.4 --feature 0 "
            "--out-dir " + dir.string()) == 0);
  const fs::path report = dir / "counterexample.json";
  REQUIRE(fs::exists(report));
  // The emitted grids parse back through the CSV reader.
  for (const char* name : {"f_values.csv", "shap_in_support.csv", "shap_extended.csv"}) {
    const auto grid_csv = read_csv((dir / name).string());
    CHECK(grid_csv.rows.size() == 3);
    CHECK(grid_csv.header.size() == 4);
  }

  // Feed the found function back through the exact-SHAP pipeline: the
  // data-support aggregate of feature 0 vanishes, the extended one does not.
  CHECK(run("shap --function " + report.string() + " --out-dir " + dir.string()) == 0);
  const auto summary = soundshap::load_json_file((dir / "shap_summary.json").string());
  CHECK(summary.at("aggregate_mu")[0].get<double>() <= 1e-8);
  CHECK(summary.at("aggregate_mu_star")[0].get<double>() > 1e-6);
}

TEST_CASE("sound-aggregate certificate on the counterexample function") {
  const fs::path dir = fresh_dir("sound");
  CHECK(run("counterexample --grid 3x3 --mask ring:0.2:0.4 --feature 0 "
            "--out-dir " + dir.string()) == 0);
  // Dataset enumerating the support cells once each.
  std::ofstream(dir / "support.csv") << "a,b\n0,1\n1,0\n1,2\n2,1\n";
  CHECK(run("sound-aggregate --data " + (dir / "support.csv").string() +
            " --function " + (dir / "counterexample.json").string() +
            " --feature 0 --seed 3 --out-dir " + dir.string()) == 0);
  const auto out = soundshap::load_json_file((dir / "sound_aggregate.json").string());
  CHECK(out.at("certificate_ok").get<bool>());
  // The headline behaviour: the unscrambled aggregate hides the dependence,
  // the scrambled one exposes it.
  CHECK(out.at("aggregate_kernelshap_unscrambled").get<double>() <= 1e-8);
  CHECK(out.at("aggregate_kernelshap_scrambled").get<double>() > 1e-6);
}

TEST_CASE("kshap determinism for a fixed seed") {
  const fs::path dir = fresh_dir("kshap");
  write_demo_dataset(dir / "data.csv");
  const std::string base = "kshap --data " + (dir / "data.csv").string() +
                           " --function additive --mode sampled --samples 32 "
                           "--seed 11 --scramble --out-dir ";
  CHECK(run(base + (dir / "run1").string()) == 0);
  CHECK(run(base + (dir / "run2").string()) == 0);
  CHECK(slurp(dir / "run1/kshap_rows.csv") == slurp(dir / "run2/kshap_rows.csv"));
  CHECK(slurp(dir / "run1/kshap_summary.json") ==
        slurp(dir / "run2/kshap_summary.json"));
  const auto rows = read_csv((dir / "run1/kshap_rows.csv").string());
  CHECK(rows.rows.size() == 5);
  CHECK(rows.header.back() == "k1");

  // Full mode reports a near-zero error term on this exact enumeration? Not
  // necessarily zero (the dataset is not the extended support), but finite
  // and recorded.
  CHECK(run("kshap --data " + (dir / "data.csv").string() +
            " --function additive --mode full --out-dir " + dir.string()) == 0);
  const auto summary = soundshap::load_json_file((dir / "kshap_summary.json").string());
  CHECK(summary.at("limit_gap").is_number());
}

TEST_CASE("verify exits by outcome and honours filters") {
  const fs::path dir = fresh_dir("verify");
  CHECK(run("verify --check subset-moments --check efficiency --out-dir " +
            dir.string()) == 0);
  const auto report = soundshap::load_json_file((dir / "verify_report.json").string());
  CHECK(report.size() == 2);
  for (const auto& entry : report) CHECK(entry.at("pass").get<bool>());

  // The injected-fault canary must fail the efficiency check.
  CHECK(run("verify --check efficiency --inject-fault --out-dir " +
            dir.string()) == 1);
  // Unknown filters are an input error.
  CHECK(run("verify --check no-such-check --out-dir " + dir.string()) == 2);
}

TEST_CASE("export-grid round-trips") {
  const fs::path dir = fresh_dir("export");
  write_demo_dataset(dir / "data.csv");
  CHECK(run("export-grid --data " + (dir / "data.csv").string() + " --out-dir " +
            dir.string()) == 0);
  const auto grid = soundshap::grid_from_json(
      soundshap::load_json_file((dir / "grid.json").string()));
  CHECK(grid.dim() == 2);
  const auto mu = soundshap::distribution_from_json(
      soundshap::load_json_file((dir / "empirical.json").string()));
  CHECK(mu.mass_at({1, 1}) == doctest::Approx(0.4));
  const auto star = soundshap::distribution_from_json(
      soundshap::load_json_file((dir / "extended.json").string()));
  CHECK(star.mass_at({0, 0}) == doctest::Approx(0.4 * 0.4));
}
