#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "doctest.h"
#include "soundshap/counterexample.hpp"
#include "soundshap/rng.hpp"
#include "soundshap/serialize.hpp"

using namespace soundshap;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("soundshap_test_" + name);
}

}  // namespace

TEST_CASE("grid, distribution and function JSON round-trips") {
  SplitMix64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + static_cast<int>(rng.bounded(3));
    std::vector<std::vector<double>> fv(d);
    for (int j = 0; j < d; ++j) {
      double v = rng.next_double();
      for (int k = 0; k < 2 + static_cast<int>(rng.bounded(2)); ++k) {
        fv[j].push_back(v);
        v += 0.3 + rng.next_double();
      }
    }
    Grid grid(std::move(fv));
    const Grid grid2 = grid_from_json(to_json(grid));
    CHECK(grid2 == grid);

    std::vector<double> mass(grid.num_cells());
    double total = 0.0;
    for (double& m : mass) {
      m = rng.next_double();
      total += m;
    }
    for (double& m : mass) m /= total;
    DiscreteDistribution dist(grid, mass);
    const DiscreteDistribution dist2 = distribution_from_json(to_json(dist));
    CHECK(dist2.mass() == dist.mass());

    std::vector<double> values(grid.num_cells());
    for (double& v : values) v = -1.0 + 2.0 * rng.next_double();
    TabularFunction f(grid, values);
    const TabularFunction f2 = function_from_json(to_json(f));
    CHECK(f2.values() == f.values());
  }
}

TEST_CASE("counterexample report round-trip") {
  std::vector<std::vector<double>> fv{{0, 1, 2}, {0, 1, 2}};
  const Grid grid(fv);
  const auto mask = ring_support(3, 3, 0.2, 0.4);
  const CounterexampleReport report = find_counterexample(grid, mask, 0);
  const CounterexampleReport back = counterexample_from_json(to_json(report));
  CHECK(back.found == report.found);
  CHECK(back.objective_value == report.objective_value);
  CHECK(back.max_abs_shap_on_support == report.max_abs_shap_on_support);
  CHECK(back.max_abs_shap_on_extended == report.max_abs_shap_on_extended);
  CHECK(back.objective_pair == report.objective_pair);
  CHECK(back.support_mask == report.support_mask);
  CHECK(back.f.values() == report.f.values());
}

TEST_CASE("csv round-trip including empty cells") {
  CsvTable table;
  table.header = {"a", "b", "c"};
  table.rows = {{"1", "2.5", ""}, {format_double(1.0 / 3.0), "", "-7"}};
  const auto path = temp_file("roundtrip.csv");
  write_csv(path.string(), table);
  const CsvTable back = read_csv(path.string());
  CHECK(back.header == table.header);
  CHECK(back.rows == table.rows);
  std::filesystem::remove(path);
}

TEST_CASE("dataset csv") {
  Dataset data{{{0.5, 1.0}, {2.0, 1.0 / 3.0}}};
  const auto path = temp_file("dataset.csv");
  write_dataset_csv(path.string(), data, {"alpha", "beta"});
  const Dataset back = read_dataset_csv(path.string());
  CHECK(back.rows == data.rows);

  // Parse failures name the offending line.
  {
    std::ofstream out(path);
    out << "a,b\n1,2\nx,3\n";
  }
  CHECK_THROWS_WITH_AS(read_dataset_csv(path.string()), doctest::Contains(":3"),
                       std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("format_double round-trips through parsing") {
  SplitMix64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const double v = (rng.next_double() - 0.5) * std::pow(10.0, rng.bounded(6));
    CHECK(std::stod(format_double(v)) == v);
  }
}
