#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "soundshap/counterexample.hpp"
#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"

namespace soundshap {

using json = nlohmann::json;

/// Grid as {"features": [[...], ...]}; distributions and functions add a
/// row-major flat "mass"/"values" array (feature 0 is the slowest axis).
json to_json(const Grid& grid);
json to_json(const DiscreteDistribution& dist);
json to_json(const TabularFunction& f);
json to_json(const CounterexampleReport& report);

Grid grid_from_json(const json& j);
DiscreteDistribution distribution_from_json(const json& j);
TabularFunction function_from_json(const json& j);
CounterexampleReport counterexample_from_json(const json& j);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

/// Plain CSV: one header row, comma separators, '.' decimals, LF newlines.
/// Cells may be empty. Every writer output parses back through read_csv.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Dataset with a header row of feature names. Parse errors carry line
/// numbers.
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& names = {});
Dataset read_dataset_csv(const std::string& path);

}  // namespace soundshap
