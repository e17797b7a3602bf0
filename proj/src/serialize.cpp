#include "soundshap/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace soundshap {

json to_json(const Grid& grid) {
  json features = json::array();
  for (int j = 0; j < grid.dim(); ++j) features.push_back(grid.values(j));
  return json{{"features", features}};
}

json to_json(const DiscreteDistribution& dist) {
  json j = to_json(dist.grid());
  j["mass"] = dist.mass();
  return j;
}

json to_json(const TabularFunction& f) {
  json j = to_json(f.grid());
  j["values"] = f.values();
  return j;
}

json to_json(const CounterexampleReport& report) {
  json j;
  j["found"] = report.found;
  j["feature"] = report.feature;
  j["objective_value"] = report.objective_value;
  j["best_objective"] = report.best_objective;
  j["max_abs_shap_on_support"] = report.max_abs_shap_on_support;
  j["max_abs_shap_on_extended"] = report.max_abs_shap_on_extended;
  j["objective_pair"] = {report.objective_pair.first, report.objective_pair.second};
  j["pairs_tried"] = report.pairs_tried;
  j["mask"] = json::array();
  for (bool b : report.support_mask) j["mask"].push_back(b ? 1 : 0);
  j["function"] = to_json(report.f);
  return j;
}

Grid grid_from_json(const json& j) {
  if (!j.contains("features")) {
    throw std::invalid_argument("grid JSON needs a \"features\" array");
  }
  return Grid(j.at("features").get<std::vector<std::vector<double>>>());
}

DiscreteDistribution distribution_from_json(const json& j) {
  Grid grid = grid_from_json(j);
  if (!j.contains("mass")) {
    throw std::invalid_argument("distribution JSON needs a \"mass\" array");
  }
  return {std::move(grid), j.at("mass").get<std::vector<double>>()};
}

TabularFunction function_from_json(const json& j) {
  Grid grid = grid_from_json(j);
  if (!j.contains("values")) {
    throw std::invalid_argument("function JSON needs a \"values\" array");
  }
  return {std::move(grid), j.at("values").get<std::vector<double>>()};
}

CounterexampleReport counterexample_from_json(const json& j) {
  CounterexampleReport report{.found = j.at("found").get<bool>(),
                              .f = function_from_json(j.at("function"))};
  report.feature = j.at("feature").get<int>();
  report.objective_value = j.at("objective_value").get<double>();
  report.best_objective = j.value("best_objective", report.objective_value);
  report.max_abs_shap_on_support = j.at("max_abs_shap_on_support").get<double>();
  report.max_abs_shap_on_extended = j.at("max_abs_shap_on_extended").get<double>();
  report.pairs_tried = j.value("pairs_tried", 0);
  const auto pair = j.at("objective_pair").get<std::vector<std::size_t>>();
  if (pair.size() != 2) {
    throw std::invalid_argument("objective_pair must hold two cell indices");
  }
  report.objective_pair = {pair[0], pair[1]};
  for (const auto& v : j.at("mask")) {
    report.support_mask.push_back(v.get<int>() != 0);
  }
  return report;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto emit_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ",";
      out << row[k];
    }
    out << "\n";
  };
  emit_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("CSV row width does not match header");
    }
    emit_row(row);
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (line_no == 1) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(table.header.size()) +
                                 " cells, found " + std::to_string(cells.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (line_no == 0) throw std::runtime_error(path + " is empty");
  return table;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& names) {
  CsvTable table;
  const int d = data.dim();
  if (!names.empty() && static_cast<int>(names.size()) != d) {
    throw std::invalid_argument("feature name count does not match dataset width");
  }
  for (int j = 0; j < d; ++j) {
    table.header.push_back(names.empty() ? "x" + std::to_string(j + 1) : names[j]);
  }
  for (const auto& row : data.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(format_double(v));
    table.rows.push_back(std::move(cells));
  }
  write_csv(path, table);
}

Dataset read_dataset_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  Dataset data;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<double> row;
    row.reserve(table.rows[r].size());
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      const std::string& cell = table.rows[r][c];
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(r + 2) +
                                 ": cannot parse \"" + cell + "\" as a number");
      }
    }
    data.rows.push_back(std::move(row));
  }
  if (data.rows.empty()) {
    throw std::runtime_error(path + " holds no data rows");
  }
  return data;
}

}  // namespace soundshap
