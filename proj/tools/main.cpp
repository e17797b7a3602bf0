// Command-line front end: exact SHAP tables, KernelSHAP, the sound
// aggregation pipeline, LP counterexample synthesis and the verification
// battery.
//
// Exit codes: 0 success, 1 verification failure, 2 input error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "soundshap/checks.hpp"
#include "soundshap/counterexample.hpp"
#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"
#include "soundshap/kernelshap.hpp"
#include "soundshap/operators.hpp"
#include "soundshap/serialize.hpp"
#include "soundshap/shap.hpp"

namespace {

using namespace soundshap;
namespace fs = std::filesystem;

struct CommonConfig {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonConfig* cfg) {
  cmd->add_option("--out-dir", cfg->out_dir, "Output directory");
  cmd->add_option("--seed", cfg->seed, "RNG seed (default 0, reproducible)");
  cmd->add_option("--tol", cfg->tol, "Certificate tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", cfg->format, "Table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

fs::path out_path(const CommonConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

// Function specs: a JSON file (tabular function or counterexample report),
// or one of the built-ins constant:<c>, additive, product, indicator:<cell>.
TabularFunction resolve_function(const std::string& spec, const Grid& grid) {
  if (spec.rfind("constant:", 0) == 0) {
    return constant_function(grid, std::stod(spec.substr(9)));
  }
  if (spec == "additive") return additive_function(grid);
  if (spec == "product") return product_function(grid);
  if (spec.rfind("indicator:", 0) == 0) {
    return indicator_function(grid, std::stoull(spec.substr(10)));
  }
  const json j = load_json_file(spec);
  TabularFunction f = j.contains("objective_value")
                          ? counterexample_from_json(j).f
                          : function_from_json(j);
  if (!(f.grid() == grid)) {
    throw std::runtime_error(spec + ": function grid does not match the data grid");
  }
  return f;
}

void write_table(const CommonConfig& cfg, const std::string& stem,
                 const CsvTable& table) {
  if (cfg.format == "csv") {
    write_csv(out_path(cfg, stem + ".csv").string(), table);
    return;
  }
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      obj[table.header[c]] = row[c];
    }
    rows.push_back(obj);
  }
  save_json_file(out_path(cfg, stem + ".json").string(), rows);
}

// ---------------------------------------------------------------------------
// shap: per-cell SHAP table plus data-support and extended aggregates
// ---------------------------------------------------------------------------

int cmd_shap(const CommonConfig& cfg, const std::string& data_path,
             const std::string& dist_path, const std::string& function_spec) {
  std::optional<DiscreteDistribution> dist;
  if (!data_path.empty()) {
    dist = empirical_distribution(read_dataset_csv(data_path)).second;
  } else if (!dist_path.empty()) {
    dist = distribution_from_json(load_json_file(dist_path));
  } else {
    // A counterexample report carries its own grid and support mask; use the
    // uniform distribution on that mask.
    const json j = load_json_file(function_spec);
    if (!j.contains("objective_value")) {
      throw std::runtime_error("need --data or --dist (or a counterexample report)");
    }
    const CounterexampleReport report = counterexample_from_json(j);
    dist = uniform_on_mask(report.f.grid(), report.support_mask);
  }
  const Grid& grid = dist->grid();
  const int d = grid.dim();
  const TabularFunction f = resolve_function(function_spec, grid);
  const DiscreteDistribution star = extended_distribution(*dist);
  const std::vector<bool> in_mu = support_mask(*dist);
  const std::vector<bool> in_star = support_mask(star);

  CsvTable table;
  for (int j = 0; j < d; ++j) table.header.push_back("idx" + std::to_string(j));
  for (int j = 0; j < d; ++j) table.header.push_back("x" + std::to_string(j));
  table.header.push_back("f");
  for (int j = 0; j < d; ++j) table.header.push_back("phi" + std::to_string(j));
  table.header.push_back("in_support_mu");
  table.header.push_back("in_support_mu_star");

  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const Cell cell = grid.cell_at(flat);
    const ShapReport rep = shap_all(*dist, f, cell);
    std::vector<std::string> row;
    for (int j = 0; j < d; ++j) row.push_back(std::to_string(cell[j]));
    for (const double v : grid.cell_values(cell)) row.push_back(format_double(v));
    row.push_back(format_double(f.at_flat(flat)));
    for (const double v : rep.per_feature) row.push_back(format_double(v));
    row.push_back(in_mu[flat] ? "1" : "0");
    row.push_back(in_star[flat] ? "1" : "0");
    table.rows.push_back(std::move(row));
  }
  write_table(cfg, "shap_cells", table);

  json summary;
  summary["d"] = d;
  summary["num_cells"] = grid.num_cells();
  summary["base_value"] =
      value_function(*dist, f, grid.cell_at(0), FeatureSubset::empty(d));
  json agg_mu = json::array(), agg_star = json::array();
  for (int i = 0; i < d; ++i) {
    agg_mu.push_back(aggregate_shap(*dist, *dist, f, i));
    agg_star.push_back(aggregate_shap(star, star, f, i));
  }
  summary["aggregate_mu"] = agg_mu;
  summary["aggregate_mu_star"] = agg_star;
  save_json_file(out_path(cfg, "shap_summary.json").string(), summary);
  std::printf("wrote %s and shap_summary.json under %s\n",
              cfg.format == "csv" ? "shap_cells.csv" : "shap_cells.json",
              cfg.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// kshap: per-row KernelSHAP values with aggregates and the error term
// ---------------------------------------------------------------------------

int cmd_kshap(const CommonConfig& cfg, const std::string& data_path,
              const std::string& function_spec, const std::string& mode,
              int samples, bool scramble, int feature) {
  Dataset X = read_dataset_csv(data_path);
  if (scramble) X = scramble_columns(X, cfg.seed);
  const auto [grid, mu] = empirical_distribution(X);
  const TabularFunction f = resolve_function(function_spec, grid);
  const int d = grid.dim();

  KernelShapConfig kcfg;
  kcfg.mode = mode == "sampled" ? KernelShapMode::kSampled
                                : KernelShapMode::kFullEnumeration;
  kcfg.num_subset_samples = samples;
  kcfg.rng_seed = cfg.seed;

  CsvTable table;
  table.header.push_back("row");
  for (int j = 0; j < d; ++j) table.header.push_back("x" + std::to_string(j));
  for (int j = 0; j < d; ++j) table.header.push_back("k" + std::to_string(j));
  std::vector<double> aggregates(d, 0.0);
  for (std::size_t r = 0; r < X.rows.size(); ++r) {
    const KernelShapReport rep = kernelshap_point(X, f, X.rows[r], kcfg);
    std::vector<std::string> row{std::to_string(r)};
    for (const double v : X.rows[r]) row.push_back(format_double(v));
    for (int i = 0; i < d; ++i) {
      row.push_back(format_double(rep.per_feature[i]));
      aggregates[i] += std::abs(rep.per_feature[i]) / static_cast<double>(X.rows.size());
    }
    table.rows.push_back(std::move(row));
  }
  write_table(cfg, "kshap_rows", table);

  json summary;
  summary["d"] = d;
  summary["n"] = X.rows.size();
  summary["mode"] = mode;
  summary["samples"] = samples;
  summary["seed"] = cfg.seed;
  summary["scrambled"] = scramble;
  summary["aggregate"] = aggregates;
  summary["limit_gap"] = aggregate_limit_gap(X, extended_distribution(mu), f, kcfg);
  if (feature >= 0) {
    summary["feature"] = feature;
    summary["aggregate_feature"] = aggregates.at(static_cast<std::size_t>(feature));
  }
  save_json_file(out_path(cfg, "kshap_summary.json").string(), summary);
  std::printf("wrote kshap_rows.%s and kshap_summary.json under %s\n",
              cfg.format.c_str(), cfg.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// sound-aggregate: scramble, aggregate KernelSHAP, reconstruction certificate
// ---------------------------------------------------------------------------

int cmd_sound_aggregate(const CommonConfig& cfg, const std::string& data_path,
                        const std::string& function_spec, int feature,
                        const std::string& mode, int samples) {
  const Dataset X = read_dataset_csv(data_path);
  const Dataset Xstar = scramble_columns(X, cfg.seed);
  const auto [grid, mu] = empirical_distribution(X);
  const DiscreteDistribution star = extended_distribution(mu);
  const TabularFunction f = resolve_function(function_spec, grid);
  const int d = grid.dim();
  if (feature < 0 || feature >= d) {
    throw std::runtime_error("--feature must name a 0-based feature index");
  }

  KernelShapConfig kcfg;
  kcfg.mode = mode == "sampled" ? KernelShapMode::kSampled
                                : KernelShapMode::kFullEnumeration;
  kcfg.num_subset_samples = samples;
  kcfg.rng_seed = cfg.seed;

  // The certificate applies to functions with range [0,1]; work on the
  // normalized copy and report the scaling.
  double lo = f.values()[0], hi = f.values()[0];
  const std::vector<bool> star_mask = support_mask(star);
  for (std::size_t k = 0; k < star_mask.size(); ++k) {
    if (!star_mask[k]) continue;
    lo = std::min(lo, f.at_flat(k));
    hi = std::max(hi, f.at_flat(k));
  }
  const double scale = hi - lo;
  std::vector<double> norm(f.values().size(), 0.0);
  for (std::size_t k = 0; k < norm.size(); ++k) {
    norm[k] = scale > 0.0 ? (f.at_flat(k) - lo) / scale : 0.0;
  }
  const TabularFunction fn(grid, std::move(norm));

  const double agg_scrambled = aggregate_kernelshap(Xstar, fn, feature, kcfg);
  const double agg_unscrambled = aggregate_kernelshap(X, fn, feature, kcfg);
  const double gap = aggregate_limit_gap(Xstar, star, fn, kcfg);
  const TabularFunction g = reconstruct_determined(star, fn, feature);
  double dist2 = 0.0;
  for (std::size_t k = 0; k < grid.num_cells(); ++k) {
    const double diff = fn.at_flat(k) - g.at_flat(k);
    dist2 += star.mass()[k] * diff * diff;
  }
  const double bound = d * d * (agg_scrambled + gap) + cfg.tol;

  json out;
  out["feature"] = feature;
  out["d"] = d;
  out["n"] = X.rows.size();
  out["seed"] = cfg.seed;
  out["mode"] = mode;
  out["normalization"] = {{"offset", lo}, {"scale", scale}};
  out["aggregate_kernelshap_scrambled"] = agg_scrambled;
  out["aggregate_kernelshap_unscrambled"] = agg_unscrambled;
  out["limit_gap"] = gap;
  out["reconstruction_distance_sq"] = dist2;
  out["bound"] = bound;
  out["certificate_ok"] = dist2 <= bound;
  out["g"] = to_json(g);
  save_json_file(out_path(cfg, "sound_aggregate.json").string(), out);
  std::printf("aggregate(scrambled)=%.6g aggregate(original)=%.6g limit_gap=%.3g "
              "distance_sq=%.6g bound=%.6g certificate=%s\n",
              agg_scrambled, agg_unscrambled, gap, dist2, bound,
              dist2 <= bound ? "ok" : "VIOLATED");
  return dist2 <= bound ? 0 : 1;
}

// ---------------------------------------------------------------------------
// counterexample: LP synthesis plus heatmap-shaped grids
// ---------------------------------------------------------------------------

std::vector<bool> resolve_mask(const std::string& spec, int d1, int d2) {
  if (spec.rfind("ring:", 0) == 0) {
    const auto colon = spec.find(':', 5);
    if (colon == std::string::npos) {
      throw std::runtime_error("--mask ring spec needs ring:<rin>:<rout>");
    }
    return ring_support(d1, d2, std::stod(spec.substr(5, colon - 5)),
                        std::stod(spec.substr(colon + 1)));
  }
  const json j = load_json_file(spec);
  const auto raw = (j.is_array() ? j : j.at("mask")).get<std::vector<int>>();
  if (raw.size() != static_cast<std::size_t>(d1) * d2) {
    throw std::runtime_error("mask length does not match the grid");
  }
  std::vector<bool> mask(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) mask[k] = raw[k] != 0;
  return mask;
}

void write_heatmap(const CommonConfig& cfg, const std::string& stem,
                   const Grid& grid, const std::vector<double>& values,
                   const std::vector<bool>& visible) {
  CsvTable table;
  table.header.push_back("x0\\x1");
  for (const double v : grid.values(1)) table.header.push_back(format_double(v));
  for (int a = 0; a < grid.size(0); ++a) {
    std::vector<std::string> row{format_double(grid.values(0)[a])};
    for (int b = 0; b < grid.size(1); ++b) {
      const std::size_t flat = grid.flat_index({a, b});
      row.push_back(visible[flat] ? format_double(values[flat]) : "");
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(out_path(cfg, stem + ".csv").string(), table);
}

int cmd_counterexample(const CommonConfig& cfg, const std::string& grid_spec,
                       const std::string& mask_spec, int feature,
                       bool full_extended, double threshold) {
  const auto x = grid_spec.find('x');
  if (x == std::string::npos) {
    throw std::runtime_error("--grid expects <d1>x<d2>, for example 3x3");
  }
  const int d1 = std::stoi(grid_spec.substr(0, x));
  const int d2 = std::stoi(grid_spec.substr(x + 1));
  std::vector<std::vector<double>> fv(2);
  for (int k = 0; k < d1; ++k) fv[0].push_back(k);
  for (int k = 0; k < d2; ++k) fv[1].push_back(k);
  const Grid grid(std::move(fv));
  const std::vector<bool> mask = resolve_mask(mask_spec, d1, d2);

  CounterexampleOptions options;
  options.full_extended = full_extended;
  options.objective_threshold = threshold;
  const CounterexampleReport report = find_counterexample(grid, mask, feature, options);
  save_json_file(out_path(cfg, "counterexample.json").string(), to_json(report));

  if (report.found) {
    const DiscreteDistribution mu = uniform_on_mask(grid, mask);
    const DiscreteDistribution star = extended_distribution(mu);
    const std::vector<bool> star_mask = support_mask(star);
    std::vector<double> shap(grid.num_cells(), 0.0);
    for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
      if (star_mask[flat]) {
        shap[flat] = shap_value(mu, report.f, grid.cell_at(flat), feature);
      }
    }
    const std::vector<bool> all(grid.num_cells(), true);
    write_heatmap(cfg, "f_values", grid, report.f.values(), all);
    write_heatmap(cfg, "shap_in_support", grid, shap, mask);
    write_heatmap(cfg, "shap_extended", grid, shap, star_mask);
    std::printf("counterexample found: objective=%.6g support_shap=%.3g "
                "extended_shap=%.3g (report + 3 grids under %s)\n",
                report.objective_value, report.max_abs_shap_on_support,
                report.max_abs_shap_on_extended, cfg.out_dir.c_str());
  } else {
    std::printf("no counterexample: best objective %.3g over %d pairs\n",
                report.best_objective, report.pairs_tried);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify: the property battery
// ---------------------------------------------------------------------------

int cmd_verify(const CommonConfig& cfg, const std::vector<std::string>& filters,
               int only_dimension, bool inject_fault, std::string report_path) {
  CheckOptions options;
  options.seed = cfg.seed;
  options.inject_fault = inject_fault;
  options.only_dimension = only_dimension;
  const std::vector<CheckResult> results = run_checks(filters, options);
  if (results.empty()) {
    throw std::runtime_error("no checks match the given filters");
  }
  json report = json::array();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-4s %-48s residual=%.3e %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.worst_residual, r.details.c_str());
    if (!r.pass) ++failures;
    report.push_back({{"name", r.name},
                      {"pass", r.pass},
                      {"worst_residual", r.worst_residual},
                      {"seed", r.seed},
                      {"details", r.details}});
  }
  if (report_path.empty()) {
    report_path = out_path(cfg, "verify_report.json").string();
  }
  save_json_file(report_path, report);
  std::printf("%zu checks, %d failed; report at %s\n", results.size(), failures,
              report_path.c_str());
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// export-grid: dataset -> grid / empirical / extended JSON
// ---------------------------------------------------------------------------

int cmd_export_grid(const CommonConfig& cfg, const std::string& data_path) {
  const auto [grid, mu] = empirical_distribution(read_dataset_csv(data_path));
  save_json_file(out_path(cfg, "grid.json").string(), to_json(grid));
  save_json_file(out_path(cfg, "empirical.json").string(), to_json(mu));
  save_json_file(out_path(cfg, "extended.json").string(),
                 to_json(extended_distribution(mu)));
  std::printf("wrote grid.json, empirical.json, extended.json under %s\n",
              cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sound aggregate SHAP over extended distributions"};
  app.require_subcommand(1);

  CommonConfig cfg;

  // shap
  auto* shap_cmd = app.add_subcommand("shap", "Exact SHAP table and aggregates");
  std::string data_path, dist_path, function_spec = "product";
  shap_cmd->add_option("--data", data_path, "Dataset CSV (header row)");
  shap_cmd->add_option("--dist", dist_path, "Distribution JSON");
  shap_cmd->add_option("--function", function_spec,
                       "Function: JSON file, counterexample report, or "
                       "constant:<c>|additive|product|indicator:<cell>");
  add_common(shap_cmd, &cfg);

  // kshap
  auto* kshap_cmd = app.add_subcommand("kshap", "KernelSHAP per data row");
  std::string kshap_data, kshap_function = "product", kshap_mode = "full";
  int kshap_samples = 256, kshap_feature = -1;
  bool kshap_scramble = false;
  kshap_cmd->add_option("--data", kshap_data, "Dataset CSV")->required();
  kshap_cmd->add_option("--function", kshap_function, "Function spec");
  kshap_cmd->add_option("--mode", kshap_mode, "sampled or full")
      ->check(CLI::IsMember({"sampled", "full"}));
  kshap_cmd->add_option("--samples", kshap_samples, "Subset draws in sampled mode");
  kshap_cmd->add_flag("--scramble", kshap_scramble,
                      "Permute each column independently first");
  kshap_cmd->add_option("--feature", kshap_feature, "Highlight one feature (0-based)");
  add_common(kshap_cmd, &cfg);

  // sound-aggregate
  auto* sound_cmd = app.add_subcommand(
      "sound-aggregate", "Scramble, aggregate KernelSHAP, certificate");
  std::string sound_data, sound_function = "product", sound_mode = "full";
  int sound_feature = 0, sound_samples = 256;
  sound_cmd->add_option("--data", sound_data, "Dataset CSV")->required();
  sound_cmd->add_option("--function", sound_function, "Function spec");
  sound_cmd->add_option("--feature", sound_feature, "Feature of interest (0-based)")
      ->required();
  sound_cmd->add_option("--mode", sound_mode, "sampled or full")
      ->check(CLI::IsMember({"sampled", "full"}));
  sound_cmd->add_option("--samples", sound_samples, "Subset draws in sampled mode");
  add_common(sound_cmd, &cfg);

  // counterexample
  auto* ce_cmd = app.add_subcommand("counterexample",
                                    "Zero-SHAP-on-support function synthesis");
  std::string ce_grid = "3x3", ce_mask = "ring:0.2:0.4";
  int ce_feature = 0;
  bool ce_full = false;
  double ce_threshold = 1e-6;
  ce_cmd->add_option("--grid", ce_grid, "Grid as <d1>x<d2>");
  ce_cmd->add_option("--mask", ce_mask, "ring:<rin>:<rout> or a mask JSON file");
  ce_cmd->add_option("--feature", ce_feature, "Feature of interest (0-based)");
  ce_cmd->add_flag("--full-extended", ce_full,
                   "Constrain SHAP to zero on the whole extended support");
  ce_cmd->add_option("--threshold", ce_threshold, "Objective success threshold");
  add_common(ce_cmd, &cfg);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification battery");
  std::vector<std::string> verify_checks;
  std::string verify_report;
  int verify_d = 0;
  bool verify_fault = false;
  verify_cmd->add_option("--check", verify_checks,
                         "Only checks whose name contains this (repeatable)");
  verify_cmd->add_option("--d", verify_d, "Restrict instance dimension");
  verify_cmd->add_flag("--inject-fault", verify_fault,
                       "Negate one binomial weight (canary; must fail)");
  verify_cmd->add_option("--report", verify_report, "Report JSON path");
  add_common(verify_cmd, &cfg);

  // export-grid
  auto* export_cmd =
      app.add_subcommand("export-grid", "Dataset to grid/empirical/extended JSON");
  std::string export_data;
  export_cmd->add_option("--data", export_data, "Dataset CSV")->required();
  add_common(export_cmd, &cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (shap_cmd->parsed()) {
      return cmd_shap(cfg, data_path, dist_path, function_spec);
    }
    if (kshap_cmd->parsed()) {
      return cmd_kshap(cfg, kshap_data, kshap_function, kshap_mode, kshap_samples,
                       kshap_scramble, kshap_feature);
    }
    if (sound_cmd->parsed()) {
      return cmd_sound_aggregate(cfg, sound_data, sound_function, sound_feature,
                                 sound_mode, sound_samples);
    }
    if (ce_cmd->parsed()) {
      return cmd_counterexample(cfg, ce_grid, ce_mask, ce_feature, ce_full,
                                ce_threshold);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(cfg, verify_checks, verify_d, verify_fault, verify_report);
    }
    if (export_cmd->parsed()) {
      return cmd_export_grid(cfg, export_data);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
