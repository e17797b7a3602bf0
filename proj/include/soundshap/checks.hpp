#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace soundshap {

struct CheckResult {
  std::string name;
  bool pass = false;
  /// Worst residual observed, in the units of the check's tolerance.
  double worst_residual = 0.0;
  std::uint64_t seed = 0;
  std::string details;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  /// Negate one binomial weight inside the efficiency check's own SHAP
  /// computation. A deliberate canary: the check must then fail.
  bool inject_fault = false;
  /// Restrict dimension-parameterized checks to this d (0 = all).
  int only_dimension = 0;
};

/// Names registered with the battery, in run order. The names prefixed
/// "criterion-" form the acceptance gate; the rest are extra invariant
/// suites.
std::vector<std::string> check_names();

CheckResult run_check(const std::string& name, const CheckOptions& options = {});

/// Runs every check whose name contains one of the filters (all checks when
/// the filter list is empty).
std::vector<CheckResult> run_checks(const std::vector<std::string>& filters = {},
                                    const CheckOptions& options = {});

}  // namespace soundshap
