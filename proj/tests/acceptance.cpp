// Acceptance suite: runs every gate criterion and prints one line per
// criterion. Exits nonzero when any fails.

#include <cstdio>
#include <string>
#include <vector>

#include "soundshap/checks.hpp"

int main(int argc, char** argv) {
  soundshap::CheckOptions options;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--seed" && a + 1 < argc) {
      options.seed = std::stoull(argv[++a]);
    }
  }

  const std::vector<soundshap::CheckResult> results =
      soundshap::run_checks({"criterion-"}, options);
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-4s %-48s residual=%.3e %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.worst_residual, r.details.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}
