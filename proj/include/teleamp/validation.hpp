#pragma once

#include <string>
#include <vector>

namespace teleamp::validation {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   ///< worst discrepancy found
  double tolerance = 0.0;
  std::string detail;
};

struct Options {
  std::string filter;           ///< run checks whose name contains this substring
  int fock_dim = 30;            ///< truncation for the Fock truncation and oracle checks
  bool mutate_bs_sign = false;  ///< use the mirrored tapping convention throughout
};

struct Report {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::string to_json(int indent = 2) const;
};

std::vector<std::string> check_names();

/// Runs the cross-model invariant checks. Exceptions inside a check are
/// reported as a failure of that check.
Report run(const Options& options);

}  // namespace teleamp::validation
