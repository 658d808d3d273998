#pragma once

#include <string>
#include <vector>

namespace chc {

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Per-check results of an identity suite or CLI subcommand.  Exit-code
/// contract: 0 iff all checks pass.
struct Report {
  std::string command;
  std::vector<Check> checks;

  Check& add(const std::string& name, double residual, double tol);
  void merge(const Report& other, const std::string& prefix = "");
  bool all_pass() const;
  double max_residual() const;
  /// One "name residual tol PASS/FAIL" line per check.
  std::string table() const;
};

}  // namespace chc
