#include "chc/report.hpp"

#include <algorithm>
#include <cstdio>

namespace chc {

Check& Report::add(const std::string& name, double residual, double tol) {
  checks.push_back({name, residual, tol, residual <= tol});
  return checks.back();
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (const Check& c : other.checks)
    checks.push_back({prefix.empty() ? c.name : prefix + "/" + c.name, c.residual, c.tol, c.pass});
}

bool Report::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double Report::max_residual() const {
  double m = 0.0;
  for (const Check& c : checks) m = std::max(m, c.residual);
  return m;
}

std::string Report::table() const {
  std::string out;
  char line[256];
  for (const Check& c : checks) {
    std::snprintf(line, sizeof(line), "%-58s %12.3e  (tol %8.1e)  %s\n", c.name.c_str(),
                  c.residual, c.tol, c.pass ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace chc
