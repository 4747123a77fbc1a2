#pragma once

#include <string>
#include <vector>

namespace memfem {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // worst observed measurement vs. the tolerance
};

// Self-contained invariant suites, each deterministic (fixed RNG seeds).
CheckResult check_quadrature_exactness();
CheckResult check_commuting_diagram();
CheckResult check_facet_moments();
CheckResult check_energy_decay();
CheckResult check_contraction();
CheckResult check_interface_compatibility();

// The suites executed by the command-line `check` mode.
std::vector<CheckResult> run_checks();

}  // namespace memfem
