#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "memfem/mms.hpp"
#include "memfem/stepper.hpp"

namespace memfem {

struct FieldErrors {
  std::vector<double> conc;  // L2 errors per species
  std::vector<double> flux;
};

// One row of a refinement study: errors at the final time plus the observed
// orders against the previous (coarser) row.  Rate order: u1, u2, s1, s2;
// NaN on the coarsest level.
struct ConvergenceRecord {
  int M = 0;
  double h = 0;
  FieldErrors errors;
  std::array<double, 4> rates{};
  double wall_seconds = 0;
  int steps = 0;
  long picard_total = 0;
  int picard_max = 0;
};

double convergence_rate(double coarse, double fine);

// Cell-wise degree-10 quadrature of |exact - discrete|^2 at state.t.
// Reference fields take (species, t, x, y).
FieldErrors compute_errors(const FunctionSpacePair& sp, const StateVector& state,
                           const std::function<double(int, double, double, double)>& conc_exact,
                           const std::function<Eigen::Vector2d(int, double, double, double)>& flux_exact);
FieldErrors compute_errors(const FunctionSpacePair& sp, const StateVector& state,
                           const ManufacturedSolution& exact);

// Full refinement sweep against the shipped manufactured problem with dt = h.
// Ms must be strictly increasing and even; jobs > 1 runs levels concurrently.
// `tweak`, when set, edits the problem configuration before each level runs
// (parameter overrides; errors are still measured against the shipped exact
// solution).
std::vector<ConvergenceRecord> run_convergence(
    int order, const std::vector<int>& Ms, double T, int jobs = 1,
    DtPolicy policy = DtPolicy::WarnAndProceed, const PicardOptions& picard = {},
    const std::function<void(ProblemConfig&)>& tweak = {});

// Deterministic emitters: no timings, fixed formats.  The CSV carries the
// table-style 4-significant-digit columns plus full-precision error columns.
void write_csv(const std::vector<ConvergenceRecord>& records, std::ostream& out);
void write_markdown(const std::vector<ConvergenceRecord>& records, std::ostream& out);
void write_svg(const std::vector<ConvergenceRecord>& records, std::ostream& out);

}  // namespace memfem
