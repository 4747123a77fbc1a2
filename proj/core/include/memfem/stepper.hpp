#pragma once

#include <functional>
#include <utility>

#include "memfem/linsolve.hpp"

namespace memfem {

struct StateVector {
  double t = 0;
  std::vector<Eigen::VectorXd> flux;  // per species
  std::vector<Eigen::VectorXd> conc;
};

struct PicardOptions {
  double tol_rel = 1e-10;
  double tol_abs = 1e-14;  // absolute floor on the increment norm
  int max_iter = 50;
  bool throw_on_max_iter = true;
  // Optional initial guess for the new scalar state; by default the seed
  // solve carries only the reaction term of the old state.
  const std::vector<Eigen::VectorXd>* seed_conc = nullptr;
};

struct PicardReport {
  int iterations = 0;  // corrector solves after the seed solve
  bool converged = false;
  double first_increment = 0;
  double final_increment = 0;
  std::vector<double> contraction_ratios;  // consecutive increment quotients
  double scheme_residual = 0;  // l2 residual of the nonlinear step equations
};

// Energy norm of the fixed-point map: sqrt(dt * a(dflux,dflux) + 2 |dconc|^2),
// summed over species, with a the flux operator including the membrane term.
double phi_norm(const AssembledOperators& ops, double dt,
                const std::vector<Eigen::VectorXd>& dflux,
                const std::vector<Eigen::VectorXd>& dconc);

// Scalar part projected cellwise, flux part solving the flux equation against
// it with boundary data at t0.
StateVector initial_data(const FunctionSpacePair& sp, const AssembledOperators& ops,
                         const ProblemConfig& cfg,
                         const std::function<double(int, double, double)>& conc0, double t0 = 0);

// One step of the averaged two-level scheme, the nonlinear term resolved by
// fixed-point iteration; dt comes from the block system.  Neumann data is
// imposed at the new time level, Dirichlet/source data enters as the average
// of the two endpoint evaluations.
std::pair<StateVector, PicardReport> cn_step(const FunctionSpacePair& sp,
                                             const AssembledOperators& ops, const BlockSystem& sys,
                                             const ProblemConfig& cfg, const StateVector& state,
                                             const PicardOptions& options = {});

using StepObserver = std::function<void(int step, double t, const StateVector&, const PicardReport&)>;

// Integrates from t=0 to T with fixed dt (T/dt must be integral to 1e-12).
// Assembles operators, factors the block system once, projects initial data
// from conc0 and advances, invoking the observer after every accepted step.
StateVector run_transient(const FunctionSpacePair& sp, const ProblemConfig& cfg, double T, double dt,
                          const std::function<double(int, double, double)>& conc0,
                          const StepObserver& observer = {}, const PicardOptions& options = {});

}  // namespace memfem
