#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <vector>

#include "memfem/elements.hpp"

namespace memfem {

using SpMat = Eigen::SparseMatrix<double>;

// Reaction evaluator f_i(u_1..u_N) plus a Lipschitz bound over max-norm balls.
struct Nonlinearity {
  std::function<double(int, const std::vector<double>&)> f;
  std::function<double(double)> lipschitz;
};

// What to do when the contraction condition dt * L < 2 is violated.
enum class DtPolicy { HardError, WarnAndProceed };

struct ProblemConfig {
  int num_species = 0;
  std::vector<double> kappa;     // diffusivities, > 0
  std::vector<double> membrane;  // permeabilities K_i > 0; +inf disables the membrane term
  Nonlinearity reaction;
  double lipschitz_estimate = 0;
  DtPolicy dt_policy = DtPolicy::HardError;

  // Data callables (species, t, x, y); source may be empty.
  std::function<double(int, double, double, double)> dirichlet;  // scalar trace on y in {0,1}
  std::function<double(int, double, double, double)> neumann;    // flux . outward normal on x in {0,1}
  std::function<double(int, double, double, double)> source;

  void validate() const;  // throws on nonpositive kappa/K/L or missing pieces
};

// Essential flux constraints on the Neumann boundary, one row per edge moment.
struct NeumannTable {
  std::vector<int> dofs;     // constrained flux dofs, strictly ascending
  std::vector<int> edges;    // owning boundary edge
  std::vector<int> moments;  // moment index within that edge
};

struct AssembledOperators {
  std::vector<SpMat> flux_op;  // per species: kappa^{-1} flux mass + membrane penalty
  SpMat div_op;                // (scalar test, div flux trial); species independent
  SpMat conc_mass;             // scalar mass; species independent
  NeumannTable neumann;
};

// kappa^{-1}-weighted flux mass plus, for finite membrane_K, the penalty
// K^{-1} <v.n, w.n> over Interface edges.
SpMat assemble_flux_operator(const FunctionSpacePair& sp, double kappa, double membrane_K);

SpMat assemble_divergence_operator(const FunctionSpacePair& sp);

SpMat assemble_conc_mass(const FunctionSpacePair& sp);

AssembledOperators assemble_operators(const FunctionSpacePair& sp, const ProblemConfig& cfg);

// Reaction load vectors, one per species: d_i[m] = integral of
// f_i(u_1..u_N) psi_m with a degree-8 rule.  Throws if the reaction evaluates
// to a non-finite value.
std::vector<Eigen::VectorXd> assemble_reaction(const FunctionSpacePair& sp, const ProblemConfig& cfg,
                                               const std::vector<Eigen::VectorXd>& conc);

// Natural Dirichlet boundary term: entries -integral of g (v . n_out) over
// BoundaryDirichlet edges, n_out the outward domain normal.
Eigen::VectorXd assemble_dirichlet_rhs(const FunctionSpacePair& sp, const ProblemConfig& cfg,
                                       int species, double t);

// Volume load: integral of s(x,y) psi dx with a degree-8 rule.
Eigen::VectorXd assemble_scalar_load(const FunctionSpacePair& sp,
                                     const std::function<double(double, double)>& s);

NeumannTable neumann_constraint_table(const FunctionSpacePair& sp);

// Edge moments of the prescribed flux . n data at time t, aligned with table rows.
Eigen::VectorXd neumann_constraint_values(const FunctionSpacePair& sp, const NeumannTable& table,
                                          const ProblemConfig& cfg, int species, double t);

// MatrixMarket coordinate format, 1-based indices.
void write_matrix_market(const SpMat& m, std::ostream& out);

}  // namespace memfem
