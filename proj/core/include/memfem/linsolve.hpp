#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

#include "memfem/assembly.hpp"

namespace memfem {

// Sparse matrix with essential constraints baked in: constrained rows are
// identity, their columns are moved out so the factorization can be reused
// while the constraint values change.
struct ConstrainedMatrix {
  SpMat matrix;                 // constrained operator
  SpMat moved_cols;             // n x n_constrained, the removed column entries
  std::vector<int> rows;        // constrained row indices, ascending
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu;
};

ConstrainedMatrix factor_constrained(const SpMat& m, const std::vector<int>& rows);

// Solves with the given constraint values; verifies the relative residual of
// the constrained system is <= 1e-10 and throws otherwise.
Eigen::VectorXd solve_constrained(const ConstrainedMatrix& cm, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& values);

// Per-species saddle block [[A, -B^T], [B, (2/dt) C]], Neumann flux rows
// constrained, factored once per time-step size.
struct BlockSystem {
  int n_flux = 0, n_conc = 0, n_total = 0;
  double dt = 0;
  std::vector<ConstrainedMatrix> species;
};

BlockSystem build_block_system(const AssembledOperators& ops, double dt);

// One species solve; rhs has flux rows first, then scalar rows.
Eigen::VectorXd solve(const BlockSystem& sys, int species, const Eigen::VectorXd& rhs,
                      const Eigen::VectorXd& constraint_values);

}  // namespace memfem
