#include "memfem/linsolve.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace memfem {

namespace {

constexpr double kResidualTol = 1e-10;

}  // namespace

ConstrainedMatrix factor_constrained(const SpMat& m, const std::vector<int>& rows) {
  if (m.rows() != m.cols()) throw std::invalid_argument("factor_constrained: matrix must be square");
  const int n = static_cast<int>(m.rows());
  std::vector<int> pos(n, -1);
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= n) throw std::invalid_argument("factor_constrained: row out of range");
    if (k > 0 && rows[k] <= rows[k - 1]) throw std::invalid_argument("factor_constrained: rows must ascend");
    pos[rows[k]] = static_cast<int>(k);
  }

  std::vector<Eigen::Triplet<double>> keep, moved;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SpMat::InnerIterator it(m, c); it; ++it) {
      if (pos[it.row()] >= 0) continue;  // row replaced by identity
      if (pos[it.col()] >= 0)
        moved.emplace_back(static_cast<int>(it.row()), pos[it.col()], it.value());
      else
        keep.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int r : rows) keep.emplace_back(r, r, 1.0);

  ConstrainedMatrix cm;
  cm.rows = rows;
  cm.matrix.resize(n, n);
  cm.matrix.setFromTriplets(keep.begin(), keep.end());
  cm.moved_cols.resize(n, static_cast<int>(rows.size()));
  cm.moved_cols.setFromTriplets(moved.begin(), moved.end());
  cm.lu = std::make_unique<Eigen::SparseLU<SpMat>>();
  cm.lu->compute(cm.matrix);
  if (cm.lu->info() != Eigen::Success)
    throw std::runtime_error("factor_constrained: factorization failed (singular operator?)");
  return cm;
}

Eigen::VectorXd solve_constrained(const ConstrainedMatrix& cm, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& values) {
  if (rhs.size() != cm.matrix.rows())
    throw std::invalid_argument("solve_constrained: rhs size mismatch");
  if (values.size() != static_cast<Eigen::Index>(cm.rows.size()))
    throw std::invalid_argument("solve_constrained: constraint value count mismatch");

  Eigen::VectorXd b = rhs;
  if (values.size() > 0) b -= cm.moved_cols * values;
  for (size_t k = 0; k < cm.rows.size(); ++k) b[cm.rows[k]] = values[k];

  Eigen::VectorXd x = cm.lu->solve(b);
  const double bn = b.norm();
  const double rn = (cm.matrix * x - b).norm();
  if (rn > kResidualTol * std::max(bn, 1e-30))
    throw std::runtime_error("solve_constrained: relative residual " + std::to_string(rn / std::max(bn, 1e-30)) +
                             " exceeds " + std::to_string(kResidualTol));
  return x;
}

BlockSystem build_block_system(const AssembledOperators& ops, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("build_block_system: dt must be positive");
  BlockSystem sys;
  sys.n_flux = static_cast<int>(ops.div_op.cols());
  sys.n_conc = static_cast<int>(ops.div_op.rows());
  sys.n_total = sys.n_flux + sys.n_conc;
  sys.dt = dt;

  for (const SpMat& A : ops.flux_op) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(A.nonZeros() + 2 * ops.div_op.nonZeros() + ops.conc_mass.nonZeros());
    for (int c = 0; c < A.outerSize(); ++c)
      for (SpMat::InnerIterator it(A, c); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int c = 0; c < ops.div_op.outerSize(); ++c)
      for (SpMat::InnerIterator it(ops.div_op, c); it; ++it) {
        const int r = static_cast<int>(it.row()), f = static_cast<int>(it.col());
        trips.emplace_back(f, sys.n_flux + r, -it.value());  // -B^T
        trips.emplace_back(sys.n_flux + r, f, it.value());   //  B
      }
    for (int c = 0; c < ops.conc_mass.outerSize(); ++c)
      for (SpMat::InnerIterator it(ops.conc_mass, c); it; ++it)
        trips.emplace_back(sys.n_flux + static_cast<int>(it.row()),
                           sys.n_flux + static_cast<int>(it.col()), 2.0 / dt * it.value());
    SpMat block(sys.n_total, sys.n_total);
    block.setFromTriplets(trips.begin(), trips.end());
    sys.species.push_back(factor_constrained(block, ops.neumann.dofs));
  }
  return sys;
}

Eigen::VectorXd solve(const BlockSystem& sys, int species, const Eigen::VectorXd& rhs,
                      const Eigen::VectorXd& constraint_values) {
  if (species < 0 || species >= static_cast<int>(sys.species.size()))
    throw std::invalid_argument("solve: species index out of range");
  return solve_constrained(sys.species[species], rhs, constraint_values);
}

}  // namespace memfem
