#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "memfem/assembly.hpp"
#include "memfem/elements.hpp"
#include "memfem/linsolve.hpp"
#include "memfem/mesh.hpp"

using namespace memfem;

namespace {

// Random sparse diagonally dominant matrix, comfortably invertible.
SpMat random_spd_pattern(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, 4.0 + std::abs(u(rng)));
    for (int j = 0; j < n; ++j)
      if (j != i && ((i * 31 + j * 17) % 5 == 0)) trips.emplace_back(i, j, 0.5 * u(rng));
  }
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Reference solve: replace constrained rows by identity and insert the values.
Eigen::VectorXd dense_reference(const SpMat& m, const std::vector<int>& rows,
                                const Eigen::VectorXd& rhs, const Eigen::VectorXd& values) {
  Eigen::MatrixXd d = Eigen::MatrixXd(m);
  Eigen::VectorXd b = rhs;
  for (size_t k = 0; k < rows.size(); ++k) {
    d.row(rows[k]).setZero();
    d(rows[k], rows[k]) = 1.0;
    b[rows[k]] = values[k];
  }
  return d.fullPivLu().solve(b);
}

ProblemConfig tiny_config() {
  ProblemConfig cfg;
  cfg.num_species = 1;
  cfg.kappa = {1.0};
  cfg.membrane = {2.0};
  cfg.reaction.f = [](int, const std::vector<double>&) { return 0.0; };
  cfg.reaction.lipschitz = [](double) { return 1.0; };
  cfg.lipschitz_estimate = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("constrained solves match a dense reference") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 10;
  const SpMat m = random_spd_pattern(n, rng);
  const std::vector<int> rows{2, 7};
  const ConstrainedMatrix cm = factor_constrained(m, rows);

  // Same factorization, many right-hand sides and constraint values.
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd rhs(n), values(2);
    for (int i = 0; i < n; ++i) rhs[i] = u(rng);
    values << u(rng), u(rng);
    const Eigen::VectorXd x = solve_constrained(cm, rhs, values);
    const Eigen::VectorXd ref = dense_reference(m, rows, rhs, values);
    CHECK((x - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(x[2] == doctest::Approx(values[0]).epsilon(1e-14));
    CHECK(x[7] == doctest::Approx(values[1]).epsilon(1e-14));
  }

  // No constraints at all is a plain solve.
  const ConstrainedMatrix plain = factor_constrained(m, {});
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = u(rng);
  const Eigen::VectorXd x = solve_constrained(plain, rhs, Eigen::VectorXd());
  CHECK((x - dense_reference(m, {}, rhs, Eigen::VectorXd())).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("constraint bookkeeping is validated") {
  std::mt19937 rng(1);
  const SpMat m = random_spd_pattern(6, rng);

  SpMat rect(3, 4);
  CHECK_THROWS_AS(factor_constrained(rect, {}), std::invalid_argument);
  CHECK_THROWS_AS(factor_constrained(m, {4, 2}), std::invalid_argument);   // not ascending
  CHECK_THROWS_AS(factor_constrained(m, {2, 2}), std::invalid_argument);   // duplicate
  CHECK_THROWS_AS(factor_constrained(m, {-1}), std::invalid_argument);     // out of range
  CHECK_THROWS_AS(factor_constrained(m, {6}), std::invalid_argument);

  const ConstrainedMatrix cm = factor_constrained(m, {0, 3});
  CHECK_THROWS_AS(solve_constrained(cm, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_constrained(cm, Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}

TEST_CASE("singular operators are rejected at factorization time") {
  SpMat m(3, 3);
  std::vector<Eigen::Triplet<double>> trips{{0, 0, 1.0}, {2, 2, 1.0}};  // row/col 1 empty
  m.setFromTriplets(trips.begin(), trips.end());
  CHECK_THROWS_AS(factor_constrained(m, {}), std::runtime_error);
  // Constraining the deficient row repairs it.
  CHECK_NOTHROW(factor_constrained(m, {1}));
}

TEST_CASE("saddle-point block solve satisfies the original equations") {
  const Mesh mesh = build_structured(2);
  const ProblemConfig cfg = tiny_config();
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const AssembledOperators ops = assemble_operators(sp, cfg);
    const double dt = 0.1;
    const BlockSystem sys = build_block_system(ops, dt);

    CHECK(sys.n_flux == sp.num_flux_dofs);
    CHECK(sys.n_conc == sp.num_conc_dofs);
    CHECK(sys.n_total == sp.num_flux_dofs + sp.num_conc_dofs);
    CHECK(sys.dt == dt);
    REQUIRE(sys.species.size() == 1);

    // Full unconstrained block for the oracle.
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(sys.n_total, sys.n_total);
    full.topLeftCorner(sys.n_flux, sys.n_flux) = Eigen::MatrixXd(ops.flux_op[0]);
    const Eigen::MatrixXd B = Eigen::MatrixXd(ops.div_op);
    full.topRightCorner(sys.n_flux, sys.n_conc) = -B.transpose();
    full.bottomLeftCorner(sys.n_conc, sys.n_flux) = B;
    full.bottomRightCorner(sys.n_conc, sys.n_conc) = 2.0 / dt * Eigen::MatrixXd(ops.conc_mass);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd rhs(sys.n_total), values(ops.neumann.dofs.size());
    for (int i = 0; i < rhs.size(); ++i) rhs[i] = u(rng);
    for (int i = 0; i < values.size(); ++i) values[i] = u(rng);

    const Eigen::VectorXd x = solve(sys, 0, rhs, values);
    REQUIRE(x.size() == sys.n_total);

    std::vector<bool> constrained(sys.n_total, false);
    for (size_t k = 0; k < ops.neumann.dofs.size(); ++k) {
      constrained[ops.neumann.dofs[k]] = true;
      CHECK(x[ops.neumann.dofs[k]] == doctest::Approx(values[k]).epsilon(1e-13));
    }
    const Eigen::VectorXd resid = full * x - rhs;
    for (int i = 0; i < sys.n_total; ++i)
      if (!constrained[i]) CHECK(std::abs(resid[i]) <= 1e-9 * std::max(1.0, rhs.norm()));

    CHECK_THROWS_AS(solve(sys, 1, rhs, values), std::invalid_argument);
    CHECK_THROWS_AS(solve(sys, -1, rhs, values), std::invalid_argument);
  }
  const FunctionSpacePair sp = make_space_pair(mesh, 1);
  const AssembledOperators ops = assemble_operators(sp, cfg);
  CHECK_THROWS_AS(build_block_system(ops, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_block_system(ops, -1.0), std::invalid_argument);
}
