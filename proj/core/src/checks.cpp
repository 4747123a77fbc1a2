#include "memfem/checks.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "memfem/linsolve.hpp"
#include "memfem/mms.hpp"
#include "memfem/quadrature.hpp"
#include "memfem/stepper.hpp"

namespace memfem {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double factorial(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// Quadratic bivariate polynomial over {1, x, y, x^2, xy, y^2}.
struct Poly2 {
  std::array<double, 6> c{};
  double operator()(double x, double y) const {
    return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
  }
  double dx(double x, double y) const { return c[1] + 2 * c[3] * x + c[4] * y; }
  double dy(double x, double y) const { return c[2] + c[4] * x + 2 * c[5] * y; }
};

Poly2 random_poly(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly2 p;
  for (double& v : p.c) v = u(rng);
  return p;
}

double legendre_moment(int j, double t) { return j == 0 ? 1.0 : 2.0 * t - 1.0; }

ProblemConfig homogeneous_config(int num_species, double lipschitz, DtPolicy policy) {
  ProblemConfig cfg;
  cfg.num_species = num_species;
  cfg.kappa.assign(num_species, 1.0);
  cfg.membrane.assign(num_species, 1.0);
  cfg.reaction.f = [](int, const std::vector<double>&) { return 0.0; };
  cfg.lipschitz_estimate = lipschitz;
  cfg.dt_policy = policy;
  return cfg;
}

}  // namespace

CheckResult check_quadrature_exactness() {
  double worst = 0;
  for (int d = 1; d <= 10; ++d) {
    const TriangleRule rule = triangle_rule(d);
    for (int a = 0; a + 0 <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double acc = 0;
        for (size_t q = 0; q < rule.points.size(); ++q)
          acc += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        worst = std::max(worst, std::abs(acc - exact));
      }
  }
  for (int d = 1; d <= 11; ++d) {
    const EdgeRule rule = edge_rule(d);
    for (int k = 0; k <= d; ++k) {
      double acc = 0;
      for (size_t q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.points[q], k);
      worst = std::max(worst, std::abs(acc - 1.0 / (k + 1)));
    }
  }
  return {"quadrature-exactness", worst <= 1e-14,
          fmt("max monomial deviation %.3e (tol 1e-14)", worst)};
}

CheckResult check_commuting_diagram() {
  std::mt19937 rng(20240801);
  double worst = 0;
  for (int order : {1, 2})
    for (int M : {2, 4}) {
      const Mesh mesh = build_structured(M);
      const FunctionSpacePair sp = make_space_pair(mesh, order);
      const SpMat B = assemble_divergence_operator(sp);
      const SpMat C = assemble_conc_mass(sp);
      Eigen::SimplicialLDLT<SpMat> mass(C);
      for (int trial = 0; trial < 20; ++trial) {
        const Poly2 p = random_poly(rng), q = random_poly(rng);
        const Eigen::VectorXd flux_c = canonical_interpolation(
            sp, [&](double x, double y) { return Eigen::Vector2d(p(x, y), q(x, y)); });
        const Eigen::VectorXd div_of_interp = mass.solve(B * flux_c);
        const Eigen::VectorXd proj_of_div =
            l2_projection(sp, [&](double x, double y) { return p.dx(x, y) + q.dy(x, y); });
        worst = std::max(worst, (div_of_interp - proj_of_div).cwiseAbs().maxCoeff());
      }
    }
  return {"commuting-diagram", worst <= 1e-11,
          fmt("max coefficient discrepancy %.3e (tol 1e-11)", worst)};
}

CheckResult check_facet_moments() {
  std::mt19937 rng(20240802);
  double worst = 0;
  for (int order : {1, 2})
    for (int M : {2, 4}) {
      const Mesh mesh = build_structured(M);
      const FunctionSpacePair sp = make_space_pair(mesh, order);
      const EdgeRule erule = edge_rule(9);
      const TriangleRule trule = triangle_rule(8);
      for (int trial = 0; trial < 20; ++trial) {
        const Poly2 p = random_poly(rng), q = random_poly(rng);
        const auto field = [&](double x, double y) { return Eigen::Vector2d(p(x, y), q(x, y)); };
        const Eigen::VectorXd coeffs = canonical_interpolation(sp, field);

        for (int e = 0; e < mesh.num_edges(); ++e) {
          const Edge& edge = mesh.edges[e];
          const int cell = edge.tri[0];
          const EdgeRefMap m = edge_ref_map(mesh, cell, e);
          const Eigen::Vector2d nrm(edge.normal[0], edge.normal[1]);
          const auto& pa = mesh.vertices[edge.a];
          const auto& pb = mesh.vertices[edge.b];
          for (int j = 0; j < sp.order; ++j) {
            double acc = 0;
            for (size_t qq = 0; qq < erule.points.size(); ++qq) {
              const double tt = erule.points[qq];
              const Eigen::Vector2d rp = m.ref_a + tt * (m.ref_b - m.ref_a);
              const double x = pa[0] + tt * (pb[0] - pa[0]);
              const double y = pa[1] + tt * (pb[1] - pa[1]);
              const double diff = (field(x, y) - flux_value(sp, cell, rp.x(), rp.y(), coeffs)).dot(nrm);
              acc += erule.weights[qq] * diff * legendre_moment(j, tt);
            }
            worst = std::max(worst, std::abs(acc));
          }
        }
        if (sp.order == 2)
          for (int t = 0; t < mesh.num_triangles(); ++t) {
            const CellGeometry& g = sp.geom[t];
            Eigen::Vector2d acc = Eigen::Vector2d::Zero();
            for (size_t qq = 0; qq < trule.points.size(); ++qq) {
              const Eigen::Vector2d x = g.map(trule.points[qq][0], trule.points[qq][1]);
              // Cell-mean functionals: detB/|T| = 2.
              acc += 2.0 * trule.weights[qq] *
                     (field(x.x(), x.y()) -
                      flux_value(sp, t, trule.points[qq][0], trule.points[qq][1], coeffs));
            }
            worst = std::max(worst, acc.cwiseAbs().maxCoeff());
          }
      }
    }
  return {"facet-moments", worst <= 1e-12,
          fmt("max moment of field - interpolant %.3e (tol 1e-12)", worst)};
}

CheckResult check_energy_decay() {
  std::mt19937 rng(20240803);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;  // most positive relative growth of ||u|| over a step
  for (int order : {1, 2}) {
    const Mesh mesh = build_structured(4);
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const ProblemConfig cfg = homogeneous_config(1, 1e-12, DtPolicy::HardError);
    const AssembledOperators ops = assemble_operators(sp, cfg);
    const ConstrainedMatrix flux_solver = factor_constrained(ops.flux_op[0], ops.neumann.dofs);
    const Eigen::VectorXd zero_vals = Eigen::VectorXd::Zero(ops.neumann.dofs.size());
    for (double dt : {0.5, 0.1, 0.01}) {
      const BlockSystem sys = build_block_system(ops, dt);
      for (int trial = 0; trial < 10; ++trial) {
        StateVector state;
        state.t = 0;
        Eigen::VectorXd u0(sp.num_conc_dofs);
        for (int k = 0; k < u0.size(); ++k) u0[k] = u(rng);
        state.conc.push_back(u0);
        state.flux.push_back(solve_constrained(flux_solver, ops.div_op.transpose() * u0, zero_vals));
        double norm = std::sqrt(state.conc[0].dot(ops.conc_mass * state.conc[0]));
        for (int step = 0; step < 50; ++step) {
          auto [next, rep] = cn_step(sp, ops, sys, cfg, state);
          const double nn = std::sqrt(next.conc[0].dot(ops.conc_mass * next.conc[0]));
          worst = std::max(worst, (nn - norm) / std::max(norm, 1e-300));
          state = std::move(next);
          norm = nn;
        }
      }
    }
  }
  return {"energy-decay", worst <= 1e-12,
          fmt("max relative growth of the scalar norm per step %.3e (tol 1e-12)", worst)};
}

CheckResult check_contraction() {
  const Mesh mesh = build_structured(4);
  const FunctionSpacePair sp1 = make_space_pair(mesh, 1);
  const auto conc0 = [](int i, double x, double y) {
    return (i + 1) * (0.5 + std::sin(M_PI * x) * std::sin(M_PI * y));
  };

  bool pass = true;
  std::string detail;
  const double dt = 0.1;
  for (double target : {0.5, 1.0, 1.9}) {
    const double L = target / dt;
    ProblemConfig cfg = homogeneous_config(2, L, DtPolicy::HardError);
    cfg.reaction.f = [L](int i, const std::vector<double>& u) { return L * u[i]; };
    const AssembledOperators ops = assemble_operators(sp1, cfg);
    const BlockSystem sys = build_block_system(ops, dt);
    const StateVector state = initial_data(sp1, ops, cfg, conc0);
    PicardOptions opt;
    opt.tol_rel = 1e-6;  // stop well above the roundoff floor so ratios stay meaningful
    opt.throw_on_max_iter = false;
    const auto [next, rep] = cn_step(sp1, ops, sys, cfg, state, opt);
    double measured = 0;
    for (double r : rep.contraction_ratios) measured = std::max(measured, r);
    const double bound = 1.1 * target / 2.0;
    if (measured > bound || rep.contraction_ratios.empty()) pass = false;
    detail += fmt("L*dt=%.1f", target) + fmt(": max ratio %.4f", measured) +
              fmt(" (bound %.4f); ", bound);
  }

  // Forced divergence past the contraction threshold.
  {
    const double ddt = 0.002, L = 1100.0;  // L*dt = 2.2
    ProblemConfig cfg = homogeneous_config(2, L, DtPolicy::WarnAndProceed);
    cfg.reaction.f = [L](int i, const std::vector<double>& u) { return L * u[i]; };
    const AssembledOperators ops = assemble_operators(sp1, cfg);
    const BlockSystem sys = build_block_system(ops, ddt);
    const StateVector state = initial_data(sp1, ops, cfg, conc0);
    PicardOptions opt;
    opt.max_iter = 25;
    opt.throw_on_max_iter = false;
    const auto [next, rep] = cn_step(sp1, ops, sys, cfg, state, opt);
    double measured = 0;
    for (double r : rep.contraction_ratios) measured = std::max(measured, r);
    if (measured < 1.0 || rep.converged) pass = false;
    detail += fmt("L*dt=2.2: max ratio %.4f (divergence expected)", measured);
  }
  return {"picard-contraction", pass, detail};
}

CheckResult check_interface_compatibility() {
  const auto K = derive_membrane_constants();
  const double k1_closed = (M_PI / 3.0) * std::cos(M_PI / 6.0);
  const double k2_closed = M_PI / 6.0;
  double worst = std::max(std::abs(K[0] - k1_closed), std::abs(K[1] - k2_closed));

  const ManufacturedSolution sol;
  std::mt19937 rng(20240804);
  std::uniform_real_distribution<double> uy(0.0, 1.0), ut(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const double y = uy(rng), t = ut(rng);
    for (int i = 0; i < 2; ++i) {
      // Membrane normal (-1, 0) points out of the plus side.
      const double flux_n = -sol.flux(i, t, 0.5, y, Side::Plus).x();
      worst = std::max(worst, std::abs(flux_n - K[i] * sol.jump(i, t, y)));
    }
  }
  const bool near = std::abs(K[0] - 0.9069) <= 1e-4 && std::abs(K[1] - 0.5236) <= 1e-4;
  return {"interface-compatibility", worst <= 1e-12 && near,
          fmt("K1=%.10f", K[0]) + fmt(", K2=%.10f", K[1]) +
              fmt(", max law residual %.3e (tol 1e-12)", worst)};
}

std::vector<CheckResult> run_checks() {
  return {check_quadrature_exactness(), check_commuting_diagram(), check_energy_decay(),
          check_contraction(), check_interface_compatibility()};
}

}  // namespace memfem
