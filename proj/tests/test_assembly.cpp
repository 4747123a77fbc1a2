#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "memfem/assembly.hpp"
#include "memfem/elements.hpp"
#include "memfem/mesh.hpp"
#include "memfem/quadrature.hpp"

using namespace memfem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ProblemConfig basic_config(int num_species) {
  ProblemConfig cfg;
  cfg.num_species = num_species;
  cfg.kappa.assign(num_species, 1.0);
  cfg.membrane.assign(num_species, 1.0);
  cfg.reaction.f = [](int, const std::vector<double>&) { return 0.0; };
  cfg.reaction.lipschitz = [](double) { return 1.0; };
  cfg.lipschitz_estimate = 1.0;
  return cfg;
}

// Dense quadrature oracle for the three bilinear forms, deliberately using a
// higher-degree rule than the assembly routines.
struct DenseForms {
  Eigen::MatrixXd flux_mass;  // kappa^{-1} (v, w), no membrane term
  Eigen::MatrixXd div_form;   // (psi, div v)
  Eigen::MatrixXd conc_mass;  // (psi, chi)
};

DenseForms dense_oracle(const FunctionSpacePair& sp, double kappa) {
  const Mesh& mesh = *sp.mesh;
  DenseForms d;
  d.flux_mass = Eigen::MatrixXd::Zero(sp.num_flux_dofs, sp.num_flux_dofs);
  d.div_form = Eigen::MatrixXd::Zero(sp.num_conc_dofs, sp.num_flux_dofs);
  d.conc_mass = Eigen::MatrixXd::Zero(sp.num_conc_dofs, sp.num_conc_dofs);
  const TriangleRule rule = triangle_rule(10);
  std::array<RtValue, 8> phys;
  std::array<double, 3> psi{};
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = sp.geom[t].detB;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double rx = rule.points[q][0], ry = rule.points[q][1];
      map_flux_basis(sp, t, eval_rt_basis(sp.order, rx, ry), phys);
      const int nc = eval_conc_basis(sp.order, rx, ry, psi);
      const double w = rule.weights[q] * jac;
      for (int a = 0; a < sp.flux_dofs_per_cell; ++a) {
        const int ga = sp.cell_flux_dofs[t][a];
        for (int b = 0; b < sp.flux_dofs_per_cell; ++b)
          d.flux_mass(ga, sp.cell_flux_dofs[t][b]) += w / kappa * phys[a].value.dot(phys[b].value);
      }
      for (int a = 0; a < nc; ++a) {
        const int ga = sp.conc_dof(t, a);
        for (int b = 0; b < sp.flux_dofs_per_cell; ++b)
          d.div_form(ga, sp.cell_flux_dofs[t][b]) += w * psi[a] * phys[b].div;
        for (int b = 0; b < nc; ++b)
          d.conc_mass(ga, sp.conc_dof(t, b)) += w * psi[a] * psi[b];
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("bilinear forms match a dense quadrature oracle") {
  const Mesh mesh = build_structured(2);
  const double kappa = 0.7;
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const DenseForms d = dense_oracle(sp, kappa);

    const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_flux_operator(sp, kappa, kInf));
    const Eigen::MatrixXd B = Eigen::MatrixXd(assemble_divergence_operator(sp));
    const Eigen::MatrixXd C = Eigen::MatrixXd(assemble_conc_mass(sp));

    CHECK((A - d.flux_mass).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((B - d.div_form).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((C - d.conc_mass).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((A - A.transpose()).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}

TEST_CASE("membrane penalty adds the closed-form block on interface moments") {
  const Mesh mesh = build_structured(4);
  const double K = 0.8;
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    Eigen::MatrixXd diff = Eigen::MatrixXd(assemble_flux_operator(sp, 1.0, K)) -
                           Eigen::MatrixXd(assemble_flux_operator(sp, 1.0, kInf));
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edges[e].tag != EdgeTag::Interface) continue;
      const double len = mesh.edges[e].length;
      const int base = order * e;
      CHECK(std::abs(diff(base, base) - len / K) <= 1e-13);
      if (order == 2) {
        CHECK(std::abs(diff(base + 1, base + 1) - 3 * len / K) <= 1e-13);
        CHECK(std::abs(diff(base, base + 1)) <= 1e-13);
        CHECK(std::abs(diff(base + 1, base)) <= 1e-13);
      }
      for (int j = 0; j < order; ++j) diff(base + j, base + j) = 0;
      if (order == 2) {
        diff(base, base + 1) = 0;
        diff(base + 1, base) = 0;
      }
    }
    CHECK(diff.lpNorm<Eigen::Infinity>() <= 1e-13);  // nothing outside the blocks
    CHECK_THROWS_AS(assemble_flux_operator(sp, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(assemble_flux_operator(sp, 0.0, K), std::invalid_argument);
  }
}

TEST_CASE("divergence operator has full rank and kills constants") {
  const Mesh mesh = build_structured(2);
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const SpMat B = assemble_divergence_operator(sp);
    const Eigen::MatrixXd Bd = Eigen::MatrixXd(B);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(Bd);
    CHECK(lu.rank() == sp.num_conc_dofs);

    for (auto c : {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(-2, 3)}) {
      const Eigen::VectorXd coeffs =
          canonical_interpolation(sp, [&](double, double) { return c; });
      CHECK((B * coeffs).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
  }
}

TEST_CASE("scalar mass integrates the constant function to the total area") {
  const Mesh mesh = build_structured(4);
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const SpMat C = assemble_conc_mass(sp);
    const Eigen::VectorXd one = l2_projection(sp, [](double, double) { return 1.0; });
    CHECK(one.dot(C * one) == doctest::Approx(1.0).epsilon(1e-13));
    if (order == 1) {
      const Eigen::VectorXd areas = C * Eigen::VectorXd::Ones(sp.num_conc_dofs);
      for (int t = 0; t < sp.num_conc_dofs; ++t)
        CHECK(areas[t] == doctest::Approx(mesh.h * mesh.h / 2).epsilon(1e-13));
    }
  }
}

TEST_CASE("boundary trace term: closed form for constant data, oracle otherwise") {
  const Mesh mesh = build_structured(4);
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);

    ProblemConfig cfg = basic_config(2);
    cfg.dirichlet = [](int, double, double, double) { return 1.0; };
    const Eigen::VectorXd rhs = assemble_dirichlet_rhs(sp, cfg, 0, 0.0);
    Eigen::VectorXd leftover = rhs;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Edge& edge = mesh.edges[e];
      if (edge.tag != EdgeTag::BoundaryDirichlet) continue;
      const auto n_out = outward_normal(mesh, e, edge.tri[0]);
      const double sign = n_out[0] * edge.normal[0] + n_out[1] * edge.normal[1];
      CHECK(std::abs(rhs[order * e] - (-edge.length * sign)) <= 1e-13);
      leftover[order * e] = 0;
      if (order == 2) {
        CHECK(std::abs(rhs[order * e + 1]) <= 1e-13);
        leftover[order * e + 1] = 0;
      }
    }
    CHECK(leftover.lpNorm<Eigen::Infinity>() <= 1e-15);

    // Smooth species- and time-dependent data against an independent edge rule.
    cfg.dirichlet = [](int i, double t, double x, double y) {
      return (1 + i) * (1 + x + 0.5 * y + 0.25 * t);
    };
    const int species = 1;
    const double time = 0.3;
    const Eigen::VectorXd got = assemble_dirichlet_rhs(sp, cfg, species, time);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(sp.num_flux_dofs);
    const GaussRule line = gauss_legendre_unit(8);
    std::array<RtValue, 8> phys;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Edge& edge = mesh.edges[e];
      if (edge.tag != EdgeTag::BoundaryDirichlet) continue;
      const int cell = edge.tri[0];
      const auto n_out = outward_normal(mesh, e, cell);
      const EdgeRefMap erm = edge_ref_map(mesh, cell, e);
      for (size_t q = 0; q < line.points.size(); ++q) {
        const double t = line.points[q];
        const Eigen::Vector2d rp = erm.ref_a + t * (erm.ref_b - erm.ref_a);
        const double x = mesh.vertices[edge.a][0] + t * (mesh.vertices[edge.b][0] - mesh.vertices[edge.a][0]);
        const double y = mesh.vertices[edge.a][1] + t * (mesh.vertices[edge.b][1] - mesh.vertices[edge.a][1]);
        map_flux_basis(sp, cell, eval_rt_basis(order, rp.x(), rp.y()), phys);
        const double w = line.weights[q] * edge.length * cfg.dirichlet(species, time, x, y);
        for (int a = 0; a < sp.flux_dofs_per_cell; ++a)
          want[sp.cell_flux_dofs[cell][a]] -=
              w * (phys[a].value.x() * n_out[0] + phys[a].value.y() * n_out[1]);
      }
    }
    CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-12);

    // An empty callback means homogeneous data.
    ProblemConfig hom = basic_config(2);
    CHECK(assemble_dirichlet_rhs(sp, hom, 0, 0.0).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("reaction loads agree with mass-matrix products for polynomial reactions") {
  const Mesh mesh = build_structured(4);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const SpMat C = assemble_conc_mass(sp);

    ProblemConfig cfg = basic_config(2);
    cfg.reaction.f = [](int i, const std::vector<double>& v) {
      return i == 0 ? v[0] : 2.0 * v[0];
    };
    std::vector<Eigen::VectorXd> conc(2, Eigen::VectorXd(sp.num_conc_dofs));
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < sp.num_conc_dofs; ++k) conc[i][k] = u(rng);

    const auto d = assemble_reaction(sp, cfg, conc);
    REQUIRE(d.size() == 2);
    CHECK((d[0] - C * conc[0]).lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK((d[1] - 2.0 * (C * conc[0])).lpNorm<Eigen::Infinity>() <= 1e-13);

    // A constant reaction is the scalar load of that constant.
    cfg.reaction.f = [](int, const std::vector<double>&) { return 0.6; };
    const auto dc = assemble_reaction(sp, cfg, conc);
    const Eigen::VectorXd load = assemble_scalar_load(sp, [](double, double) { return 0.6; });
    CHECK((dc[0] - load).lpNorm<Eigen::Infinity>() <= 1e-14);

    cfg.reaction.f = [](int, const std::vector<double>&) {
      return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_WITH_AS(static_cast<void>(assemble_reaction(sp, cfg, conc)),
                         doctest::Contains("cell"), std::runtime_error);

    cfg.reaction.f = [](int, const std::vector<double>&) { return 0.0; };
    CHECK_THROWS_AS(static_cast<void>(assemble_reaction(sp, cfg, {conc[0]})), std::invalid_argument);
  }
}

TEST_CASE("volume load for constant data has the closed per-cell form") {
  const Mesh mesh = build_structured(4);
  const double h2 = mesh.h * mesh.h;  // cell Jacobian determinant

  const FunctionSpacePair sp1 = make_space_pair(mesh, 1);
  const Eigen::VectorXd l1 = assemble_scalar_load(sp1, [](double, double) { return 1.0; });
  for (int t = 0; t < mesh.num_triangles(); ++t)
    CHECK(l1[t] == doctest::Approx(h2 / 2).epsilon(1e-13));

  const FunctionSpacePair sp2 = make_space_pair(mesh, 2);
  const Eigen::VectorXd l2 = assemble_scalar_load(sp2, [](double, double) { return 1.0; });
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    CHECK(l2[sp2.conc_dof(t, 0)] == doctest::Approx(h2 / 2).epsilon(1e-13));
    CHECK(l2[sp2.conc_dof(t, 1)] == doctest::Approx(h2 / 6).epsilon(1e-13));
    CHECK(l2[sp2.conc_dof(t, 2)] == doctest::Approx(h2 / 6).epsilon(1e-13));
  }
}

TEST_CASE("prescribed-flux constraint rows and moment values") {
  const Mesh mesh = build_structured(4);
  for (int order : {1, 2}) {
    const FunctionSpacePair sp = make_space_pair(mesh, order);
    const NeumannTable table = neumann_constraint_table(sp);

    int n_neumann = 0;
    for (const Edge& e : mesh.edges)
      if (e.tag == EdgeTag::BoundaryNeumann) ++n_neumann;
    REQUIRE(static_cast<int>(table.dofs.size()) == order * n_neumann);
    for (size_t r = 0; r < table.dofs.size(); ++r) {
      if (r) CHECK(table.dofs[r] > table.dofs[r - 1]);
      CHECK(table.dofs[r] == order * table.edges[r] + table.moments[r]);
      CHECK(mesh.edges[table.edges[r]].tag == EdgeTag::BoundaryNeumann);
    }

    ProblemConfig cfg = basic_config(1);
    cfg.neumann = [](int, double, double, double) { return 0.9; };
    const Eigen::VectorXd vals = neumann_constraint_values(sp, table, cfg, 0, 0.0);
    REQUIRE(vals.size() == static_cast<Eigen::Index>(table.dofs.size()));
    for (size_t r = 0; r < table.dofs.size(); ++r) {
      const Edge& edge = mesh.edges[table.edges[r]];
      const auto n_out = outward_normal(mesh, table.edges[r], edge.tri[0]);
      const double sign = n_out[0] * edge.normal[0] + n_out[1] * edge.normal[1];
      if (table.moments[r] == 0)
        CHECK(vals[r] == doctest::Approx(0.9 * sign).epsilon(1e-13));
      else
        CHECK(std::abs(vals[r]) <= 1e-14);
    }

    // Data linear along the edge: mean = midpoint value, first moment = slope/6.
    cfg.neumann = [](int, double, double, double y) { return y; };
    const Eigen::VectorXd lin = neumann_constraint_values(sp, table, cfg, 0, 0.0);
    for (size_t r = 0; r < table.dofs.size(); ++r) {
      const Edge& edge = mesh.edges[table.edges[r]];
      const auto n_out = outward_normal(mesh, table.edges[r], edge.tri[0]);
      const double sign = n_out[0] * edge.normal[0] + n_out[1] * edge.normal[1];
      const double ya = mesh.vertices[edge.a][1], yb = mesh.vertices[edge.b][1];
      const double want = table.moments[r] == 0 ? 0.5 * (ya + yb) : (yb - ya) / 6;
      CHECK(vals.size() == lin.size());
      CHECK(lin[r] == doctest::Approx(sign * want).epsilon(1e-12));
    }

    ProblemConfig hom = basic_config(1);
    CHECK(neumann_constraint_values(sp, table, hom, 0, 0.0).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("configuration validation rejects inconsistent problems") {
  ProblemConfig ok = basic_config(2);
  CHECK_NOTHROW(ok.validate());

  ProblemConfig c = ok;
  c.num_species = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = ok;
  c.kappa = {1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = ok;
  c.kappa[1] = -0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = ok;
  c.membrane[0] = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = ok;
  c.membrane[0] = kInf;  // disables the membrane term, still valid
  CHECK_NOTHROW(c.validate());

  c = ok;
  c.reaction.f = nullptr;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = ok;
  c.lipschitz_estimate = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("matrix export uses one-based coordinate format") {
  SpMat m(2, 3);
  std::vector<Eigen::Triplet<double>> trips{{0, 0, 1.5}, {1, 2, -2.0}};
  m.setFromTriplets(trips.begin(), trips.end());
  std::ostringstream out;
  write_matrix_market(m, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("%%MatrixMarket", 0) == 0);
  int rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  CHECK(rows == 2);
  CHECK(cols == 3);
  CHECK(nnz == 2);
  int seen = 0;
  for (int k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0;
    in >> r >> c >> v;
    if (r == 1 && c == 1) {
      CHECK(v == 1.5);
      ++seen;
    } else {
      CHECK(r == 2);
      CHECK(c == 3);
      CHECK(v == -2.0);
      ++seen;
    }
  }
  CHECK(seen == 2);
}
