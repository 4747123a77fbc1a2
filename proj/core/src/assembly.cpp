#include "memfem/assembly.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "memfem/quadrature.hpp"

namespace memfem {

namespace {

// Reference flux/scalar basis tabulated at the points of a triangle rule.
struct RefTables {
  std::vector<std::vector<RtValue>> flux;      // [point][dof]
  std::vector<std::array<double, 3>> conc;     // [point][dof]
  int n_conc = 0;
};

RefTables tabulate(int order, const TriangleRule& rule) {
  RefTables tab;
  tab.flux.reserve(rule.points.size());
  tab.conc.resize(rule.points.size());
  for (size_t q = 0; q < rule.points.size(); ++q) {
    tab.flux.push_back(eval_rt_basis(order, rule.points[q][0], rule.points[q][1]));
    tab.n_conc = eval_conc_basis(order, rule.points[q][0], rule.points[q][1], tab.conc[q]);
  }
  return tab;
}

double legendre_moment(int j, double t) { return j == 0 ? 1.0 : 2.0 * t - 1.0; }

}  // namespace

void ProblemConfig::validate() const {
  if (num_species < 1) throw std::invalid_argument("config: need at least one species");
  if (static_cast<int>(kappa.size()) != num_species || static_cast<int>(membrane.size()) != num_species)
    throw std::invalid_argument("config: kappa/membrane size mismatch");
  for (double k : kappa)
    if (!(k > 0)) throw std::invalid_argument("config: diffusivities must be positive");
  for (double k : membrane)
    if (!(k > 0)) throw std::invalid_argument("config: membrane permeabilities must be positive");
  if (!reaction.f) throw std::invalid_argument("config: missing reaction evaluator");
  if (!(lipschitz_estimate > 0)) throw std::invalid_argument("config: Lipschitz estimate must be positive");
}

SpMat assemble_flux_operator(const FunctionSpacePair& sp, double kappa, double membrane_K) {
  if (!(kappa > 0)) throw std::invalid_argument("assemble_flux_operator: kappa must be positive");
  if (!(membrane_K > 0)) throw std::invalid_argument("assemble_flux_operator: membrane K must be positive");
  const Mesh& mesh = *sp.mesh;
  const TriangleRule rule = triangle_rule(6);
  const RefTables tab = tabulate(sp.order, rule);
  const int n = sp.flux_dofs_per_cell;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * n * n + mesh.M * 4);
  std::array<RtValue, 8> phys;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = sp.geom[t].detB;
    Eigen::Matrix<double, 8, 8> local = Eigen::Matrix<double, 8, 8>::Zero();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      map_flux_basis(sp, t, tab.flux[q], phys);
      const double w = rule.weights[q] * jac / kappa;
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) local(a, b) += w * phys[a].value.dot(phys[b].value);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        trips.emplace_back(sp.cell_flux_dofs[t][a], sp.cell_flux_dofs[t][b], local(a, b));
        if (a != b) trips.emplace_back(sp.cell_flux_dofs[t][b], sp.cell_flux_dofs[t][a], local(a, b));
      }
  }

  if (std::isfinite(membrane_K)) {
    // Membrane penalty K^{-1} <v.n, w.n>.  Only the edge's own dofs have a
    // nonzero normal trace there, so each Interface edge contributes a small
    // block on its `order` moments.  Traces are evaluated from one incident
    // cell; conformity makes the side irrelevant.
    const EdgeRule erule = edge_rule(5);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Edge& edge = mesh.edges[e];
      if (edge.tag != EdgeTag::Interface) continue;
      const int t = edge.tri[0];
      const EdgeRefMap m = edge_ref_map(mesh, t, e);
      const Eigen::Vector2d nrm(edge.normal[0], edge.normal[1]);
      Eigen::Matrix2d block = Eigen::Matrix2d::Zero();
      for (size_t q = 0; q < erule.points.size(); ++q) {
        const double tt = erule.points[q];
        const Eigen::Vector2d rp = m.ref_a + tt * (m.ref_b - m.ref_a);
        const auto ref = eval_rt_basis(sp.order, rp.x(), rp.y());
        std::array<RtValue, 8> pv;
        map_flux_basis(sp, t, ref, pv);
        const int le = mesh.local_edge(t, e);
        const double w = erule.weights[q] * edge.length / membrane_K;
        for (int a = 0; a < sp.order; ++a)
          for (int b = 0; b < sp.order; ++b)
            block(a, b) += w * pv[le * sp.order + a].value.dot(nrm) * pv[le * sp.order + b].value.dot(nrm);
      }
      for (int a = 0; a < sp.order; ++a)
        for (int b = 0; b < sp.order; ++b)
          trips.emplace_back(sp.order * e + a, sp.order * e + b, block(a, b));
    }
  }

  SpMat A(sp.num_flux_dofs, sp.num_flux_dofs);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat assemble_divergence_operator(const FunctionSpacePair& sp) {
  const Mesh& mesh = *sp.mesh;
  const TriangleRule rule = triangle_rule(6);
  const RefTables tab = tabulate(sp.order, rule);
  const int nf = sp.flux_dofs_per_cell;
  const int nc = sp.conc_dofs_per_cell;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * nf * nc);
  std::array<RtValue, 8> phys;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = sp.geom[t].detB;
    Eigen::Matrix<double, 3, 8> local = Eigen::Matrix<double, 3, 8>::Zero();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      map_flux_basis(sp, t, tab.flux[q], phys);
      const double w = rule.weights[q] * jac;
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nf; ++b) local(a, b) += w * tab.conc[q][a] * phys[b].div;
    }
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nf; ++b)
        trips.emplace_back(sp.conc_dof(t, a), sp.cell_flux_dofs[t][b], local(a, b));
  }

  SpMat B(sp.num_conc_dofs, sp.num_flux_dofs);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

SpMat assemble_conc_mass(const FunctionSpacePair& sp) {
  const Mesh& mesh = *sp.mesh;
  const TriangleRule rule = triangle_rule(6);
  const RefTables tab = tabulate(sp.order, rule);
  const int nc = sp.conc_dofs_per_cell;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * nc * nc);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = sp.geom[t].detB;
    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * jac;
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) local(a, b) += w * tab.conc[q][a] * tab.conc[q][b];
    }
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b)
        trips.emplace_back(sp.conc_dof(t, a), sp.conc_dof(t, b), local(a, b));
  }

  SpMat C(sp.num_conc_dofs, sp.num_conc_dofs);
  C.setFromTriplets(trips.begin(), trips.end());
  return C;
}

AssembledOperators assemble_operators(const FunctionSpacePair& sp, const ProblemConfig& cfg) {
  cfg.validate();
  AssembledOperators ops;
  ops.flux_op.reserve(cfg.num_species);
  for (int i = 0; i < cfg.num_species; ++i)
    ops.flux_op.push_back(assemble_flux_operator(sp, cfg.kappa[i], cfg.membrane[i]));
  ops.div_op = assemble_divergence_operator(sp);
  ops.conc_mass = assemble_conc_mass(sp);
  ops.neumann = neumann_constraint_table(sp);
  return ops;
}

std::vector<Eigen::VectorXd> assemble_reaction(const FunctionSpacePair& sp, const ProblemConfig& cfg,
                                               const std::vector<Eigen::VectorXd>& conc) {
  const Mesh& mesh = *sp.mesh;
  const int N = cfg.num_species;
  if (static_cast<int>(conc.size()) != N)
    throw std::invalid_argument("assemble_reaction: species count mismatch");
  const TriangleRule rule = triangle_rule(8);
  const RefTables tab = tabulate(sp.order, rule);
  const int nc = sp.conc_dofs_per_cell;

  std::vector<Eigen::VectorXd> out(N, Eigen::VectorXd::Zero(sp.num_conc_dofs));
  std::vector<double> u(N);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = sp.geom[t].detB;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      double umax = 0;
      for (int i = 0; i < N; ++i) {
        double v = 0;
        for (int k = 0; k < nc; ++k) v += conc[i][sp.conc_dof(t, k)] * tab.conc[q][k];
        u[i] = v;
        umax = std::max(umax, std::abs(v));
      }
      const double w = rule.weights[q] * jac;
      for (int i = 0; i < N; ++i) {
        const double f = cfg.reaction.f(i, u);
        if (!std::isfinite(f))
          throw std::runtime_error("assemble_reaction: non-finite reaction value in cell " +
                                   std::to_string(t) + " (state magnitude " + std::to_string(umax) + ")");
        for (int k = 0; k < nc; ++k) out[i][sp.conc_dof(t, k)] += w * f * tab.conc[q][k];
      }
    }
  }
  return out;
}

Eigen::VectorXd assemble_dirichlet_rhs(const FunctionSpacePair& sp, const ProblemConfig& cfg,
                                       int species, double t) {
  const Mesh& mesh = *sp.mesh;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.num_flux_dofs);
  if (!cfg.dirichlet) return rhs;  // no callback = homogeneous data
  const EdgeRule erule = edge_rule(11);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    if (edge.tag != EdgeTag::BoundaryDirichlet) continue;
    const int cell = edge.tri[0];
    const auto n_out = outward_normal(mesh, e, cell);
    const Eigen::Vector2d nrm(n_out[0], n_out[1]);
    const EdgeRefMap m = edge_ref_map(mesh, cell, e);
    const int le = mesh.local_edge(cell, e);
    const auto& pa = mesh.vertices[edge.a];
    const auto& pb = mesh.vertices[edge.b];
    for (size_t q = 0; q < erule.points.size(); ++q) {
      const double tt = erule.points[q];
      const Eigen::Vector2d rp = m.ref_a + tt * (m.ref_b - m.ref_a);
      const double x = pa[0] + tt * (pb[0] - pa[0]);
      const double y = pa[1] + tt * (pb[1] - pa[1]);
      const auto ref = eval_rt_basis(sp.order, rp.x(), rp.y());
      std::array<RtValue, 8> pv;
      map_flux_basis(sp, cell, ref, pv);
      const double w = erule.weights[q] * edge.length * cfg.dirichlet(species, t, x, y);
      // Only this edge's own moments see the trace.
      for (int j = 0; j < sp.order; ++j)
        rhs[sp.order * e + j] -= w * pv[le * sp.order + j].value.dot(nrm);
    }
  }
  return rhs;
}

Eigen::VectorXd assemble_scalar_load(const FunctionSpacePair& sp,
                                     const std::function<double(double, double)>& s) {
  const Mesh& mesh = *sp.mesh;
  const TriangleRule rule = triangle_rule(8);
  const RefTables tab = tabulate(sp.order, rule);
  const int nc = sp.conc_dofs_per_cell;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.num_conc_dofs);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry& g = sp.geom[t];
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector2d p = g.map(rule.points[q][0], rule.points[q][1]);
      const double w = rule.weights[q] * g.detB * s(p.x(), p.y());
      for (int k = 0; k < nc; ++k) rhs[sp.conc_dof(t, k)] += w * tab.conc[q][k];
    }
  }
  return rhs;
}

NeumannTable neumann_constraint_table(const FunctionSpacePair& sp) {
  const Mesh& mesh = *sp.mesh;
  NeumannTable table;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].tag != EdgeTag::BoundaryNeumann) continue;
    for (int j = 0; j < sp.order; ++j) {
      table.dofs.push_back(sp.order * e + j);
      table.edges.push_back(e);
      table.moments.push_back(j);
    }
  }
  return table;
}

Eigen::VectorXd neumann_constraint_values(const FunctionSpacePair& sp, const NeumannTable& table,
                                          const ProblemConfig& cfg, int species, double t) {
  const Mesh& mesh = *sp.mesh;
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(table.dofs.size());
  if (!cfg.neumann) return vals;  // no callback = homogeneous data
  const EdgeRule erule = edge_rule(11);
  for (size_t r = 0; r < table.dofs.size(); ++r) {
    const Edge& edge = mesh.edges[table.edges[r]];
    const auto n_out = outward_normal(mesh, table.edges[r], edge.tri[0]);
    const double sign = n_out[0] * edge.normal[0] + n_out[1] * edge.normal[1];
    const auto& pa = mesh.vertices[edge.a];
    const auto& pb = mesh.vertices[edge.b];
    double acc = 0;
    for (size_t q = 0; q < erule.points.size(); ++q) {
      const double tt = erule.points[q];
      const double x = pa[0] + tt * (pb[0] - pa[0]);
      const double y = pa[1] + tt * (pb[1] - pa[1]);
      acc += erule.weights[q] * cfg.neumann(species, t, x, y) * legendre_moment(table.moments[r], tt);
    }
    // Data is flux . n_out; the dof measures flux . edge-normal.
    vals[r] = sign * acc;
  }
  return vals;
}

void write_matrix_market(const SpMat& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace memfem
