#include "memfem/elements.hpp"

#include <cmath>
#include <stdexcept>

#include "memfem/quadrature.hpp"

namespace memfem {

namespace {

const Eigen::Vector2d kRefVertex[3] = {{0, 0}, {1, 0}, {0, 1}};

// Monomial basis of the local Raviart-Thomas space together with analytic
// divergences.  Order 1: span{(1,0),(0,1),(x,y)}.  Order 2 adds the full
// linear fields and x*(linear scalar).
struct Monomial {
  std::function<Eigen::Vector2d(double, double)> value;
  std::function<double(double, double)> div;
};

std::vector<Monomial> rt_monomials(int order) {
  if (order == 1)
    return {
        {[](double, double) { return Eigen::Vector2d(1, 0); }, [](double, double) { return 0.0; }},
        {[](double, double) { return Eigen::Vector2d(0, 1); }, [](double, double) { return 0.0; }},
        {[](double x, double y) { return Eigen::Vector2d(x, y); }, [](double, double) { return 2.0; }},
    };
  return {
      {[](double, double) { return Eigen::Vector2d(1, 0); }, [](double, double) { return 0.0; }},
      {[](double x, double) { return Eigen::Vector2d(x, 0); }, [](double, double) { return 1.0; }},
      {[](double, double y) { return Eigen::Vector2d(y, 0); }, [](double, double) { return 0.0; }},
      {[](double, double) { return Eigen::Vector2d(0, 1); }, [](double, double) { return 0.0; }},
      {[](double x, double) { return Eigen::Vector2d(0, x); }, [](double, double) { return 0.0; }},
      {[](double, double y) { return Eigen::Vector2d(0, y); }, [](double, double) { return 1.0; }},
      {[](double x, double y) { return Eigen::Vector2d(x * x, x * y); },
       [](double x, double) { return 3.0 * x; }},
      {[](double x, double y) { return Eigen::Vector2d(x * y, y * y); },
       [](double, double y) { return 3.0 * y; }},
  };
}

struct ReferenceBasis {
  int order = 0;
  int size = 0;
  Eigen::MatrixXd coeff;  // monomial -> dual-basis coefficients (size x size)
};

// Legendre moments q_0 = 1, q_1 = 2t-1 on [0,1].
double legendre_moment(int j, double t) { return j == 0 ? 1.0 : 2.0 * t - 1.0; }

ReferenceBasis build_reference_basis(int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("flux space order must be 1 or 2");
  const auto mono = rt_monomials(order);
  const int n = static_cast<int>(mono.size());

  // Mean-scaled moment functionals applied to the monomials.  Edge moments
  // use the counterclockwise traversal P_{i+1} -> P_{i+2} and outward
  // normals; with the 1/|edge| scaling the arclength element cancels and the
  // functional reduces to a unit-interval integral.
  Eigen::MatrixXd vand(n, n);
  const EdgeRule erule = edge_rule(5);
  const TriangleRule trule = triangle_rule(4);
  int row = 0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d a = kRefVertex[(i + 1) % 3];
    const Eigen::Vector2d b = kRefVertex[(i + 2) % 3];
    const Eigen::Vector2d tangent = (b - a).normalized();
    const Eigen::Vector2d normal(tangent.y(), -tangent.x());  // outward for ccw traversal
    for (int j = 0; j < order; ++j, ++row) {
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (size_t q = 0; q < erule.points.size(); ++q) {
          const double t = erule.points[q];
          const Eigen::Vector2d p = a + t * (b - a);
          acc += erule.weights[q] * mono[k].value(p.x(), p.y()).dot(normal) * legendre_moment(j, t);
        }
        vand(row, k) = acc;
      }
    }
  }
  if (order == 2) {
    for (int c = 0; c < 2; ++c, ++row) {
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (size_t q = 0; q < trule.points.size(); ++q) {
          const auto& p = trule.points[q];
          acc += trule.weights[q] * mono[k].value(p[0], p[1])(c);
        }
        vand(row, k) = 2.0 * acc;  // 1/|ref triangle| = 2
      }
    }
  }

  ReferenceBasis basis;
  basis.order = order;
  basis.size = n;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(vand);
  if (!lu.isInvertible()) throw std::runtime_error("reference flux basis: moment matrix is singular");
  basis.coeff = lu.inverse();
  return basis;
}

const ReferenceBasis& reference_basis(int order) {
  static const ReferenceBasis b1 = build_reference_basis(1);
  static const ReferenceBasis b2 = build_reference_basis(2);
  if (order == 1) return b1;
  if (order == 2) return b2;
  throw std::invalid_argument("flux space order must be 1 or 2");
}

double ref_edge_length(int i) { return i == 0 ? std::sqrt(2.0) : 1.0; }

}  // namespace

std::vector<RtValue> eval_rt_basis(int order, double x, double y) {
  const ReferenceBasis& basis = reference_basis(order);
  const auto mono = rt_monomials(order);
  std::vector<RtValue> out(basis.size);
  for (int k = 0; k < basis.size; ++k) {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    double dv = 0;
    for (int j = 0; j < basis.size; ++j) {
      const double c = basis.coeff(j, k);
      if (c == 0) continue;
      v += c * mono[j].value(x, y);
      dv += c * mono[j].div(x, y);
    }
    out[k] = {v, dv};
  }
  return out;
}

RtValue piola_map(const CellGeometry& g, const RtValue& ref) {
  if (!(g.detB > 0)) throw std::invalid_argument("piola_map: cell Jacobian must have positive determinant");
  return {g.B * ref.value / g.detB, ref.div / g.detB};
}

FunctionSpacePair make_space_pair(const Mesh& mesh, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("flux space order must be 1 or 2");
  FunctionSpacePair sp;
  sp.mesh = &mesh;
  sp.order = order;
  const int T = mesh.num_triangles();
  const int E = mesh.num_edges();
  sp.num_flux_dofs = order * E + (order == 2 ? 2 * T : 0);
  sp.conc_dofs_per_cell = (order == 1) ? 1 : 3;
  sp.num_conc_dofs = sp.conc_dofs_per_cell * T;
  sp.flux_dofs_per_cell = 3 * order + (order == 2 ? 2 : 0);

  sp.geom.resize(T);
  sp.cell_flux_dofs.resize(T);
  sp.edge_dof_scale.resize(T);
  sp.edge_signs.resize(T);
  if (order == 2) sp.interior_transform.resize(T);

  for (int t = 0; t < T; ++t) {
    const Triangle& tri = mesh.triangles[t];
    CellGeometry g;
    const auto& p0 = mesh.vertices[tri.v[0]];
    const auto& p1 = mesh.vertices[tri.v[1]];
    const auto& p2 = mesh.vertices[tri.v[2]];
    g.origin = Eigen::Vector2d(p0[0], p0[1]);
    g.B.col(0) = Eigen::Vector2d(p1[0] - p0[0], p1[1] - p0[1]);
    g.B.col(1) = Eigen::Vector2d(p2[0] - p0[0], p2[1] - p0[1]);
    g.detB = g.B.determinant();
    if (!(g.detB > 0)) throw std::runtime_error("make_space_pair: triangle is not counterclockwise");
    g.Binv = g.B.inverse();
    sp.geom[t] = g;

    for (int i = 0; i < 3; ++i) {
      const int e = tri.edge[i];
      const Edge& edge = mesh.edges[e];
      // Sign reconciling the cell's outward normal with the edge normal.
      const auto n_out = outward_normal(mesh, e, t);
      const double dot = n_out[0] * edge.normal[0] + n_out[1] * edge.normal[1];
      const int s_n = dot > 0 ? 1 : -1;
      sp.edge_signs[t][i] = static_cast<signed char>(s_n);
      // Orientation of the cell's ccw traversal vs. the global a->b direction.
      const int ga = tri.v[(i + 1) % 3];
      const int f = (ga == edge.a) ? 1 : -1;
      for (int j = 0; j < order; ++j) {
        const int k = i * order + j;
        sp.cell_flux_dofs[t][k] = order * e + j;
        const double flip = (j == 0) ? s_n : s_n * f;
        sp.edge_dof_scale[t][k] = flip * edge.length / ref_edge_length(i);
      }
    }
    if (order == 2) {
      sp.cell_flux_dofs[t][6] = 2 * E + 2 * t;
      sp.cell_flux_dofs[t][7] = 2 * E + 2 * t + 1;
      sp.interior_transform[t] = g.detB * g.Binv;
    }
  }
  return sp;
}

void map_flux_basis(const FunctionSpacePair& sp, int cell,
                    const std::vector<RtValue>& ref, std::array<RtValue, 8>& out) {
  const CellGeometry& g = sp.geom[cell];
  const int ne = 3 * sp.order;
  for (int k = 0; k < ne; ++k) {
    const RtValue mapped = piola_map(g, ref[k]);
    const double s = sp.edge_dof_scale[cell][k];
    out[k] = {s * mapped.value, s * mapped.div};
  }
  if (sp.order == 2) {
    const Eigen::Matrix2d& X = sp.interior_transform[cell];
    RtValue m0 = piola_map(g, ref[6]);
    RtValue m1 = piola_map(g, ref[7]);
    for (int c = 0; c < 2; ++c) {
      out[ne + c].value = X(0, c) * m0.value + X(1, c) * m1.value;
      out[ne + c].div = X(0, c) * m0.div + X(1, c) * m1.div;
    }
  }
}

int eval_conc_basis(int order, double rx, double ry, std::array<double, 3>& out) {
  out[0] = 1.0;
  if (order == 1) return 1;
  out[1] = rx;
  out[2] = ry;
  return 3;
}

EdgeRefMap edge_ref_map(const Mesh& mesh, int tri, int edge) {
  const int i = mesh.local_edge(tri, edge);
  const Triangle& t = mesh.triangles[tri];
  const Edge& e = mesh.edges[edge];
  const Eigen::Vector2d pa = kRefVertex[(i + 1) % 3];
  const Eigen::Vector2d pb = kRefVertex[(i + 2) % 3];
  if (t.v[(i + 1) % 3] == e.a) return {pa, pb};
  return {pb, pa};
}

Eigen::Vector2d flux_value(const FunctionSpacePair& sp, int cell, double rx, double ry,
                           const Eigen::VectorXd& coeffs) {
  const auto ref = eval_rt_basis(sp.order, rx, ry);
  std::array<RtValue, 8> phys;
  map_flux_basis(sp, cell, ref, phys);
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int k = 0; k < sp.flux_dofs_per_cell; ++k)
    v += coeffs[sp.cell_flux_dofs[cell][k]] * phys[k].value;
  return v;
}

double flux_div_value(const FunctionSpacePair& sp, int cell, const Eigen::VectorXd& coeffs,
                      double rx, double ry) {
  const auto ref = eval_rt_basis(sp.order, rx, ry);
  std::array<RtValue, 8> phys;
  map_flux_basis(sp, cell, ref, phys);
  double d = 0;
  for (int k = 0; k < sp.flux_dofs_per_cell; ++k)
    d += coeffs[sp.cell_flux_dofs[cell][k]] * phys[k].div;
  return d;
}

double conc_value(const FunctionSpacePair& sp, int cell, double rx, double ry,
                  const Eigen::VectorXd& coeffs) {
  std::array<double, 3> psi;
  const int n = eval_conc_basis(sp.order, rx, ry, psi);
  double v = 0;
  for (int k = 0; k < n; ++k) v += coeffs[sp.conc_dof(cell, k)] * psi[k];
  return v;
}

Eigen::VectorXd canonical_interpolation(const FunctionSpacePair& sp,
                                        const std::function<Eigen::Vector2d(double, double)>& field) {
  const Mesh& mesh = *sp.mesh;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(sp.num_flux_dofs);
  const EdgeRule erule = edge_rule(11);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    const auto& pa = mesh.vertices[edge.a];
    const auto& pb = mesh.vertices[edge.b];
    const Eigen::Vector2d a(pa[0], pa[1]), b(pb[0], pb[1]);
    const Eigen::Vector2d n(edge.normal[0], edge.normal[1]);
    for (int j = 0; j < sp.order; ++j) {
      double acc = 0;
      for (size_t q = 0; q < erule.points.size(); ++q) {
        const double t = erule.points[q];
        const Eigen::Vector2d p = a + t * (b - a);
        acc += erule.weights[q] * field(p.x(), p.y()).dot(n) * legendre_moment(j, t);
      }
      coeffs[sp.order * e + j] = acc;
    }
  }
  if (sp.order == 2) {
    const TriangleRule trule = triangle_rule(10);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const CellGeometry& g = sp.geom[t];
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (size_t q = 0; q < trule.points.size(); ++q) {
        const Eigen::Vector2d p = g.map(trule.points[q][0], trule.points[q][1]);
        mean += trule.weights[q] * field(p.x(), p.y());
      }
      // Weights sum to 1/2 = |ref triangle|, so the cell mean is 2x the sum.
      coeffs[sp.cell_flux_dofs[t][6]] = 2.0 * mean.x();
      coeffs[sp.cell_flux_dofs[t][7]] = 2.0 * mean.y();
    }
  }
  return coeffs;
}

Eigen::VectorXd l2_projection(const FunctionSpacePair& sp,
                              const std::function<double(double, double)>& field) {
  const Mesh& mesh = *sp.mesh;
  Eigen::VectorXd coeffs(sp.num_conc_dofs);
  const TriangleRule trule = triangle_rule(10);
  const int n = sp.conc_dofs_per_cell;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry& g = sp.geom[t];
    Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    std::array<double, 3> psi;
    for (size_t q = 0; q < trule.points.size(); ++q) {
      const auto& rp = trule.points[q];
      eval_conc_basis(sp.order, rp[0], rp[1], psi);
      const Eigen::Vector2d p = g.map(rp[0], rp[1]);
      const double w = trule.weights[q] * g.detB;
      const double f = field(p.x(), p.y());
      for (int i = 0; i < n; ++i) {
        rhs[i] += w * f * psi[i];
        for (int j = 0; j < n; ++j) mass(i, j) += w * psi[i] * psi[j];
      }
    }
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    c.head(n) = mass.topLeftCorner(n, n).ldlt().solve(rhs.head(n));
    for (int k = 0; k < n; ++k) coeffs[sp.conc_dof(t, k)] = c[k];
  }
  return coeffs;
}

}  // namespace memfem
