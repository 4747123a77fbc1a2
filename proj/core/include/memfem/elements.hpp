#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "memfem/mesh.hpp"

namespace memfem {

// Mixed pair on triangles: H(div)-conforming Raviart-Thomas flux space of
// order l together with discontinuous piecewise polynomials of degree l-1
// for the scalar part, l in {1, 2}.
//
// Flux degrees of freedom are mean-scaled integral moments:
//   edge (e, j):   (1/|e|) * integral over e of (v . n_e) q_j(t) ds
//   interior (c):  (1/|T|) * integral over T of v_c dx          (order 2)
// where n_e is the edge normal (tangent a->b rotated -90 deg, a < b global
// vertices), t the normalized a->b arclength parameter, and q_0 = 1,
// q_1 = 2t - 1.  With this scaling coefficients are comparable to point
// values of v . n, and a constant field has O(1) coefficients on any mesh.

struct RtValue {
  Eigen::Vector2d value;
  double div = 0;
};

// The reference basis dual to the functionals above on the reference
// triangle (0,0)-(1,0)-(0,1) with counterclockwise local edges
// i: P_{i+1} -> P_{i+2} (mod 3) and outward normals.  Ordering: for each
// local edge i the `order` moments (constant first), then for order 2 the
// two interior functions.  Returns 3 functions for order 1, 8 for order 2.
std::vector<RtValue> eval_rt_basis(int order, double x, double y);

struct CellGeometry {
  Eigen::Matrix2d B;       // reference->physical Jacobian (columns v1-v0, v2-v0)
  Eigen::Vector2d origin;  // image of the reference origin
  double detB = 0;
  Eigen::Matrix2d Binv;

  Eigen::Vector2d map(double rx, double ry) const {
    return origin + B * Eigen::Vector2d(rx, ry);
  }
};

// Contravariant (Piola) transform: value -> B v / detB, div -> div / detB.
// Requires detB > 0.
RtValue piola_map(const CellGeometry& g, const RtValue& ref);

struct FunctionSpacePair {
  const Mesh* mesh = nullptr;
  int order = 0;                 // l in {1, 2}
  int num_flux_dofs = 0;         // order*E (+ 2T for order 2)
  int num_conc_dofs = 0;         // T or 3T
  int flux_dofs_per_cell = 0;    // 3*order (+2 interior)
  int conc_dofs_per_cell = 0;    // 1 or 3

  std::vector<CellGeometry> geom;                       // per triangle
  std::vector<std::array<int, 8>> cell_flux_dofs;       // global flux dofs per cell
  std::vector<std::array<double, 6>> edge_dof_scale;    // per local edge dof: sign * |e|/|ref edge|
  std::vector<Eigen::Matrix2d> interior_transform;      // detB * B^{-1} (order 2 only)
  std::vector<std::array<signed char, 3>> edge_signs;   // +1 iff cell outward normal == edge normal

  int conc_dof(int cell, int k) const { return cell * conc_dofs_per_cell + k; }
};

FunctionSpacePair make_space_pair(const Mesh& mesh, int order);

// Physical flux basis of `cell` given the reference basis evaluated at the
// same reference point; writes flux_dofs_per_cell entries.
void map_flux_basis(const FunctionSpacePair& sp, int cell,
                    const std::vector<RtValue>& ref, std::array<RtValue, 8>& out);

// Scalar basis on the reference triangle: {1} or {1, x, y}.
int eval_conc_basis(int order, double rx, double ry, std::array<double, 3>& out);

// Reference endpoints of global edge `edge` within incident triangle `tri`,
// ordered to match the global a->b orientation of the edge.
struct EdgeRefMap {
  Eigen::Vector2d ref_a, ref_b;
};
EdgeRefMap edge_ref_map(const Mesh& mesh, int tri, int edge);

// Field evaluation from global coefficient vectors.
Eigen::Vector2d flux_value(const FunctionSpacePair& sp, int cell, double rx, double ry,
                           const Eigen::VectorXd& coeffs);
double flux_div_value(const FunctionSpacePair& sp, int cell, const Eigen::VectorXd& coeffs,
                      double rx, double ry);
double conc_value(const FunctionSpacePair& sp, int cell, double rx, double ry,
                  const Eigen::VectorXd& coeffs);

// Canonical interpolation onto the flux space: coefficients are the moment
// functionals applied to the field (edge moments via a 6-point Gauss rule,
// interior moments via a degree-10 triangle rule).
Eigen::VectorXd canonical_interpolation(const FunctionSpacePair& sp,
                                        const std::function<Eigen::Vector2d(double, double)>& field);

// Cellwise L2 projection onto the scalar space (degree-10 quadrature).
Eigen::VectorXd l2_projection(const FunctionSpacePair& sp,
                              const std::function<double(double, double)>& field);

}  // namespace memfem
