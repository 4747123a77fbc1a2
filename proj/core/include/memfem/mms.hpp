#pragma once

#include <array>

#include "memfem/assembly.hpp"

namespace memfem {

// Which side of the membrane x = 1/2 a trace is taken from.  Auto picks by
// the sign of x - 1/2 (points exactly on the membrane resolve to Plus).
enum class Side { Auto, Minus, Plus };

// Two-species manufactured benchmark on the unit square with a membrane at
// x = 1/2:
//   u_i(t,x,y) = phi(t,x) * base_i(x,y),  phi = 1 + cos(t) (x-1/2)^2,
// with piecewise-smooth bases arranged so that the flux normal component is
// continuous across the membrane while the scalar jumps by +1 (species 1)
// and -1 (species 2).  Diffusivities are 1, the reaction terms are
// f_1 = u1^2 u2^3 and f_2 = u1^3 u2^3, and the membrane permeabilities are
// *derived* from the jump law flux . n = K_i [u_i] rather than chosen.
struct ManufacturedSolution {
  static constexpr int num_species = 2;

  double conc(int i, double t, double x, double y, Side side = Side::Auto) const;
  double conc_dt(int i, double t, double x, double y, Side side = Side::Auto) const;
  Eigen::Vector2d flux(int i, double t, double x, double y, Side side = Side::Auto) const;
  double flux_div(int i, double t, double x, double y, Side side = Side::Auto) const;

  double reaction(int i, double u1, double u2) const;
  // Lipschitz bound for the reaction pair over the max-norm ball of radius R.
  double lipschitz(double radius) const;

  // Volume source balancing time derivative, diffusion and reaction.
  double source(int i, double t, double x, double y, Side side = Side::Auto) const;

  // Scalar trace on the Dirichlet boundary y in {0,1}.
  double dirichlet(int i, double t, double x, double y) const;
  // flux . n with n the outward domain normal, on the Neumann boundary x in {0,1}.
  double neumann(int i, double t, double x, double y) const;

  // u_i(1/2+, y) - u_i(1/2-, y).
  double jump(int i, double t, double y) const;
};

// Membrane permeabilities from flux/jump compatibility, sampled along the
// membrane and across time and verified constant to 1e-12.
std::array<double, 2> derive_membrane_constants();

// Problem configuration for the benchmark: kappa = 1, derived K, boundary
// data, sources, and the Lipschitz estimate over the max-norm ball |u| <= 3
// that encloses the exact solution.
ProblemConfig manufactured_config(DtPolicy policy = DtPolicy::HardError);

}  // namespace memfem
