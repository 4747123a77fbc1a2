#pragma once

#include <array>
#include <vector>

namespace memfem {

// Gauss-Legendre rule on [0,1]: n points in ascending order, exact for
// degree <= 2n-1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;  // sum to 1
};

GaussRule gauss_legendre_unit(int n);

// Rule on the unit edge [0,1], exact for polynomials up to `degree`.
// Points are strictly interior, weights positive and summing to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

// Supported degrees: 1..11.  degree=1 is the midpoint rule.
EdgeRule edge_rule(int degree);

// Rule on the reference triangle {x,y >= 0, x+y <= 1}, exact for bivariate
// polynomials of total degree up to `degree`.  Points are strictly interior,
// weights positive and summing to the reference area 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int degree = 0;
};

// Supported degrees: 1..10.  degree=1 is the one-point centroid rule.
TriangleRule triangle_rule(int degree);

}  // namespace memfem
