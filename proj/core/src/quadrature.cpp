#include "memfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace memfem {

namespace {

// Legendre polynomial P_n and derivative at x via the three-term recurrence.
std::array<double, 2> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

GaussRule gauss_legendre_unit(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre_unit: need 1 <= n <= 64");
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev-based initial guess; converges to
    // machine precision in a handful of steps for all n in range.  The guess
    // index is reversed so the mapped points come out ascending.
    double x = std::cos(M_PI * (4.0 * (n - 1 - i) + 3.0) / (4.0 * n + 2.0));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1].
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = 0.5 * w;
  }
  return rule;
}

EdgeRule edge_rule(int degree) {
  if (degree < 1 || degree > 11)
    throw std::invalid_argument("edge_rule: degree " + std::to_string(degree) +
                                " outside supported range [1, 11]");
  const int n = degree / 2 + 1;  // 2n-1 >= degree
  const GaussRule g = gauss_legendre_unit(n);
  EdgeRule rule;
  rule.points = g.points;
  rule.weights = g.weights;
  rule.degree = degree;
  return rule;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 1 || degree > 10)
    throw std::invalid_argument("triangle_rule: degree " + std::to_string(degree) +
                                " outside supported range [1, 10]");
  TriangleRule rule;
  rule.degree = degree;
  if (degree == 1) {
    rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
    rule.weights = {0.5};
    return rule;
  }
  if (degree == 2) {
    rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  // Collapsed tensor product: x = s(1-t), y = t with Jacobian (1-t).  Using
  // n-point Gauss-Legendre in both directions integrates total degree d
  // exactly as long as 2n-2 >= d (the Jacobian raises the t-degree by one).
  const int n = (degree + 3) / 2;  // ceil((degree+2)/2)
  const GaussRule g = gauss_legendre_unit(n);
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    const double t = g.points[j];
    for (int i = 0; i < n; ++i) {
      const double s = g.points[i];
      rule.points.push_back({s * (1.0 - t), t});
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - t));
    }
  }
  return rule;
}

}  // namespace memfem
