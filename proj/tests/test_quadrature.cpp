#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "memfem/quadrature.hpp"

using namespace memfem;

namespace {

double factorial(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// Integral of x^a y^b over the reference triangle.
double tri_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST_CASE("gauss-legendre rules on the unit interval") {
  for (int n : {1, 2, 3, 5, 8, 16, 32, 64}) {
    const GaussRule rule = gauss_legendre_unit(n);
    REQUIRE(rule.points.size() == static_cast<size_t>(n));
    REQUIRE(rule.weights.size() == static_cast<size_t>(n));
    double ws = 0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      CHECK(rule.points[q] > 0.0);
      CHECK(rule.points[q] < 1.0);
      CHECK(rule.weights[q] > 0.0);
      ws += rule.weights[q];
      if (q) CHECK(rule.points[q] > rule.points[q - 1]);
    }
    CHECK(ws == doctest::Approx(1.0).epsilon(1e-14));
    // Exact through degree 2n-1.
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0;
      for (size_t q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.points[q], k);
      CHECK(std::abs(acc - 1.0 / (k + 1)) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_legendre_unit(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_unit(65), std::invalid_argument);
}

TEST_CASE("edge rules: exactness, positivity, interior points") {
  for (int d = 1; d <= 11; ++d) {
    const EdgeRule rule = edge_rule(d);
    CHECK(rule.degree == d);
    double ws = 0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      CHECK(rule.points[q] > 0.0);
      CHECK(rule.points[q] < 1.0);
      CHECK(rule.weights[q] > 0.0);
      ws += rule.weights[q];
    }
    CHECK(ws == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= d; ++k) {
      double acc = 0;
      for (size_t q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.points[q], k);
      CHECK(std::abs(acc - 1.0 / (k + 1)) <= 1e-14);
    }
  }
  CHECK(edge_rule(1).points.size() == 1);
  CHECK(edge_rule(1).points[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(edge_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(edge_rule(12), std::invalid_argument);
}

TEST_CASE("triangle rules: monomial exactness against the closed-form integrals") {
  for (int d = 1; d <= 10; ++d) {
    const TriangleRule rule = triangle_rule(d);
    CHECK(rule.degree == d);
    double ws = 0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double x = rule.points[q][0], y = rule.points[q][1];
      CHECK(x > 0.0);
      CHECK(y > 0.0);
      CHECK(x + y < 1.0);
      CHECK(rule.weights[q] > 0.0);
      ws += rule.weights[q];
    }
    CHECK(ws == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double acc = 0;
        for (size_t q = 0; q < rule.points.size(); ++q)
          acc += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
        CHECK(std::abs(acc - tri_monomial(a, b)) <= 1e-15);
      }
  }
  CHECK_THROWS_AS(triangle_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(11), std::invalid_argument);
}

TEST_CASE("low-degree triangle rules have the expected layouts") {
  const TriangleRule r1 = triangle_rule(1);
  REQUIRE(r1.points.size() == 1);
  CHECK(r1.points[0][0] == doctest::Approx(1.0 / 3));
  CHECK(r1.points[0][1] == doctest::Approx(1.0 / 3));
  CHECK(r1.weights[0] == doctest::Approx(0.5));

  const TriangleRule r2 = triangle_rule(2);
  REQUIRE(r2.points.size() == 3);
  for (double w : r2.weights) CHECK(w == doctest::Approx(1.0 / 6));
}
