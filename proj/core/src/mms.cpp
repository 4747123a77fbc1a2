#include "memfem/mms.hpp"

#include <cmath>
#include <stdexcept>

namespace memfem {

namespace {

constexpr double kThird = M_PI / 3.0;

bool is_plus(double x, Side side) {
  if (side == Side::Minus) return false;
  if (side == Side::Plus) return true;
  return x >= 0.5;
}

// Static-in-time factor of the solution with all partials needed downstream.
struct BaseDerivs {
  double v, dx, dy, dxx, dyy;
};

// base_1- = sin(pi x/3) + s^2 y(1-y)          base_1+ = sin(pi x/3) + 1 + s^2 sin(pi y)
// base_2- = cos(pi x/3) + 2 s^2 y(1-y)        base_2+ = cos(pi x/3) - 1 + 2 s^2 sin(pi y)
// with s = x - 1/2.
BaseDerivs base(int i, double x, double y, bool plus) {
  const double s = x - 0.5;
  BaseDerivs b{};
  const double trig = (i == 0) ? std::sin(kThird * x) : std::cos(kThird * x);
  const double trig_x = (i == 0) ? kThird * std::cos(kThird * x) : -kThird * std::sin(kThird * x);
  const double trig_xx = -kThird * kThird * trig;
  const double amp = (i == 0) ? 1.0 : 2.0;
  const double shift = (i == 0) ? 1.0 : -1.0;
  if (plus) {
    const double w = std::sin(M_PI * y);
    b.v = trig + shift + amp * s * s * w;
    b.dx = trig_x + amp * 2.0 * s * w;
    b.dxx = trig_xx + amp * 2.0 * w;
    b.dy = amp * s * s * M_PI * std::cos(M_PI * y);
    b.dyy = -amp * s * s * M_PI * M_PI * w;
  } else {
    const double w = y * (1.0 - y);
    b.v = trig + amp * s * s * w;
    b.dx = trig_x + amp * 2.0 * s * w;
    b.dxx = trig_xx + amp * 2.0 * w;
    b.dy = amp * s * s * (1.0 - 2.0 * y);
    b.dyy = -2.0 * amp * s * s;
  }
  return b;
}

void check_species(int i) {
  if (i < 0 || i > 1) throw std::invalid_argument("manufactured solution has exactly two species");
}

}  // namespace

double ManufacturedSolution::conc(int i, double t, double x, double y, Side side) const {
  check_species(i);
  const double s = x - 0.5;
  const double phi = 1.0 + std::cos(t) * s * s;
  return phi * base(i, x, y, is_plus(x, side)).v;
}

double ManufacturedSolution::conc_dt(int i, double t, double x, double y, Side side) const {
  check_species(i);
  const double s = x - 0.5;
  return -std::sin(t) * s * s * base(i, x, y, is_plus(x, side)).v;
}

Eigen::Vector2d ManufacturedSolution::flux(int i, double t, double x, double y, Side side) const {
  check_species(i);
  const double s = x - 0.5;
  const double phi = 1.0 + std::cos(t) * s * s;
  const double phi_x = 2.0 * std::cos(t) * s;
  const BaseDerivs b = base(i, x, y, is_plus(x, side));
  // flux = -grad u with unit diffusivity.
  return {-(phi_x * b.v + phi * b.dx), -(phi * b.dy)};
}

double ManufacturedSolution::flux_div(int i, double t, double x, double y, Side side) const {
  check_species(i);
  const double s = x - 0.5;
  const double phi = 1.0 + std::cos(t) * s * s;
  const double phi_x = 2.0 * std::cos(t) * s;
  const double phi_xx = 2.0 * std::cos(t);
  const BaseDerivs b = base(i, x, y, is_plus(x, side));
  const double u_xx = phi_xx * b.v + 2.0 * phi_x * b.dx + phi * b.dxx;
  const double u_yy = phi * b.dyy;
  return -(u_xx + u_yy);
}

double ManufacturedSolution::reaction(int i, double u1, double u2) const {
  check_species(i);
  if (i == 0) return u1 * u1 * u2 * u2 * u2;
  return u1 * u1 * u1 * u2 * u2 * u2;
}

double ManufacturedSolution::lipschitz(double radius) const {
  const double r = std::abs(radius);
  const double r2 = r * r, r4 = r2 * r2;
  // Gradient bounds over the ball: |grad f_1| <= sqrt(13) R^4,
  // |grad f_2| <= 3 sqrt(2) R^5.
  return std::max(std::sqrt(13.0) * r4, 3.0 * std::sqrt(2.0) * r4 * r);
}

double ManufacturedSolution::source(int i, double t, double x, double y, Side side) const {
  const double u1 = conc(0, t, x, y, side);
  const double u2 = conc(1, t, x, y, side);
  return conc_dt(i, t, x, y, side) + flux_div(i, t, x, y, side) - reaction(i, u1, u2);
}

double ManufacturedSolution::dirichlet(int i, double t, double x, double y) const {
  return conc(i, t, x, y, Side::Auto);
}

double ManufacturedSolution::neumann(int i, double t, double x, double y) const {
  const double nx = (x < 0.5) ? -1.0 : 1.0;
  return flux(i, t, x, y, Side::Auto).x() * nx;
}

double ManufacturedSolution::jump(int i, double t, double y) const {
  return conc(i, t, 0.5, y, Side::Plus) - conc(i, t, 0.5, y, Side::Minus);
}

std::array<double, 2> derive_membrane_constants() {
  const ManufacturedSolution sol;
  std::array<double, 2> K{};
  for (int i = 0; i < 2; ++i) {
    double value = 0;
    bool first = true;
    for (double t : {0.0, 0.17, 0.34, 0.5}) {
      for (int k = 0; k <= 20; ++k) {
        const double y = k / 20.0;
        // Membrane normal points out of the plus side: n = (-1, 0).
        const double fn_plus = -sol.flux(i, t, 0.5, y, Side::Plus).x();
        const double fn_minus = -sol.flux(i, t, 0.5, y, Side::Minus).x();
        if (std::abs(fn_plus - fn_minus) > 1e-12)
          throw std::runtime_error("derive_membrane_constants: flux normal trace is discontinuous");
        const double j = sol.jump(i, t, y);
        const double q = fn_plus / j;
        if (first) {
          value = q;
          first = false;
        } else if (std::abs(q - value) > 1e-12 * std::max(1.0, std::abs(value))) {
          throw std::runtime_error("derive_membrane_constants: flux/jump quotient is not constant");
        }
      }
    }
    if (!(value > 0)) throw std::runtime_error("derive_membrane_constants: permeability must be positive");
    K[i] = value;
  }
  return K;
}

ProblemConfig manufactured_config(DtPolicy policy) {
  static const ManufacturedSolution sol;
  ProblemConfig cfg;
  cfg.num_species = 2;
  cfg.kappa = {1.0, 1.0};
  const auto K = derive_membrane_constants();
  cfg.membrane = {K[0], K[1]};
  cfg.reaction.f = [](int i, const std::vector<double>& u) {
    return ManufacturedSolution{}.reaction(i, u[0], u[1]);
  };
  cfg.reaction.lipschitz = [](double r) { return ManufacturedSolution{}.lipschitz(r); };
  // The exact solution stays inside |u_i| <= 3.
  cfg.lipschitz_estimate = sol.lipschitz(3.0);
  cfg.dt_policy = policy;
  cfg.dirichlet = [](int i, double t, double x, double y) { return sol.dirichlet(i, t, x, y); };
  cfg.neumann = [](int i, double t, double x, double y) { return sol.neumann(i, t, x, y); };
  cfg.source = [](int i, double t, double x, double y) { return sol.source(i, t, x, y); };
  return cfg;
}

}  // namespace memfem
