#include "memfem/stepper.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace memfem {

namespace {

void check_dt_condition(const ProblemConfig& cfg, double dt) {
  if (dt * cfg.lipschitz_estimate < 2.0) return;
  if (cfg.dt_policy == DtPolicy::HardError)
    throw std::runtime_error("cn_step: dt * L = " + std::to_string(dt * cfg.lipschitz_estimate) +
                             " >= 2 violates the contraction condition (set WarnAndProceed to override)");
}

Eigen::VectorXd pack(const Eigen::VectorXd& flux, const Eigen::VectorXd& conc) {
  Eigen::VectorXd x(flux.size() + conc.size());
  x << flux, conc;
  return x;
}

}  // namespace

double phi_norm(const AssembledOperators& ops, double dt,
                const std::vector<Eigen::VectorXd>& dflux,
                const std::vector<Eigen::VectorXd>& dconc) {
  double acc = 0;
  for (size_t i = 0; i < dflux.size(); ++i) {
    acc += dt * dflux[i].dot(ops.flux_op[i] * dflux[i]);
    acc += 2.0 * dconc[i].dot(ops.conc_mass * dconc[i]);
  }
  return std::sqrt(std::max(acc, 0.0));
}

StateVector initial_data(const FunctionSpacePair& sp, const AssembledOperators& ops,
                         const ProblemConfig& cfg,
                         const std::function<double(int, double, double)>& conc0, double t0) {
  cfg.validate();
  StateVector state;
  state.t = t0;
  for (int i = 0; i < cfg.num_species; ++i) {
    state.conc.push_back(l2_projection(sp, [&](double x, double y) { return conc0(i, x, y); }));
    const ConstrainedMatrix cm = factor_constrained(ops.flux_op[i], ops.neumann.dofs);
    const Eigen::VectorXd rhs =
        ops.div_op.transpose() * state.conc.back() + assemble_dirichlet_rhs(sp, cfg, i, t0);
    const Eigen::VectorXd vals = neumann_constraint_values(sp, ops.neumann, cfg, i, t0);
    state.flux.push_back(solve_constrained(cm, rhs, vals));
  }
  return state;
}

std::pair<StateVector, PicardReport> cn_step(const FunctionSpacePair& sp,
                                             const AssembledOperators& ops, const BlockSystem& sys,
                                             const ProblemConfig& cfg, const StateVector& state,
                                             const PicardOptions& options) {
  const double dt = sys.dt;
  check_dt_condition(cfg, dt);
  const int N = cfg.num_species;
  const double tk = state.t, tk1 = state.t + dt;

  // Step-constant right-hand sides.  Flux rows: -A s^k + B^T u^k plus both
  // endpoint Dirichlet terms; scalar rows: (2/dt) C u^k - B s^k plus the old
  // reaction term and both endpoint sources.  The new reaction term is what
  // the fixed-point iteration updates.
  const auto d_old = assemble_reaction(sp, cfg, state.conc);
  std::vector<Eigen::VectorXd> rhs_flux(N), rhs_conc_base(N), vals(N);
  for (int i = 0; i < N; ++i) {
    rhs_flux[i] = -(ops.flux_op[i] * state.flux[i]) + ops.div_op.transpose() * state.conc[i] +
                  assemble_dirichlet_rhs(sp, cfg, i, tk) + assemble_dirichlet_rhs(sp, cfg, i, tk1);
    rhs_conc_base[i] = (2.0 / dt) * (ops.conc_mass * state.conc[i]) - ops.div_op * state.flux[i] + d_old[i];
    if (cfg.source) {
      rhs_conc_base[i] += assemble_scalar_load(sp, [&](double x, double y) { return cfg.source(i, tk, x, y); });
      rhs_conc_base[i] += assemble_scalar_load(sp, [&](double x, double y) { return cfg.source(i, tk1, x, y); });
    }
    vals[i] = neumann_constraint_values(sp, ops.neumann, cfg, i, tk1);
  }

  auto solve_with = [&](const std::vector<Eigen::VectorXd>* d_new, StateVector& out) {
    out.t = tk1;
    out.flux.resize(N);
    out.conc.resize(N);
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd rhs = pack(rhs_flux[i], d_new ? (rhs_conc_base[i] + (*d_new)[i]).eval()
                                                    : rhs_conc_base[i]);
      const Eigen::VectorXd x = solve(sys, i, rhs, vals[i]);
      if (!x.allFinite())
        throw std::runtime_error("cn_step: non-finite iterate at t = " + std::to_string(tk1));
      out.flux[i] = x.head(sys.n_flux);
      out.conc[i] = x.tail(sys.n_conc);
    }
  };

  PicardReport report;
  StateVector prev;
  if (options.seed_conc) {
    const auto d_seed = assemble_reaction(sp, cfg, *options.seed_conc);
    solve_with(&d_seed, prev);
  } else {
    solve_with(nullptr, prev);
  }

  std::vector<Eigen::VectorXd> dflux(N), dconc(N);
  double prev_increment = -1;
  StateVector cur;
  for (int m = 1; m <= options.max_iter; ++m) {
    const auto d_new = assemble_reaction(sp, cfg, prev.conc);
    solve_with(&d_new, cur);
    for (int i = 0; i < N; ++i) {
      dflux[i] = cur.flux[i] - prev.flux[i];
      dconc[i] = cur.conc[i] - prev.conc[i];
    }
    const double inc = phi_norm(ops, dt, dflux, dconc);
    if (m == 1)
      report.first_increment = inc;
    else if (prev_increment > 0)
      report.contraction_ratios.push_back(inc / prev_increment);
    report.final_increment = inc;
    report.iterations = m;
    prev = cur;
    if (inc <= options.tol_rel * report.first_increment + options.tol_abs) {
      report.converged = true;
      break;
    }
    prev_increment = inc;
  }
  if (!report.converged && options.throw_on_max_iter) {
    const double last = report.contraction_ratios.empty() ? 0.0 : report.contraction_ratios.back();
    throw std::runtime_error("cn_step: fixed-point iteration did not converge in " +
                             std::to_string(options.max_iter) + " iterations (last ratio " +
                             std::to_string(last) + ")");
  }

  // Residual of the nonlinear step equations at the accepted state, with the
  // reaction evaluated there; constrained flux rows hold by construction.
  const auto d_acc = assemble_reaction(sp, cfg, prev.conc);
  double acc = 0;
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd rf = ops.flux_op[i] * prev.flux[i] - ops.div_op.transpose() * prev.conc[i] - rhs_flux[i];
    for (int r : ops.neumann.dofs) rf[r] = 0;
    const Eigen::VectorXd rc = ops.div_op * prev.flux[i] + (2.0 / dt) * (ops.conc_mass * prev.conc[i]) -
                               rhs_conc_base[i] - d_acc[i];
    acc += rf.squaredNorm() + rc.squaredNorm();
  }
  report.scheme_residual = std::sqrt(acc);

  return {std::move(prev), std::move(report)};
}

StateVector run_transient(const FunctionSpacePair& sp, const ProblemConfig& cfg, double T, double dt,
                          const std::function<double(int, double, double)>& conc0,
                          const StepObserver& observer, const PicardOptions& options) {
  cfg.validate();
  if (T < 0) throw std::invalid_argument("run_transient: T must be nonnegative");
  long steps = 0;
  if (T > 0) {
    if (!(dt > 0)) throw std::invalid_argument("run_transient: dt must be positive");
    steps = std::llround(T / dt);
    if (std::abs(steps * dt - T) > 1e-12 * std::max(1.0, T))
      throw std::invalid_argument("run_transient: T/dt must be integral");
    if (dt * cfg.lipschitz_estimate >= 2.0 && cfg.dt_policy == DtPolicy::WarnAndProceed)
      std::cerr << "warning: dt * L = " << dt * cfg.lipschitz_estimate
                << " >= 2; the contraction guarantee does not apply\n";
  }

  const AssembledOperators ops = assemble_operators(sp, cfg);
  StateVector state = initial_data(sp, ops, cfg, conc0, 0.0);
  if (steps == 0) return state;

  const BlockSystem sys = build_block_system(ops, dt);
  for (long k = 0; k < steps; ++k) {
    auto [next, report] = cn_step(sp, ops, sys, cfg, state, options);
    // Keep the grid exact; the step uses state.t internally.
    next.t = (k + 1) * dt;
    state = std::move(next);
    if (observer) observer(static_cast<int>(k + 1), state.t, state, report);
  }
  return state;
}

}  // namespace memfem
