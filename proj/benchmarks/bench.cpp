#include <benchmark/benchmark.h>

#include "memfem/linsolve.hpp"
#include "memfem/mms.hpp"
#include "memfem/stepper.hpp"

using namespace memfem;

namespace {

const Mesh& mesh16() {
  static const Mesh m = build_structured(16);
  return m;
}

void BM_AssembleFluxOperator(benchmark::State& state) {
  const FunctionSpacePair sp = make_space_pair(mesh16(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_flux_operator(sp, 1.0, 0.9));
}
BENCHMARK(BM_AssembleFluxOperator)->Arg(1)->Arg(2);

void BM_AssembleReaction(benchmark::State& state) {
  const FunctionSpacePair sp = make_space_pair(mesh16(), static_cast<int>(state.range(0)));
  const ProblemConfig cfg = manufactured_config(DtPolicy::WarnAndProceed);
  const ManufacturedSolution sol;
  std::vector<Eigen::VectorXd> conc;
  for (int i = 0; i < 2; ++i)
    conc.push_back(l2_projection(sp, [&](double x, double y) { return sol.conc(i, 0.0, x, y); }));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_reaction(sp, cfg, conc));
}
BENCHMARK(BM_AssembleReaction)->Arg(1)->Arg(2);

void BM_FactorBlockSystem(benchmark::State& state) {
  const FunctionSpacePair sp = make_space_pair(mesh16(), static_cast<int>(state.range(0)));
  const ProblemConfig cfg = manufactured_config(DtPolicy::WarnAndProceed);
  const AssembledOperators ops = assemble_operators(sp, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(build_block_system(ops, 1.0 / 16));
}
BENCHMARK(BM_FactorBlockSystem)->Arg(1)->Arg(2);

void BM_CnStep(benchmark::State& state) {
  const Mesh mesh = build_structured(8);
  const FunctionSpacePair sp = make_space_pair(mesh, static_cast<int>(state.range(0)));
  const ProblemConfig cfg = manufactured_config(DtPolicy::WarnAndProceed);
  const AssembledOperators ops = assemble_operators(sp, cfg);
  const double dt = 1.0 / 8;
  const BlockSystem sys = build_block_system(ops, dt);
  const ManufacturedSolution sol;
  const StateVector s0 = initial_data(
      sp, ops, cfg, [&](int i, double x, double y) { return sol.conc(i, 0.0, x, y); });
  for (auto _ : state) benchmark::DoNotOptimize(cn_step(sp, ops, sys, cfg, s0));
}
BENCHMARK(BM_CnStep)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
