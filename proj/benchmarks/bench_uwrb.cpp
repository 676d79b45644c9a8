#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "uwrb/rom.hpp"
#include "uwrb/study.hpp"
#include "uwrb/transport.hpp"

using namespace uwrb;

namespace {

const FlowField& darcy() {
  static const FlowField flow = make_flow(StudyConfig{}, Geometry::darcy);
  return flow;
}

const AffineSystem& system_at(int level) {
  static std::map<int, std::unique_ptr<AffineSystem>> cache;
  auto& slot = cache[level];
  if (!slot) {
    auto mesh = std::make_shared<const Mesh>(build_mesh(level));
    auto space = std::make_shared<const LagrangeSpace>(mesh, 1);
    slot = std::make_unique<AffineSystem>(
        assemble_affine(space, darcy(), classify_boundary(*mesh, Geometry::darcy), InflowProfile::sin_pi_sq));
  }
  return *slot;
}

const GreedyResult& trained() {
  static const GreedyResult result = [] {
    const AffineSystem& sys = system_at(2);
    GreedyOptions options;
    options.max_basis_size = 14;
    options.constants = make_constants(StudyConfig{}, darcy());
    return greedy_train(sys, training_set(ParameterDomain::p2, 630), options);
  }();
  return result;
}

const Parameter kMu{0.45, 0.15, 0.8};

}  // namespace

static void BM_AssembleAffine(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  auto mesh = std::make_shared<const Mesh>(build_mesh(level));
  auto space = std::make_shared<const LagrangeSpace>(mesh, 1);
  const auto facets = classify_boundary(*mesh, Geometry::darcy);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_affine(space, darcy(), facets, InflowProfile::sin_pi_sq));
  }
  state.counters["dofs"] = static_cast<double>(space->num_dofs());
}
BENCHMARK(BM_AssembleAffine)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

static void BM_FomSolve(benchmark::State& state) {
  const AffineSystem& sys = system_at(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fom(sys, kMu).coefficients.data());
  }
  state.counters["dofs"] = static_cast<double>(sys.gram.rows());
}
BENCHMARK(BM_FomSolve)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

static void BM_RomSolve(benchmark::State& state) {
  const ReducedModel model = trained().model.prefix(static_cast<std::size_t>(state.range(0)));
  const auto mode = state.range(1) ? ResidualNormMode::gram : ResidualNormMode::factor;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rom_solve(model, kMu, mode).certificate.estimate);
  }
}
BENCHMARK(BM_RomSolve)->ArgsProduct({{2, 6, 10, 14}, {0, 1}})->Unit(benchmark::kMicrosecond);

static void BM_GramSchmidt(benchmark::State& state) {
  const AffineSystem& sys = system_at(2);
  const Eigen::MatrixXd vectors = trained().basis.vectors + 1e-3 * Eigen::MatrixXd::Random(
                                                                      trained().basis.vectors.rows(), trained().basis.vectors.cols());
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_schmidt(vectors, sys.gram).vectors.data());
  }
}
BENCHMARK(BM_GramSchmidt)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
