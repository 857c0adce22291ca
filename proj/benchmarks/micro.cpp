#include <benchmark/benchmark.h>

#include "sparseid/ambiguize.hpp"
#include "sparseid/experiments.hpp"
#include "sparseid/pipeline.hpp"
#include "sparseid/search.hpp"
#include "sparseid/transform.hpp"

using namespace sparseid;

namespace {

void BM_Encode(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Transform w = Transform::orthonormal(random_orthonormal(n, n, 1));
  const Eigen::MatrixXd x = bench::gen_database(64, n, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(x.col(static_cast<Eigen::Index>(i++ % 64)), w, n / 8));
  }
}
BENCHMARK(BM_Encode)->Arg(128)->Arg(256);

void BM_IndexQuery(benchmark::State& state) {
  const std::size_t items = static_cast<std::size_t>(state.range(0));
  const std::size_t length = 128, sparsity = 16;
  const Eigen::MatrixXd x = bench::gen_database(items, length, 3);
  const Transform w = Transform::orthonormal(random_orthonormal(length, length, 4));
  const auto bundle =
      ambiguize_codebook(encode_columns(x, w, sparsity), {noise_count_for(0.5, length, sparsity), 0, 5, 6}, w, sparsity);
  const PublicSearcher searcher(bundle);
  Rng rng(7);
  const TernaryCode q =
      client_query(x.col(0), w, sparsity, noise_count_for(0.25, length, sparsity), bundle.selection, rng);
  for (auto _ : state) benchmark::DoNotOptimize(searcher.search(q, ListRule::top_gamma(10)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * items));
}
BENCHMARK(BM_IndexQuery)->Arg(1000)->Arg(10000);

void BM_BruteForceScores(benchmark::State& state) {
  const std::size_t items = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd x = bench::gen_database(items, 128, 3);
  const Transform w = Transform::orthonormal(random_orthonormal(128, 128, 4));
  const Codebook codes = encode_columns(x, w, 16);
  const TernaryCode q = encode(x.col(0), w, 16);
  for (auto _ : state) benchmark::DoNotOptimize(score_all(codes, q));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * items));
}
BENCHMARK(BM_BruteForceScores)->Arg(1000)->Arg(10000);

void BM_LearnTransform(benchmark::State& state) {
  const Eigen::MatrixXd x = bench::gen_database(2000, 128, 8);
  LearningConfig cfg;
  cfg.sparsity = 16;
  cfg.max_iterations = static_cast<std::size_t>(state.range(0));
  cfg.convergence_tol = 1e-300;
  for (auto _ : state) benchmark::DoNotOptimize(learn_transform(x, cfg));
}
BENCHMARK(BM_LearnTransform)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_PrivateRefine(benchmark::State& state) {
  const Eigen::MatrixXd x = bench::gen_database(10000, 128, 9);
  LearningConfig base;
  base.max_iterations = 3;
  const auto layers = build_layers(x, uniform_layer_specs(3, 16, base));
  std::vector<std::uint32_t> list(static_cast<std::size_t>(state.range(0)));
  for (std::uint32_t i = 0; i < list.size(); ++i) list[i] = i * 7;
  const PrivateQuery q{x.col(0), 3, list};
  for (auto _ : state) benchmark::DoNotOptimize(private_refine(layers, q, RefinementThresholds::unlimited()));
}
BENCHMARK(BM_PrivateRefine)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
