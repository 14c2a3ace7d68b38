// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "mixclt/clt_harness.hpp"
#include "mixclt/coefficients.hpp"
#include "mixclt/corpus.hpp"
#include "mixclt/families.hpp"

using namespace mixclt;

namespace {

void BM_mc_sums_serial(benchmark::State& state) {
  const auto fam = family_two_state(parse_rate("0.3"));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_normalized_sums_serial(fam, static_cast<std::size_t>(state.range(0)), 2000, 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_mc_sums_parallel(benchmark::State& state) {
  const auto fam = family_two_state(parse_rate("0.3"));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_normalized_sums(fam, static_cast<std::size_t>(state.range(0)), 2000, 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_gaussian_sums_serial(benchmark::State& state) {
  const auto fam = family_gaussian_ar1(0.5, {});
  for (auto _ : state) benchmark::DoNotOptimize(mc_normalized_sums_serial(fam, 2000, 2000, 42));
  state.SetItemsProcessed(state.iterations() * 2000 * 2000);
}

void BM_gaussian_sums_parallel(benchmark::State& state) {
  const auto fam = family_gaussian_ar1(0.5, {});
  for (auto _ : state) benchmark::DoNotOptimize(mc_normalized_sums(fam, 2000, 2000, 42));
  state.SetItemsProcessed(state.iterations() * 2000 * 2000);
}

const std::vector<ChainSpec>& corpus() {
  static const auto c = random_corpus(7, 200, 4, 12);
  return c;
}

void BM_verify_corpus_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_corpus_serial(corpus(), VerifyOptions{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}

void BM_verify_corpus_parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_corpus(corpus(), VerifyOptions{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}

void BM_rho_k_serial(benchmark::State& state) {
  const auto spec = family_random(8, 3, 0.0).make_row(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rho_k_sequence_serial(spec));
}

void BM_rho_k_parallel(benchmark::State& state) {
  const auto spec = family_random(8, 3, 0.0).make_row(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rho_k_sequence(spec));
}

}  // namespace

BENCHMARK(BM_mc_sums_serial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_sums_parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gaussian_sums_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gaussian_sums_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_verify_corpus_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_verify_corpus_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rho_k_serial)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rho_k_parallel)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
