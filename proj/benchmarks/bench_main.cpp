#include <benchmark/benchmark.h>

#include <map>

#include <mwe/csls.hpp>
#include <mwe/mat_trainer.hpp>
#include <mwe/mpsr_refiner.hpp>
#include <mwe/synthetic_lab.hpp>

namespace {

mwe::SyntheticFamily& family(std::size_t n) {
  static std::map<std::size_t, mwe::SyntheticFamily> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    mwe::FamilySpec spec;
    spec.n_langs = n;
    spec.seed = 3;
    it = cache.emplace(n, mwe::generate_family(spec)).first;
  }
  return it->second;
}

void BM_CslsTopk(benchmark::State& state) {
  const auto& f = family(2);
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  const mwe::Matrix x = f.spaces[0].matrix().topRows(rows);
  const mwe::Matrix y = f.spaces[1].matrix().topRows(rows);
  for (auto _ : state) benchmark::DoNotOptimize(mwe::csls_topk(x, y, 10, 1));
  state.SetItemsProcessed(state.iterations() * rows * rows);
}
BENCHMARK(BM_CslsTopk)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_InduceLexicon(benchmark::State& state) {
  const auto& f = family(2);
  const mwe::Matrix eye = mwe::Matrix::Identity(f.spec.dim, f.spec.dim);
  for (auto _ : state) benchmark::DoNotOptimize(mwe::induce_lexicon(f.spaces[0], f.spaces[1], eye, eye));
}
BENCHMARK(BM_InduceLexicon)->Unit(benchmark::kMillisecond);

// One MAT step; cost should grow linearly with the number of languages.
void BM_MatStep(benchmark::State& state) {
  const auto& f = family(static_cast<std::size_t>(state.range(0)));
  mwe::MatConfig cfg;
  cfg.dis_hidden = {128, 128};
  cfg.k = 3;
  cfg.seed = 1;
  mwe::MatTrainer trainer(f.spaces, 0, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step());
}
BENCHMARK(BM_MatStep)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
