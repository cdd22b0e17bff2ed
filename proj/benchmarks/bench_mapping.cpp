#include <benchmark/benchmark.h>

#include "codelink/mapping.hpp"
#include "support/generators.hpp"

namespace {

void bench_map_functions(benchmark::State& state) {
  testsupport::Rng rng(42);
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto corpus = testsupport::random_mapping_corpus(rng, size, size);
  const codelink::NameNormalization rules;
  codelink::MappingPolicy policy;
  policy.mode = codelink::MappingPolicy::Mode::lenient;

  for (auto _ : state) {
    auto result =
        codelink::map_functions(corpus.sources, corpus.decompiled, rules, policy);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(corpus.decompiled.size()));
}
BENCHMARK(bench_map_functions)->Arg(50)->Arg(200)->Arg(1000);

void bench_normalize(benchmark::State& state) {
  const codelink::NameNormalization rules;
  const std::string names[] = {"hv_loop_run.isra.0", "main", "_memcpy",
                               "handler.part.3.cold", "EventLoop::run"};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(codelink::normalize_name(names[i % 5], rules));
    ++i;
  }
}
BENCHMARK(bench_normalize);

}  // namespace
