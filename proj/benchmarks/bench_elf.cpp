#include <benchmark/benchmark.h>

#include "codelink/binary.hpp"
#include "support/elf_fixture.hpp"

namespace {

void bench_read_elf(benchmark::State& state) {
  testsupport::ElfBuilder builder;
  const auto count = static_cast<std::size_t>(state.range(0));
  builder.text = std::string(count * 16, '\x90');
  for (std::size_t i = 0; i < count; ++i) {
    builder.syms.push_back(
        {"fn_" + std::to_string(i), 0x401000 + i * 16, 16, 2, 1});
  }
  const auto bytes = builder.build();

  for (auto _ : state) {
    auto fns = codelink::read_elf_functions(bytes, "bench");
    benchmark::DoNotOptimize(fns);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(count));
}
BENCHMARK(bench_read_elf)->Arg(16)->Arg(512)->Arg(8192);

void bench_placeholder(benchmark::State& state) {
  const std::string names[] = {"FUN_00401a2c", "hv_loop_run", "thunk_FUN_00401a2c",
                               "main", ""};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(codelink::is_placeholder_name(names[i % 5]));
    ++i;
  }
}
BENCHMARK(bench_placeholder);

}  // namespace

BENCHMARK_MAIN();
