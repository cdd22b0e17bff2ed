#include <benchmark/benchmark.h>

#include <string>

#include "codelink/source.hpp"

namespace {

// A synthetic translation unit with the constructs the scanner has to work
// hardest on: comments, string literals, and preprocessor blocks.
std::string make_source(std::size_t functions) {
  std::string out = "#include \"app.h\"\n\n";
  for (std::size_t i = 0; i < functions; ++i) {
    const std::string n = std::to_string(i);
    out += "/* handler " + n + " */\n";
    out += "static int handler_" + n + "(int value, const char* tag) {\n";
    out += "  const char* brace = \"{\" ; // } in comment\n";
    out += "#ifdef TRACE\n  trace(tag);\n#endif\n";
    out += "  if (value > 0) { value -= " + n + "; }\n";
    out += "  return value + (int)brace[0];\n";
    out += "}\n\n";
  }
  return out;
}

void bench_scan(benchmark::State& state) {
  const auto source = make_source(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto scan = codelink::extract_c_functions(source, "bench.c");
    benchmark::DoNotOptimize(scan);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(source.size()));
}
BENCHMARK(bench_scan)->Arg(16)->Arg(256)->Arg(2048);

}  // namespace
