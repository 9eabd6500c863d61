#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "convtok/align.hpp"
#include "convtok/rng.hpp"

namespace {

std::vector<std::string> random_words(convtok::Rng& rng, long count) {
  static const char* pool[] = {"the", "a",    "call", "order", "left",
                               "ok",  "name", "what", "number", "line"};
  std::vector<std::string> words;
  for (long i = 0; i < count; ++i) {
    words.push_back(pool[rng.next_int(0, 9)]);
  }
  return words;
}

void bm_align(benchmark::State& state) {
  convtok::Rng rng(1u);
  const long n = state.range(0);
  const auto ref = random_words(rng, n);
  auto hyp = ref;
  // perturb ~10% of positions so the alignment does real work
  for (long i = 0; i < n / 10; ++i) {
    hyp[rng.next_int(0, n - 1)] = "zzz";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(convtok::levenshtein_align(ref, hyp));
  }
  state.SetComplexityN(n);
}

void bm_distance_only(benchmark::State& state) {
  convtok::Rng rng(2u);
  const long n = state.range(0);
  const auto ref = random_words(rng, n);
  const auto hyp = random_words(rng, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(convtok::levenshtein_distance(ref, hyp));
  }
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(bm_align)->Arg(50)->Arg(200)->Arg(800)->Complexity();
BENCHMARK(bm_distance_only)->Arg(50)->Arg(200)->Arg(800)->Complexity();

BENCHMARK_MAIN();
