#include <vector>

#include <benchmark/benchmark.h>

#include "convtok/augment.hpp"
#include "convtok/extract.hpp"
#include "convtok/metrics.hpp"
#include "convtok/simulate.hpp"

namespace {

std::vector<convtok::Conversation> corpus_of(long conversations) {
  convtok::SimConfig config;
  config.conversations = conversations;
  return convtok::generate_corpus(config);
}

void bm_prepare(benchmark::State& state) {
  const auto corpus = corpus_of(state.range(0));
  const convtok::PackConfig config{20.0, convtok::TaskSet::all()};
  for (auto _ : state) {
    for (const auto& conv : corpus) {
      benchmark::DoNotOptimize(convtok::prepare_conversation(conv, config));
    }
  }
  state.SetItemsProcessed(state.iterations() * corpus.size());
}

void bm_evaluate(benchmark::State& state) {
  const auto corpus = corpus_of(state.range(0));
  std::vector<convtok::Utterance> refs;
  for (const auto& conv : corpus) {
    for (auto& utt : convtok::prepare_conversation(
             conv, {20.0, convtok::TaskSet::all()})) {
      refs.push_back(std::move(utt));
    }
  }
  convtok::NoiseConfig noise;
  noise.sub_rate = 0.1;
  noise.frame_jitter = 5;
  std::vector<convtok::Hypothesis> hyps;
  for (const auto& r : convtok::corrupt_corpus(refs, corpus, noise,
                                               convtok::FrameSpec{})) {
    hyps.push_back(r.hypothesis);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        convtok::evaluate_corpus(corpus, refs, hyps, convtok::EvalConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * refs.size());
}

}  // namespace

BENCHMARK(bm_prepare)->Arg(10)->Arg(50);
BENCHMARK(bm_evaluate)->Arg(10)->Arg(50);
