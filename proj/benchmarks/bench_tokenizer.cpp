#include <vector>

#include <benchmark/benchmark.h>

#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"
#include "convtok/simulate.hpp"
#include "convtok/tokenizer.hpp"

namespace {

std::vector<convtok::Utterance> training_utterances(long conversations) {
  convtok::SimConfig config;
  config.conversations = conversations;
  std::vector<convtok::Utterance> utts;
  for (const auto& conv : convtok::generate_corpus(config)) {
    for (auto& utt : convtok::prepare_conversation(
             conv, {20.0, convtok::TaskSet::all()})) {
      utts.push_back(std::move(utt));
    }
  }
  return utts;
}

std::vector<std::string> surfaces() {
  using convtok::TokenKind;
  return {convtok::token_surface(TokenKind::SC),
          convtok::token_surface(TokenKind::EP),
          convtok::token_surface(TokenKind::NeOpen),
          convtok::token_surface(TokenKind::NeClose)};
}

void bm_train(benchmark::State& state) {
  const auto utts = training_utterances(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        convtok::train_bpe_utterances(utts, 1000, surfaces()));
  }
}

void bm_encode(benchmark::State& state) {
  const auto utts = training_utterances(20);
  const auto vocab =
      convtok::train_bpe_utterances(utts, state.range(0), surfaces());
  for (auto _ : state) {
    for (const auto& utt : utts) {
      benchmark::DoNotOptimize(convtok::encode(vocab, utt.items));
    }
  }
  state.SetItemsProcessed(state.iterations() * utts.size());
}

}  // namespace

BENCHMARK(bm_train)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_encode)->Arg(300)->Arg(1000);
